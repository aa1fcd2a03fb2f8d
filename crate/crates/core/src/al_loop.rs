//! The active-learning loop: train, score, select, query, pseudo-label,
//! evaluate, repeated until the oracle budget, the pool or the round limit
//! runs out. Also the multi-seed strategy comparison.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::budget::{assign_pseudo_labels, BudgetLedger, PseudoAssignment};
use crate::classifier::{evaluate, nll_loss, sgd_fit, Example, HeadCheckpoint, SoftmaxHead, TrainConfig};
use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::exec;
use crate::oracle::{Oracle, OracleConfig};
use crate::pools::{init_pools, LabelRecord, PoolSnapshot, PoolState};
use crate::rng::{self, stream};
use crate::strategies::{score_pool, select_batch, DensityIndex, ScoredInstance, StrategyConfig, UncertaintyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStrategy {
    /// Uniform sampling from the unlabeled pool (passive baseline).
    Random,
    /// Top-k by hybrid uncertainty × density score.
    Scored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub query: QueryStrategy,
    pub strategy: StrategyConfig,
    pub train: TrainConfig,
    pub seed_count: usize,
    /// Oracle budget `m`.
    pub budget: u64,
    /// Pseudo-label confidence threshold τ.
    pub tau: f64,
    pub pseudo_enabled: bool,
    /// Pseudo-labels per round; `None` means 5 × batch_k.
    pub pseudo_cap: Option<usize>,
    pub noise_rate: f64,
    pub max_rounds: Option<usize>,
    pub seed: u64,
    /// Record per-round wall time. Off by default so reports are byte-reproducible.
    pub record_timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            query: QueryStrategy::Scored,
            strategy: StrategyConfig::default(),
            train: TrainConfig::default(),
            seed_count: 100,
            budget: 1_000,
            tau: 0.95,
            pseudo_enabled: true,
            pseudo_cap: None,
            noise_rate: 0.0,
            max_rounds: None,
            seed: 0,
            record_timing: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.strategy.validate()?;
        self.train.validate()?;
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidConfig(format!("tau {} must lie in (0, 1]", self.tau)));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::InvalidConfig(format!(
                "noise rate {} must lie in [0, 1]",
                self.noise_rate
            )));
        }
        if self.seed_count == 0 {
            return Err(Error::InvalidConfig("seed_count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn effective_pseudo_cap(&self) -> usize {
        self.pseudo_cap.unwrap_or(5 * self.strategy.batch_k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub test_accuracy: f64,
    pub test_nll: f64,
    pub train_loss: f64,
    pub oracle_spent: u64,
    pub labeled_count: usize,
    pub pseudo_count: usize,
    /// Fraction of `D^H` whose pseudo-label matches the hidden truth.
    pub pseudo_accuracy: Option<f64>,
    pub queried: Vec<usize>,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BudgetExhausted,
    PoolExhausted,
    RoundLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_accuracy: f64,
    pub final_train_loss: f64,
    pub oracle_spent: u64,
    pub labeled_count: usize,
    pub pseudo_count: usize,
    pub pseudo_assigned_total: u64,
    pub query_rounds: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub dataset_name: String,
    pub dataset_digest: String,
    pub config: RunConfig,
    /// Query rounds followed by one final evaluation row.
    pub rounds: Vec<RoundRecord>,
    pub summary: Option<RunSummary>,
}

impl RunReport {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn final_accuracy(&self) -> Option<f64> {
        self.rounds.last().map(|r| r.test_accuracy)
    }
}

/// Everything a round produced besides its metrics row.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub record: RoundRecord,
    pub scored: Option<Vec<ScoredInstance>>,
    pub pseudo: Vec<PseudoAssignment>,
}

/// Resumable state of an experiment, written after every round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunState {
    pub format_version: u32,
    pub dataset_digest: String,
    pub config: RunConfig,
    pub pools: PoolSnapshot,
    pub ledger: BudgetLedger,
    pub head: HeadCheckpoint,
    pub rounds: Vec<RoundRecord>,
}

impl RunState {
    pub const FORMAT_VERSION: u32 = 1;
}

/// Uniform sample of `k` unlabeled ids without replacement.
pub fn random_baseline_strategy(state: &PoolState, k: usize, rng_seed: u64) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let ids = state.unlabeled_ids();
    if ids.is_empty() {
        return Err(Error::PoolExhausted);
    }
    if k >= ids.len() {
        return Ok(ids);
    }
    Ok(index::sample(&mut rng::rng_from(rng_seed), ids.len(), k)
        .into_iter()
        .map(|i| ids[i])
        .collect())
}

/// A running experiment over one dataset.
pub struct Experiment<'a> {
    dataset: &'a Dataset,
    config: RunConfig,
    index: DensityIndex,
    pools: PoolState,
    head: SoftmaxHead,
    ledger: BudgetLedger,
    rounds: Vec<RoundRecord>,
}

impl<'a> Experiment<'a> {
    pub fn new(dataset: &'a Dataset, config: RunConfig) -> Result<Self> {
        config.validate()?;
        if dataset.test_ids().is_empty() {
            return Err(Error::InvalidConfig("dataset has no test split".into()));
        }
        let pools = init_pools(dataset, config.seed_count, rng::derive(&[config.seed, stream::SEED_SET]))?;
        let ledger = BudgetLedger::new(
            config.budget,
            config.strategy.batch_k as u64,
            config.effective_pseudo_cap(),
            config.tau,
        )?;
        Ok(Experiment {
            dataset,
            index: DensityIndex::new(dataset),
            head: SoftmaxHead::zeros(dataset.classes(), dataset.dim()),
            config,
            pools,
            ledger,
            rounds: Vec::new(),
        })
    }

    pub fn resume(dataset: &'a Dataset, state: RunState) -> Result<Self> {
        if state.format_version != RunState::FORMAT_VERSION {
            return Err(Error::Integrity(format!(
                "unsupported run-state version {}",
                state.format_version
            )));
        }
        if state.dataset_digest != dataset.digest() {
            return Err(Error::Integrity("run state was recorded on a different dataset".into()));
        }
        state.config.validate()?;
        let pools = state.pools.restore(dataset)?;
        let head = state.head.into_head()?;
        if head.classes() != dataset.classes() || head.dim() != dataset.dim() {
            return Err(Error::Integrity("head shape does not match dataset".into()));
        }
        if state.rounds.len() != pools.round() {
            return Err(Error::Integrity("round count disagrees with pool state".into()));
        }
        Ok(Experiment {
            dataset,
            index: DensityIndex::new(dataset),
            config: state.config,
            pools,
            head,
            ledger: state.ledger,
            rounds: state.rounds,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn pools(&self) -> &PoolState {
        &self.pools
    }

    pub fn head(&self) -> &SoftmaxHead {
        &self.head
    }

    pub fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    /// Why the loop must stop now, if it must.
    pub fn termination(&self) -> Option<Termination> {
        if self.ledger.remaining_allowance() == 0 {
            Some(Termination::BudgetExhausted)
        } else if self.pools.unlabeled_len() == 0 {
            Some(Termination::PoolExhausted)
        } else if self.config.max_rounds.is_some_and(|cap| self.rounds.len() >= cap) {
            Some(Termination::RoundLimit)
        } else {
            None
        }
    }

    fn train_config(&self, round: usize) -> TrainConfig {
        TrainConfig {
            shuffle_seed: rng::round_seed(self.config.seed, stream::TRAIN, round) ^ self.config.train.shuffle_seed,
            ..self.config.train
        }
    }

    /// Trains on `D^L ∪ D^H` and returns the new head and its training loss.
    fn fit(&self, round: usize) -> Result<(SoftmaxHead, f64)> {
        let ds = self.dataset;
        let lambda = self.config.train.pseudo_weight;
        let trainset: Vec<Example<'_>> = self
            .pools
            .labeled()
            .map(|r| Example::new(ds.features(r.instance_id), r.label))
            .chain(
                self.pools
                    .pseudo()
                    .map(|r| Example::weighted(ds.features(r.instance_id), r.label, lambda)),
            )
            .collect();
        let head = sgd_fit(&self.head, &trainset, &self.train_config(round))?;
        let loss = nll_loss(&head, &trainset)?;
        Ok((head, loss))
    }

    fn test_metrics(&self, head: &SoftmaxHead) -> Result<(f64, f64)> {
        let ds = self.dataset;
        let test: Vec<Example<'_>> = ds
            .test_ids()
            .iter()
            .map(|&id| Example::new(ds.features(id), ds.true_label(id)))
            .collect();
        let m = evaluate(head, &test)?;
        Ok((m.accuracy, m.mean_nll))
    }

    fn pseudo_accuracy(&self) -> Option<f64> {
        let n = self.pools.pseudo_len();
        (n > 0).then(|| {
            let hits = self
                .pools
                .pseudo()
                .filter(|r| r.label == self.dataset.true_label(r.instance_id))
                .count();
            hits as f64 / n as f64
        })
    }

    fn select(&self, head: &SoftmaxHead, round: usize, n: usize) -> Result<(Vec<usize>, Option<Vec<ScoredInstance>>)> {
        match self.config.query {
            QueryStrategy::Random => {
                let seed = rng::round_seed(self.config.seed, stream::RANDOM_QUERY, round);
                Ok((random_baseline_strategy(&self.pools, n, seed)?, None))
            }
            QueryStrategy::Scored => {
                let pool = self.pools.unlabeled_ids();
                let seed = rng::round_seed(self.config.seed, stream::DENSITY, round);
                let scored = score_pool(head, self.dataset, &self.index, &pool, &self.config.strategy, seed)?;
                Ok((select_batch(&scored, n), Some(scored)))
            }
        }
    }

    /// One full round: train, score, select, query, pseudo-label, evaluate.
    pub fn run_round(&mut self) -> Result<RoundOutcome> {
        if self.pools.unlabeled_len() == 0 {
            return Err(Error::PoolExhausted);
        }
        let allowance = self.ledger.remaining_allowance();
        if allowance == 0 {
            return Err(Error::BudgetExhausted {
                requested: 1,
                remaining: 0,
            });
        }
        let started = Instant::now();
        let round = self.rounds.len();

        let (head, train_loss) = self.fit(round)?;

        let n = (allowance as usize).min(self.pools.unlabeled_len());
        let (picked, scored) = self.select(&head, round, n)?;

        let oracle = Oracle::new(
            self.dataset,
            OracleConfig {
                noise_rate: self.config.noise_rate,
                rng_seed: self.config.seed,
            },
        )?;
        let mut ledger = self.ledger.clone();
        let mut answers = Vec::with_capacity(picked.len());
        for &id in &picked {
            answers.push((id, oracle.query(id, &mut ledger)?));
        }
        self.pools.commit_oracle_labels(&answers, round)?;
        self.ledger = ledger;

        let pseudo = if self.config.pseudo_enabled {
            let pool = self.pools.unlabeled_ids();
            let probs = exec::map(&pool, |&id| head.predict_proba(self.dataset.features(id)));
            let probs = probs.into_iter().collect::<Result<Vec<_>>>()?;
            assign_pseudo_labels(
                pool.iter().copied().zip(probs.iter()),
                self.config.tau,
                self.ledger.pseudo_cap_per_round,
            )
        } else {
            Vec::new()
        };
        let records: Vec<LabelRecord> = pseudo
            .iter()
            .map(|a| LabelRecord::pseudo(a.instance_id, a.label, a.confidence, round))
            .collect();
        self.pools.rebuild_pseudo_set(&records)?;
        self.ledger.record_pseudo(records.len());

        let (test_accuracy, test_nll) = self.test_metrics(&head)?;
        self.head = head;
        self.pools.set_round(round + 1);
        let record = RoundRecord {
            round,
            test_accuracy,
            test_nll,
            train_loss,
            oracle_spent: self.ledger.oracle_spent,
            labeled_count: self.pools.labeled_len(),
            pseudo_count: self.pools.pseudo_len(),
            pseudo_accuracy: self.pseudo_accuracy(),
            queried: picked,
            wall_time_ms: self.elapsed(started),
        };
        self.rounds.push(record.clone());
        Ok(RoundOutcome {
            record,
            scored,
            pseudo,
        })
    }

    fn elapsed(&self, started: Instant) -> u64 {
        if self.config.record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        }
    }

    pub fn snapshot(&self) -> RunState {
        RunState {
            format_version: RunState::FORMAT_VERSION,
            dataset_digest: self.dataset.digest().to_string(),
            config: self.config.clone(),
            pools: self.pools.to_snapshot(),
            ledger: self.ledger.clone(),
            head: self.head.to_checkpoint(),
            rounds: self.rounds.clone(),
        }
    }

    /// Final update of the head on `D^L ∪ D^H` and the closing evaluation row.
    pub fn finish(mut self) -> Result<(RunReport, SoftmaxHead)> {
        let termination = self.termination().unwrap_or(Termination::RoundLimit);
        let started = Instant::now();
        let round = self.rounds.len();
        let (head, train_loss) = self.fit(round)?;
        let (test_accuracy, test_nll) = self.test_metrics(&head)?;
        self.rounds.push(RoundRecord {
            round,
            test_accuracy,
            test_nll,
            train_loss,
            oracle_spent: self.ledger.oracle_spent,
            labeled_count: self.pools.labeled_len(),
            pseudo_count: self.pools.pseudo_len(),
            pseudo_accuracy: self.pseudo_accuracy(),
            queried: Vec::new(),
            wall_time_ms: self.elapsed(started),
        });
        let summary = RunSummary {
            final_accuracy: test_accuracy,
            final_train_loss: train_loss,
            oracle_spent: self.ledger.oracle_spent,
            labeled_count: self.pools.labeled_len(),
            pseudo_count: self.pools.pseudo_len(),
            pseudo_assigned_total: self.ledger.pseudo_assigned_total,
            query_rounds: round,
            termination,
        };
        let report = RunReport {
            format_version: RunReport::FORMAT_VERSION,
            dataset_name: self.dataset.name().to_string(),
            dataset_digest: self.dataset.digest().to_string(),
            config: self.config,
            rounds: self.rounds,
            summary: Some(summary),
        };
        Ok((report, head))
    }

    /// Runs rounds until termination, calling `on_round` after each.
    pub fn run_to_end<F>(mut self, mut on_round: F) -> Result<(RunReport, SoftmaxHead)>
    where
        F: FnMut(&Experiment<'a>, &RoundOutcome) -> Result<()>,
    {
        while self.termination().is_none() {
            let outcome = self.run_round()?;
            on_round(&self, &outcome)?;
        }
        self.finish()
    }
}

/// Runs one complete experiment.
pub fn run_experiment(dataset: &Dataset, config: &RunConfig) -> Result<RunReport> {
    let (report, _) = Experiment::new(dataset, config.clone())?.run_to_end(|_, _| Ok(()))?;
    Ok(report)
}

/// A named configuration taking part in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub config: RunConfig,
}

impl Variant {
    pub const PRESETS: [&'static str; 5] = ["random", "uncertainty", "hybrid", "uncertainty_budget", "hybrid_budget"];

    /// Built-in variants layered over `base`.
    ///
    /// `random`: uniform sampling, no pseudo-labels. `uncertainty`: β = 0, no
    /// pseudo-labels (classical AL). `hybrid`: β from `base` (1 if `base` has
    /// β = 0), no pseudo-labels. The `_budget` forms enable the annotator.
    pub fn preset(name: &str, base: &RunConfig) -> Result<Variant> {
        let mut config = base.clone();
        let hybrid_beta = if base.strategy.beta > 0.0 { base.strategy.beta } else { 1.0 };
        match name {
            "random" => {
                config.query = QueryStrategy::Random;
                config.pseudo_enabled = false;
            }
            "uncertainty" | "uncertainty_budget" => {
                config.query = QueryStrategy::Scored;
                config.strategy.beta = 0.0;
                config.pseudo_enabled = name == "uncertainty_budget";
            }
            "hybrid" | "hybrid_budget" => {
                config.query = QueryStrategy::Scored;
                config.strategy.beta = hybrid_beta;
                config.pseudo_enabled = name == "hybrid_budget";
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown strategy `{other}` (expected one of {})",
                    Self::PRESETS.join(", ")
                )))
            }
        }
        Ok(Variant {
            name: name.to_string(),
            config,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub round: usize,
    pub runs: usize,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub mean_oracle_spent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub name: String,
    pub curve: Vec<CurvePoint>,
    pub final_accuracies: Vec<f64>,
    pub final_mean: f64,
    pub final_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDifference {
    pub variant: String,
    pub baseline: String,
    pub seed: u64,
    /// Final accuracy of `variant` minus that of `baseline` on the same seed.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub format_version: u32,
    pub dataset_digest: String,
    pub seeds: Vec<u64>,
    pub variants: Vec<VariantSummary>,
    pub paired: Vec<PairedDifference>,
    pub runs: Vec<Vec<RunReport>>,
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ComparisonReport {
    pub const FORMAT_VERSION: u32 = 1;

    /// Aggregates `runs[variant][seed]`. Every run must share one dataset digest.
    pub fn from_runs(names: &[String], seeds: &[u64], runs: Vec<Vec<RunReport>>) -> Result<Self> {
        if names.len() != runs.len() || runs.iter().any(|r| r.len() != seeds.len()) {
            return Err(Error::Integrity("run table does not match variants × seeds".into()));
        }
        let digest = runs
            .first()
            .and_then(|r| r.first())
            .map(|r| r.dataset_digest.clone())
            .ok_or(Error::EmptyInput("comparison runs"))?;
        if let Some(bad) = runs.iter().flatten().find(|r| r.dataset_digest != digest) {
            return Err(Error::Integrity(format!(
                "dataset digest mismatch: {} vs {}",
                bad.dataset_digest, digest
            )));
        }
        let mut variants = Vec::with_capacity(names.len());
        for (name, per_seed) in names.iter().zip(&runs) {
            let max_rounds = per_seed.iter().map(|r| r.rounds.len()).max().unwrap_or(0);
            let curve = (0..max_rounds)
                .map(|i| {
                    let rows: Vec<&RoundRecord> = per_seed.iter().filter_map(|r| r.rounds.get(i)).collect();
                    let accs: Vec<f64> = rows.iter().map(|r| r.test_accuracy).collect();
                    let (mean_accuracy, sd_accuracy) = mean_sd(&accs);
                    let spent: Vec<f64> = rows.iter().map(|r| r.oracle_spent as f64).collect();
                    CurvePoint {
                        round: i,
                        runs: rows.len(),
                        mean_accuracy,
                        sd_accuracy,
                        mean_oracle_spent: mean_sd(&spent).0,
                    }
                })
                .collect();
            let final_accuracies: Vec<f64> = per_seed.iter().map(|r| r.final_accuracy().unwrap_or(f64::NAN)).collect();
            let (final_mean, final_sd) = mean_sd(&final_accuracies);
            variants.push(VariantSummary {
                name: name.clone(),
                curve,
                final_accuracies,
                final_mean,
                final_sd,
            });
        }
        let mut paired = Vec::new();
        if let Some((base, rest)) = variants.split_first() {
            for v in rest {
                for (s, &seed) in seeds.iter().enumerate() {
                    paired.push(PairedDifference {
                        variant: v.name.clone(),
                        baseline: base.name.clone(),
                        seed,
                        difference: v.final_accuracies[s] - base.final_accuracies[s],
                    });
                }
            }
        }
        Ok(ComparisonReport {
            format_version: Self::FORMAT_VERSION,
            dataset_digest: digest,
            seeds: seeds.to_vec(),
            variants,
            paired,
            runs,
        })
    }

    pub fn variant(&self, name: &str) -> Option<&VariantSummary> {
        self.variants.iter().find(|v| v.name == name)
    }

    /// Mean paired difference of `variant` against the first (baseline) variant.
    pub fn mean_paired_difference(&self, variant: &str) -> Option<f64> {
        let diffs: Vec<f64> = self
            .paired
            .iter()
            .filter(|p| p.variant == variant)
            .map(|p| p.difference)
            .collect();
        (!diffs.is_empty()).then(|| mean_sd(&diffs).0)
    }
}

/// Runs every variant on every seed and aggregates the results.
///
/// With `parallel` (and the `parallel` feature) the variant × seed runs fan
/// out to worker threads; the report is identical either way.
pub fn compare_strategies(dataset: &Dataset, variants: &[Variant], seeds: &[u64], parallel: bool) -> Result<ComparisonReport> {
    if variants.len() < 2 {
        return Err(Error::InvalidConfig("comparison needs at least two variants".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("comparison needs at least one seed".into()));
    }
    let mut names = BTreeSet::new();
    for v in variants {
        if !names.insert(v.name.as_str()) {
            return Err(Error::InvalidConfig(format!("duplicate variant name `{}`", v.name)));
        }
    }
    let jobs: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let run = |&(v, seed): &(usize, u64)| {
        let config = RunConfig {
            seed,
            ..variants[v].config.clone()
        };
        run_experiment(dataset, &config)
    };
    let results = if parallel {
        exec::map(&jobs, run)
    } else {
        exec::map_seq(&jobs, run)
    };
    let mut flat = results.into_iter();
    let mut table = Vec::with_capacity(variants.len());
    for _ in variants {
        let row = flat.by_ref().take(seeds.len()).collect::<Result<Vec<_>>>()?;
        table.push(row);
    }
    let names: Vec<String> = variants.iter().map(|v| v.name.clone()).collect();
    ComparisonReport::from_runs(&names, seeds, table)
}

/// Parses a strategy name as accepted on the command line.
pub fn parse_uncertainty(name: &str) -> Result<UncertaintyKind> {
    match name {
        "entropy" => Ok(UncertaintyKind::Entropy),
        "margin" => Ok(UncertaintyKind::Margin),
        "lc" | "least_confidence" => Ok(UncertaintyKind::LeastConfidence),
        other => Err(Error::InvalidConfig(format!("unknown uncertainty measure `{other}`"))),
    }
}
