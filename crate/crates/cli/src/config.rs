//! Config-file schema and flag resolution (flags > file > defaults).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use budget_al::al_loop::{parse_uncertainty, QueryStrategy, RunConfig};
use budget_al::data_io::{generate_synthetic, load_embedding_csv, Dataset, SyntheticSpec};
use budget_al::Error;
use clap::Args;
use serde::Deserialize;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(Error),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    /// Configuration problems exit 2, everything else 1.
    pub fn from_core(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::StratificationInfeasible { .. } => CliError::Config(e),
            other => CliError::Runtime(other),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Config(e) => write!(f, "config: {e}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Csv(PathBuf),
}

/// JSON config file. Every field is optional; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<DatasetSource>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub query: Option<QueryStrategy>,
    pub uncertainty: Option<String>,
    pub beta: Option<f64>,
    pub batch_k: Option<usize>,
    pub density_sample: Option<usize>,
    pub budget: Option<u64>,
    pub seed_count: Option<usize>,
    pub tau: Option<f64>,
    pub pseudo: Option<bool>,
    pub pseudo_cap: Option<usize>,
    pub pseudo_weight: Option<f64>,
    pub noise: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub max_rounds: Option<usize>,
    pub timing: Option<bool>,
}

/// Flags shared by `run` and `compare`. Unset flags fall back to the config file, then defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// Embedding CSV to use instead of the configured dataset [default: reference synthetic set]
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Query strategy for `run`: scored | random [default: scored]
    #[arg(long)]
    pub query: Option<String>,
    /// Uncertainty measure: entropy | margin | lc [default: entropy]
    #[arg(long)]
    pub uncertainty: Option<String>,
    /// Density exponent β in uncertainty × density^β [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Pseudo-label confidence threshold τ [default: 0.95]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Oracle query budget m [default: 1000]
    #[arg(long)]
    pub budget: Option<u64>,
    /// Oracle queries per round k [default: 20]
    #[arg(long)]
    pub batch_k: Option<usize>,
    /// Disable the pseudo-label annotator
    #[arg(long)]
    pub no_pseudo: bool,
    /// Oracle label-noise rate [default: 0]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Training epochs per round [default: 15]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// SGD mini-batch size [default: 32]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// SGD learning rate [default: 0.05]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Initial seed labels [default: 100]
    #[arg(long)]
    pub seed_count: Option<usize>,
    /// Pseudo-labels per round [default: 5 × batch-k]
    #[arg(long)]
    pub pseudo_cap: Option<usize>,
    /// Loss weight λ of pseudo-labeled examples [default: 1]
    #[arg(long)]
    pub pseudo_weight: Option<f64>,
    /// Pool members compared per density estimate [default: 2000]
    #[arg(long)]
    pub density_sample: Option<usize>,
    /// Stop after this many query rounds [default: unlimited]
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Record per-round wall time in reports (makes reports non-reproducible)
    #[arg(long)]
    pub timing: bool,
}

pub struct Resolved {
    pub run: RunConfig,
    pub dataset: DatasetSource,
    pub out_dir: PathBuf,
    pub provenance: Vec<(String, String, &'static str)>,
}

impl Resolved {
    pub fn print_provenance(&self) {
        eprintln!("effective configuration (flag > file > default):");
        for (key, value, source) in &self.provenance {
            eprintln!("  {key:<15} {value:<40} [{source}]");
        }
    }

    pub fn load_dataset(&self) -> Result<Dataset, CliError> {
        match &self.dataset {
            DatasetSource::Synthetic(spec) => generate_synthetic(spec).map_err(CliError::from_core),
            DatasetSource::Csv(path) => load_embedding_csv(path).map_err(|e| match e {
                Error::Io { .. } => CliError::Runtime(e),
                other => CliError::Config(other),
            }),
        }
    }
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(Error::Io { path: path.to_path_buf(), source: e }))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

struct Picker {
    log: Vec<(String, String, &'static str)>,
}

impl Picker {
    fn pick<T: Clone + fmt::Debug>(&mut self, key: &str, flag: Option<T>, file: Option<T>, default: T) -> T {
        let (value, source) = match (flag, file) {
            (Some(v), _) => (v, "flag"),
            (None, Some(v)) => (v, "file"),
            (None, None) => (default, "default"),
        };
        self.log.push((key.to_string(), format!("{value:?}"), source));
        value
    }
}

fn parse_query(s: &str) -> Result<QueryStrategy, CliError> {
    match s {
        "scored" => Ok(QueryStrategy::Scored),
        "random" => Ok(QueryStrategy::Random),
        other => Err(CliError::Usage(format!("unknown --query `{other}` (scored | random)"))),
    }
}

pub fn resolve(file: &FileConfig, seed: Option<u64>, out_dir: Option<PathBuf>, flags: &RunFlags) -> Result<Resolved, CliError> {
    let d = RunConfig::default();
    let mut p = Picker { log: Vec::new() };
    let mut run = RunConfig {
        seed: p.pick("seed", seed, file.seed, d.seed),
        ..RunConfig::default()
    };

    let query_flag = flags.query.as_deref().map(parse_query).transpose()?;
    run.query = p.pick("query", query_flag, file.query, d.query);
    let unc = p.pick(
        "uncertainty",
        flags.uncertainty.clone(),
        file.uncertainty.clone(),
        d.strategy.uncertainty.name().to_string(),
    );
    run.strategy.uncertainty = parse_uncertainty(&unc).map_err(|e| CliError::Usage(e.to_string()))?;
    run.strategy.beta = p.pick("beta", flags.beta, file.beta, d.strategy.beta);
    run.strategy.batch_k = p.pick("batch_k", flags.batch_k, file.batch_k, d.strategy.batch_k);
    run.strategy.density_sample = p.pick("density_sample", flags.density_sample, file.density_sample, d.strategy.density_sample);
    run.budget = p.pick("budget", flags.budget, file.budget, d.budget);
    run.seed_count = p.pick("seed_count", flags.seed_count, file.seed_count, d.seed_count);
    run.tau = p.pick("tau", flags.tau, file.tau, d.tau);
    run.pseudo_enabled = p.pick("pseudo", flags.no_pseudo.then_some(false), file.pseudo, d.pseudo_enabled);
    run.pseudo_cap = p.pick("pseudo_cap", flags.pseudo_cap.map(Some), file.pseudo_cap.map(Some), d.pseudo_cap);
    run.train.pseudo_weight = p.pick("pseudo_weight", flags.pseudo_weight, file.pseudo_weight, d.train.pseudo_weight);
    run.noise_rate = p.pick("noise", flags.noise, file.noise, d.noise_rate);
    run.train.epochs = p.pick("epochs", flags.epochs, file.epochs, d.train.epochs);
    run.train.batch_size = p.pick("batch_size", flags.batch_size, file.batch_size, d.train.batch_size);
    run.train.learning_rate = p.pick("lr", flags.lr, file.lr, d.train.learning_rate);
    run.max_rounds = p.pick("max_rounds", flags.max_rounds.map(Some), file.max_rounds.map(Some), d.max_rounds);
    run.record_timing = p.pick("timing", flags.timing.then_some(true), file.timing, d.record_timing);
    run.validate().map_err(CliError::Config)?;

    let dataset = p.pick(
        "dataset",
        flags.data.clone().map(DatasetSource::Csv),
        file.dataset.clone(),
        DatasetSource::Synthetic(SyntheticSpec::default()),
    );
    let out_dir = p.pick("out_dir", out_dir, file.out_dir.clone(), PathBuf::from("out"));
    Ok(Resolved {
        run,
        dataset,
        out_dir,
        provenance: p.log,
    })
}
