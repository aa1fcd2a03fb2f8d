//! Query scoring: uncertainty measures, cosine information density, the
//! hybrid score, and top-k batch selection.

use std::cmp::Ordering;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::classifier::{ProbVector, SoftmaxHead};
use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::exec;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyKind {
    Entropy,
    Margin,
    LeastConfidence,
}

impl UncertaintyKind {
    pub fn measure(self, p: &ProbVector) -> Result<f64> {
        match self {
            UncertaintyKind::Entropy => Ok(entropy_uncertainty(p)),
            UncertaintyKind::Margin => margin_uncertainty(p),
            UncertaintyKind::LeastConfidence => least_confidence(p),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UncertaintyKind::Entropy => "entropy",
            UncertaintyKind::Margin => "margin",
            UncertaintyKind::LeastConfidence => "least_confidence",
        }
    }
}

fn is_uniform(p: &[f64]) -> bool {
    p.iter().all(|&q| q == p[0])
}

/// Shannon entropy divided by `ln K`, with `0 ln 0 = 0`. Zero for K = 1.
pub fn entropy_uncertainty(p: &ProbVector) -> f64 {
    let k = p.classes();
    if k < 2 {
        return 0.0;
    }
    // the summed form can land one ulp short of 1 for uniform vectors
    if is_uniform(p.as_slice()) {
        return 1.0;
    }
    let h: f64 = p
        .as_slice()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.ln())
        .sum();
    (h / (k as f64).ln()).clamp(0.0, 1.0)
}

fn top_two(p: &[f64]) -> (f64, f64) {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &q in p {
        if q > first {
            second = first;
            first = q;
        } else if q > second {
            second = q;
        }
    }
    (first, second)
}

/// `1 - (p(1st) - p(2nd))`.
pub fn margin_uncertainty(p: &ProbVector) -> Result<f64> {
    if p.classes() < 2 {
        return Err(Error::UndefinedMeasure(p.classes()));
    }
    let (a, b) = top_two(p.as_slice());
    Ok((1.0 - (a - b)).clamp(0.0, 1.0))
}

/// `(1 - max p) · K / (K - 1)`.
pub fn least_confidence(p: &ProbVector) -> Result<f64> {
    let k = p.classes();
    if k < 2 {
        return Err(Error::UndefinedMeasure(k));
    }
    if is_uniform(p.as_slice()) {
        return Ok(1.0);
    }
    let kf = k as f64;
    Ok(((1.0 - p.max()) * kf / (kf - 1.0)).clamp(0.0, 1.0))
}

/// Unit-normalized copy of `v`; the zero vector stays zero.
pub fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        vec![0.0; v.len()]
    } else {
        v.iter().map(|x| x / norm).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(&unit(a), &unit(b))
}

/// Positions `0..len` to compare against: all of them when `len <= cap`,
/// else `cap` drawn without replacement.
fn sample_positions(len: usize, cap: usize, seed: u64) -> Vec<usize> {
    if len <= cap {
        (0..len).collect()
    } else {
        index::sample(&mut rng::rng_from(seed), len, cap).into_vec()
    }
}

/// Mean cosine similarity between `candidate` and up to `sample_cap` members
/// of `pool` (which must not contain the candidate itself).
pub fn density(candidate: &[f64], pool: &[&[f64]], sample_cap: usize, seed: u64) -> Result<f64> {
    if pool.is_empty() || sample_cap == 0 {
        return Err(Error::UndefinedDensity);
    }
    let c = unit(candidate);
    let picks = sample_positions(pool.len(), sample_cap, seed);
    let sum: f64 = picks.iter().map(|&i| dot(&c, &unit(pool[i]))).sum();
    Ok(sum / picks.len() as f64)
}

/// Precomputed unit vectors for every instance of a dataset.
#[derive(Debug, Clone)]
pub struct DensityIndex {
    dim: usize,
    units: Vec<f64>,
}

impl DensityIndex {
    pub fn new(dataset: &Dataset) -> Self {
        let dim = dataset.dim();
        let mut units = Vec::with_capacity(dataset.len() * dim);
        for inst in dataset.instances() {
            units.extend(unit(&inst.features));
        }
        DensityIndex { dim, units }
    }

    fn row(&self, id: usize) -> &[f64] {
        &self.units[id * self.dim..(id + 1) * self.dim]
    }

    /// Density of `candidate` against `pool_ids` with the candidate removed.
    ///
    /// Same sampling and arithmetic as [`density`] applied to the pool
    /// without the candidate, in `pool_ids` order.
    pub fn density_of(&self, candidate: usize, pool_ids: &[usize], sample_cap: usize, seed: u64) -> Result<f64> {
        let skip = pool_ids.iter().position(|&id| id == candidate);
        let len = pool_ids.len() - usize::from(skip.is_some());
        if len == 0 || sample_cap == 0 {
            return Err(Error::UndefinedDensity);
        }
        let c = self.row(candidate);
        let picks = sample_positions(len, sample_cap, seed);
        let sum: f64 = picks
            .iter()
            .map(|&p| {
                let p = match skip {
                    Some(s) if p >= s => p + 1,
                    _ => p,
                };
                dot(c, self.row(pool_ids[p]))
            })
            .sum();
        Ok(sum / picks.len() as f64)
    }
}

/// `uncertainty × max(density, 0)^β`; with no density the uncertainty itself.
pub fn hybrid_score(uncertainty: f64, density: f64, beta: f64) -> f64 {
    uncertainty * density.max(0.0).powf(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredInstance {
    pub id: usize,
    pub uncertainty: f64,
    /// Not computed when β = 0, since it cannot affect the score.
    pub density: Option<f64>,
    pub hybrid: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategyConfig {
    pub uncertainty: UncertaintyKind,
    pub beta: f64,
    pub batch_k: usize,
    pub density_sample: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            uncertainty: UncertaintyKind::Entropy,
            beta: 1.0,
            batch_k: 20,
            density_sample: 2_000,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_k < 1 {
            return Err(Error::InvalidConfig("batch_k must be >= 1".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("beta must be finite and >= 0".into()));
        }
        if self.density_sample < 1 {
            return Err(Error::InvalidConfig("density_sample must be >= 1".into()));
        }
        Ok(())
    }
}

fn score_one(
    head: &SoftmaxHead,
    dataset: &Dataset,
    index: &DensityIndex,
    pool: &[usize],
    config: &StrategyConfig,
    seed: u64,
    id: usize,
) -> Result<ScoredInstance> {
    let p = head.predict_proba(dataset.features(id))?;
    let uncertainty = config.uncertainty.measure(&p)?;
    // A lone candidate has nothing to be dense against; it is selected regardless.
    if config.beta == 0.0 || pool.len() == 1 {
        return Ok(ScoredInstance {
            id,
            uncertainty,
            density: None,
            hybrid: uncertainty,
        });
    }
    let d = index.density_of(id, pool, config.density_sample, rng::derive(&[seed, id as u64]))?;
    Ok(ScoredInstance {
        id,
        uncertainty,
        density: Some(d),
        hybrid: hybrid_score(uncertainty, d, config.beta),
    })
}

/// Scores every id in `pool` against the rest of `pool`, sequentially.
pub fn score_pool_seq(
    head: &SoftmaxHead,
    dataset: &Dataset,
    index: &DensityIndex,
    pool: &[usize],
    config: &StrategyConfig,
    seed: u64,
) -> Result<Vec<ScoredInstance>> {
    exec::map_seq(pool, |&id| score_one(head, dataset, index, pool, config, seed, id))
        .into_iter()
        .collect()
}

#[cfg(feature = "parallel")]
pub fn score_pool_par(
    head: &SoftmaxHead,
    dataset: &Dataset,
    index: &DensityIndex,
    pool: &[usize],
    config: &StrategyConfig,
    seed: u64,
) -> Result<Vec<ScoredInstance>> {
    exec::map_par(pool, |&id| score_one(head, dataset, index, pool, config, seed, id))
        .into_iter()
        .collect()
}

/// Scores `pool` with the parallel path when the `parallel` feature is on.
///
/// Density subsamples are seeded per candidate from `seed`, so the result
/// does not depend on the worker count.
pub fn score_pool(
    head: &SoftmaxHead,
    dataset: &Dataset,
    index: &DensityIndex,
    pool: &[usize],
    config: &StrategyConfig,
    seed: u64,
) -> Result<Vec<ScoredInstance>> {
    #[cfg(feature = "parallel")]
    {
        score_pool_par(head, dataset, index, pool, config, seed)
    }
    #[cfg(not(feature = "parallel"))]
    {
        score_pool_seq(head, dataset, index, pool, config, seed)
    }
}

fn by_score_then_id(a: &ScoredInstance, b: &ScoredInstance) -> Ordering {
    b.hybrid.total_cmp(&a.hybrid).then(a.id.cmp(&b.id))
}

/// The `min(k, n)` highest hybrid scores ordered by (score desc, id asc).
pub fn select_batch(scored: &[ScoredInstance], k: usize) -> Vec<usize> {
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    let mut ranked = scored.to_vec();
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, by_score_then_id);
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(by_score_then_id);
    ranked.into_iter().map(|s| s.id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn scored(scores: &[f64]) -> Vec<ScoredInstance> {
        scores
            .iter()
            .enumerate()
            .map(|(id, &h)| ScoredInstance {
                id,
                uncertainty: h,
                density: None,
                hybrid: h,
            })
            .collect()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_uncertainty(&ProbVector::uniform(4)), 1.0);
        assert_eq!(entropy_uncertainty(&pv(&[0.0, 1.0, 0.0])), 0.0);
        // raw H = 0.80182, / ln 3
        let u = entropy_uncertainty(&pv(&[0.7, 0.2, 0.1]));
        assert!((u - 0.729_846_699_162_097_5).abs() < 1e-12, "{u}");
    }

    #[test]
    fn margin_examples() {
        assert_eq!(margin_uncertainty(&pv(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(margin_uncertainty(&ProbVector::uniform(5)).unwrap(), 1.0);
        assert!((margin_uncertainty(&pv(&[0.5, 0.3, 0.2])).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(margin_uncertainty(&pv(&[1.0])), Err(Error::UndefinedMeasure(1))));
    }

    #[test]
    fn least_confidence_examples() {
        assert_eq!(least_confidence(&pv(&[0.0, 0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(least_confidence(&ProbVector::uniform(10)).unwrap(), 1.0);
        assert!((least_confidence(&pv(&[0.5, 0.3, 0.2])).unwrap() - 0.75).abs() < 1e-15);
        assert!(least_confidence(&pv(&[1.0])).is_err());
    }

    #[test]
    fn density_examples() {
        let c = [1.0, 0.0];
        let same: Vec<&[f64]> = vec![&[2.0, 0.0], &[0.5, 0.0]];
        assert!((density(&c, &same, 10, 0).unwrap() - 1.0).abs() < 1e-15);
        let orth: Vec<&[f64]> = vec![&[0.0, 1.0], &[0.0, -3.0]];
        assert_eq!(density(&c, &orth, 10, 0).unwrap(), 0.0);
        let mixed: Vec<&[f64]> = vec![&[1.0, 0.0], &[0.0, 1.0]];
        assert!((density(&c, &mixed, 10, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(density(&c, &[], 10, 0), Err(Error::UndefinedDensity)));
        let zero: Vec<&[f64]> = vec![&[0.0, 0.0]];
        assert_eq!(density(&c, &zero, 10, 0).unwrap(), 0.0);
    }

    #[test]
    fn density_subsample_is_seeded() {
        let pool: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64).cos(), (i as f64).sin()]).collect();
        let refs: Vec<&[f64]> = pool.iter().map(Vec::as_slice).collect();
        let a = density(&[1.0, 0.0], &refs, 7, 42).unwrap();
        let b = density(&[1.0, 0.0], &refs, 7, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn hybrid_examples() {
        assert_eq!(hybrid_score(0.37, 0.2, 0.0), 0.37);
        assert_eq!(hybrid_score(0.37, -0.2, 0.0), 0.37);
        assert!((hybrid_score(0.8, 0.5, 1.0) - 0.4).abs() < 1e-15);
        assert_eq!(hybrid_score(0.8, -0.3, 1.0), 0.0);
        assert_eq!(hybrid_score(0.8, 0.0, 1.0), 0.0);
    }

    #[test]
    fn select_examples() {
        assert_eq!(select_batch(&scored(&[0.1, 0.9, 0.9, 0.3]), 2), vec![1, 2]);
        assert_eq!(select_batch(&scored(&[0.1, 0.9, 0.3]), 1), vec![1]);
        assert_eq!(select_batch(&scored(&[0.1, 0.9, 0.3]), 5), vec![1, 2, 0]);
        assert!(select_batch(&[], 3).is_empty());
    }

    #[test]
    fn lone_candidate_scores_without_density() {
        let ds = crate::data_io::generate_synthetic(&crate::data_io::SyntheticSpec {
            classes: 2,
            dim: 2,
            per_class: 5,
            ..Default::default()
        })
        .unwrap();
        let index = DensityIndex::new(&ds);
        let head = SoftmaxHead::zeros(2, 2);
        let id = ds.train_ids()[0];
        let s = score_pool_seq(&head, &ds, &index, &[id], &StrategyConfig::default(), 1).unwrap();
        assert_eq!(s[0].density, None);
        assert_eq!(s[0].hybrid, 1.0);
        assert!(matches!(index.density_of(id, &[id], 10, 0), Err(Error::UndefinedDensity)));
    }
}
