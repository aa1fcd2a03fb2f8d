//! Softmax output layer over frozen feature embeddings, trained by mini-batch SGD.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::rng;

/// Tolerance on `|sum(p) - 1|` accepted for a probability vector.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// A class-probability distribution of length K.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbs("empty vector".into()));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidProbs("entry outside [0, 1]".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidProbs(format!("entries sum to {sum}")));
        }
        Ok(ProbVector(probs))
    }

    pub fn uniform(classes: usize) -> Self {
        ProbVector(vec![1.0 / classes as f64; classes])
    }

    /// Numerically stable softmax of `logits`.
    pub fn softmax(logits: &[f64]) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        ProbVector(probs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    /// Index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }
}

/// One training or evaluation example borrowed from a dataset.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub features: &'a [f64],
    pub label: usize,
    pub weight: f64,
}

impl<'a> Example<'a> {
    pub fn new(features: &'a [f64], label: usize) -> Self {
        Example {
            features,
            label,
            weight: 1.0,
        }
    }

    pub fn weighted(features: &'a [f64], label: usize, weight: f64) -> Self {
        Example {
            features,
            label,
            weight,
        }
    }
}

/// The trainable output layer: a K×d weight matrix (row-major) and K biases.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxHead {
    classes: usize,
    dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl SoftmaxHead {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        SoftmaxHead {
            classes,
            dim,
            weights: vec![0.0; classes * dim],
            bias: vec![0.0; classes],
        }
    }

    pub fn from_parts(classes: usize, dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if classes == 0 || dim == 0 {
            return Err(Error::InvalidConfig("head needs K >= 1 and d >= 1".into()));
        }
        if weights.len() != classes * dim {
            return Err(Error::Shape {
                expected: classes * dim,
                got: weights.len(),
            });
        }
        if bias.len() != classes {
            return Err(Error::Shape {
                expected: classes,
                got: bias.len(),
            });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SoftmaxHead {
            classes,
            dim,
            weights,
            bias,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn check_input(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: features.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn logits_unchecked(&self, features: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.dim)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_input(features)?;
        Ok(self.logits_unchecked(features))
    }

    pub fn predict_proba(&self, features: &[f64]) -> Result<ProbVector> {
        Ok(ProbVector::softmax(&self.logits(features)?))
    }

    /// `-ln p(label | features)` via log-sum-exp, finite even when p underflows.
    fn example_nll(&self, features: &[f64], label: usize) -> f64 {
        let z = self.logits_unchecked(features);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        lse - z[label]
    }

    pub fn to_checkpoint(&self) -> HeadCheckpoint {
        HeadCheckpoint {
            format_version: HeadCheckpoint::FORMAT_VERSION,
            classes: self.classes,
            dim: self.dim,
            weights: self.weights.clone(),
            bias: self.bias.clone(),
        }
    }
}

/// JSON checkpoint of a head; weights are row-major K×d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadCheckpoint {
    pub format_version: u32,
    pub classes: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl HeadCheckpoint {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn into_head(self) -> Result<SoftmaxHead> {
        if self.format_version != Self::FORMAT_VERSION {
            return Err(Error::Integrity(format!(
                "unsupported head checkpoint version {}",
                self.format_version
            )));
        }
        SoftmaxHead::from_parts(self.classes, self.dim, self.weights, self.bias)
    }
}

fn validate_batch(head: &SoftmaxHead, batch: &[Example<'_>]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("batch"));
    }
    let mut total = 0.0;
    for ex in batch {
        head.check_input(ex.features)?;
        if ex.label >= head.classes {
            return Err(Error::LabelOutOfRange {
                label: ex.label,
                classes: head.classes,
            });
        }
        if !(ex.weight >= 0.0 && ex.weight.is_finite()) {
            return Err(Error::InvalidConfig(format!("example weight {} must be >= 0", ex.weight)));
        }
        total += ex.weight;
    }
    if total <= 0.0 {
        return Err(Error::DegenerateBatch);
    }
    Ok(total)
}

/// Weighted mean cross-entropy of the batch.
pub fn nll_loss(head: &SoftmaxHead, batch: &[Example<'_>]) -> Result<f64> {
    let total = validate_batch(head, batch)?;
    let sum: f64 = batch
        .iter()
        .map(|ex| ex.weight * head.example_nll(ex.features, ex.label))
        .sum();
    Ok(sum / total)
}

/// Gradient of [`nll_loss`] with respect to weights (row-major K×d) and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

fn gradients_unchecked(head: &SoftmaxHead, batch: &[Example<'_>], total: f64) -> Gradient {
    let (k, d) = (head.classes, head.dim);
    let mut gw = vec![0.0; k * d];
    let mut gb = vec![0.0; k];
    for ex in batch {
        if ex.weight == 0.0 {
            continue;
        }
        let p = ProbVector::softmax(&head.logits_unchecked(ex.features));
        for (c, &pc) in p.as_slice().iter().enumerate() {
            let delta = ex.weight * (pc - if c == ex.label { 1.0 } else { 0.0 });
            gb[c] += delta;
            for (g, x) in gw[c * d..(c + 1) * d].iter_mut().zip(ex.features) {
                *g += delta * x;
            }
        }
    }
    for g in gw.iter_mut().chain(gb.iter_mut()) {
        *g /= total;
    }
    Gradient {
        weights: gw,
        bias: gb,
    }
}

pub fn gradients(head: &SoftmaxHead, batch: &[Example<'_>]) -> Result<Gradient> {
    let total = validate_batch(head, batch)?;
    Ok(gradients_unchecked(head, batch, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub shuffle_seed: u64,
    /// Loss weight carried by pseudo-labeled examples.
    pub pseudo_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 32,
            learning_rate: 0.05,
            shuffle_seed: 0,
            pseudo_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.pseudo_weight) {
            return Err(Error::InvalidConfig("pseudo_weight must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Plain mini-batch SGD warm-started from `head`.
///
/// Epoch `e` shuffles with seed `shuffle_seed ^ e`; batches are taken in
/// order with a possibly short final batch. Batches with zero total weight
/// are skipped.
pub fn sgd_fit(head: &SoftmaxHead, trainset: &[Example<'_>], config: &TrainConfig) -> Result<SoftmaxHead> {
    config.validate()?;
    validate_batch(head, trainset)?;
    let first = trainset[0].label;
    if trainset.iter().all(|ex| ex.label == first) {
        return Err(Error::DegenerateTraining);
    }
    let mut model = head.clone();
    if config.learning_rate == 0.0 {
        return Ok(model);
    }
    let mut order: Vec<usize> = (0..trainset.len()).collect();
    let mut batch: Vec<Example<'_>> = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::rng_from(config.shuffle_seed ^ epoch as u64));
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| trainset[i]));
            let total: f64 = batch.iter().map(|ex| ex.weight).sum();
            if total <= 0.0 {
                continue;
            }
            let g = gradients_unchecked(&model, &batch, total);
            for (w, gw) in model.weights.iter_mut().zip(&g.weights) {
                *w -= config.learning_rate * gw;
            }
            for (b, gb) in model.bias.iter_mut().zip(&g.bias) {
                *b -= config.learning_rate * gb;
            }
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub mean_nll: f64,
}

/// Accuracy (argmax, lowest class on ties) and mean NLL. Example weights are ignored.
pub fn evaluate(head: &SoftmaxHead, testset: &[Example<'_>]) -> Result<Metrics> {
    if testset.is_empty() {
        return Err(Error::EmptyInput("test set"));
    }
    for ex in testset {
        head.check_input(ex.features)?;
        if ex.label >= head.classes {
            return Err(Error::LabelOutOfRange {
                label: ex.label,
                classes: head.classes,
            });
        }
    }
    let per_example = exec::map(testset, |ex| {
        let z = head.logits_unchecked(ex.features);
        let p = ProbVector::softmax(&z);
        (p.argmax() == ex.label, head.example_nll(ex.features, ex.label))
    });
    let correct = per_example.iter().filter(|(hit, _)| *hit).count();
    let nll: f64 = per_example.iter().map(|(_, l)| l).sum();
    let n = testset.len() as f64;
    Ok(Metrics {
        accuracy: correct as f64 / n,
        mean_nll: nll / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class_head() -> SoftmaxHead {
        SoftmaxHead::from_parts(2, 1, vec![1.0, -1.0], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn zero_head_is_uniform() {
        let head = SoftmaxHead::zeros(10, 3);
        let p = head.predict_proba(&[1.0, -2.0, 7.5]).unwrap();
        for &v in p.as_slice() {
            assert!((v - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn two_class_softmax_value() {
        // softmax(1, -1) = (1/(1+e^-2), e^-2/(1+e^-2))
        let p = two_class_head().predict_proba(&[1.0]).unwrap();
        assert!((p.as_slice()[0] - 0.880_797_077_977_882_4).abs() < 1e-12);
        assert!((p.as_slice()[1] - 0.119_202_922_022_117_6).abs() < 1e-12);
    }

    #[test]
    fn bias_shift_leaves_output_unchanged() {
        let head = two_class_head();
        let shifted = SoftmaxHead::from_parts(2, 1, vec![1.0, -1.0], vec![3.25, 3.25]).unwrap();
        let a = head.predict_proba(&[0.7]).unwrap();
        let b = shifted.predict_proba(&[0.7]).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn predict_rejects_bad_input() {
        let head = SoftmaxHead::zeros(3, 2);
        assert!(matches!(head.predict_proba(&[1.0]), Err(Error::Shape { expected: 2, got: 1 })));
        assert!(matches!(head.predict_proba(&[1.0, f64::NAN]), Err(Error::NonFinite)));
    }

    #[test]
    fn uniform_loss_is_ln_k() {
        let head = SoftmaxHead::zeros(10, 2);
        let x = [0.3, -0.2];
        let batch: Vec<_> = (0..10).map(|l| Example::new(&x, l)).collect();
        let loss = nll_loss(&head, &batch).unwrap();
        assert!((loss - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_example_loss() {
        // -ln(0.8807970779778823)
        let loss = nll_loss(&two_class_head(), &[Example::new(&[1.0], 0)]).unwrap();
        assert!((loss - 0.126_928_011_042_972_5).abs() < 1e-12);
    }

    #[test]
    fn near_perfect_predictor_has_near_zero_loss_and_gradient() {
        let head = SoftmaxHead::from_parts(2, 1, vec![50.0, -50.0], vec![0.0, 0.0]).unwrap();
        let batch = [Example::new(&[1.0], 0)];
        assert!(nll_loss(&head, &batch).unwrap() < 1e-40);
        let g = gradients(&head, &batch).unwrap();
        assert!(g.weights.iter().chain(&g.bias).all(|v| v.abs() < 1e-40));
    }

    #[test]
    fn zero_weight_batch_is_degenerate() {
        let head = SoftmaxHead::zeros(2, 1);
        let batch = [Example::weighted(&[1.0], 0, 0.0)];
        assert!(matches!(nll_loss(&head, &batch), Err(Error::DegenerateBatch)));
        assert!(matches!(gradients(&head, &batch), Err(Error::DegenerateBatch)));
    }

    #[test]
    fn duplicated_example_matches_single() {
        let head = SoftmaxHead::from_parts(3, 2, vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6], vec![0.0, 0.1, 0.2]).unwrap();
        let x = [1.5, -0.5];
        let one = gradients(&head, &[Example::new(&x, 2)]).unwrap();
        let two = gradients(&head, &[Example::new(&x, 2), Example::new(&x, 2)]).unwrap();
        for (a, b) in one.weights.iter().chain(&one.bias).zip(two.weights.iter().chain(&two.bias)) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_learning_rate_returns_head_unchanged() {
        let head = two_class_head();
        let xs = [[1.0], [-1.0]];
        let train = [Example::new(&xs[0], 0), Example::new(&xs[1], 1)];
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert_eq!(sgd_fit(&head, &train, &cfg).unwrap(), head);
    }

    #[test]
    fn single_class_training_rejected() {
        let xs = [[1.0], [2.0]];
        let train = [Example::new(&xs[0], 1), Example::new(&xs[1], 1)];
        let err = sgd_fit(&SoftmaxHead::zeros(2, 1), &train, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateTraining));
    }

    #[test]
    fn argmax_ties_take_lowest_index() {
        let p = ProbVector::new(vec![0.25, 0.375, 0.375]).unwrap();
        assert_eq!(p.argmax(), 1);
        assert_eq!(ProbVector::uniform(4).argmax(), 0);
    }

    #[test]
    fn evaluate_uniform_and_exact_rule() {
        let xs: Vec<[f64; 1]> = vec![[2.0], [-2.0], [0.5], [-0.1]];
        let labels = [0, 1, 0, 1];
        let test: Vec<_> = xs.iter().zip(labels).map(|(x, l)| Example::new(x, l)).collect();
        let m = evaluate(&two_class_head(), &test).unwrap();
        assert_eq!(m.accuracy, 1.0);
        let u = evaluate(&SoftmaxHead::zeros(2, 1), &test).unwrap();
        assert!((u.mean_nll - 2f64.ln()).abs() < 1e-12);
        assert!(matches!(evaluate(&two_class_head(), &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn checkpoint_round_trip() {
        let head = SoftmaxHead::from_parts(2, 2, vec![0.1, -0.2, 1e-300, 3.0], vec![0.5, -0.5]).unwrap();
        let json = serde_json::to_string(&head.to_checkpoint()).unwrap();
        let back: HeadCheckpoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_head().unwrap(), head);
    }
}
