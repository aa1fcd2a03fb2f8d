//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use budget_al::classifier::{nll_loss, sgd_fit, Example, SoftmaxHead, TrainConfig};
use budget_al::rng::{self, stream};
use budget_al::strategies::{entropy_uncertainty, ScoredInstance};
use budget_al::{init_pools, Dataset};

/// Full stable sort by score descending; stable order keeps ids ascending on ties.
pub fn brute_force_select(scored: &[ScoredInstance], k: usize) -> Vec<usize> {
    let mut by_id = scored.to_vec();
    by_id.sort_by_key(|s| s.id);
    let mut order: Vec<usize> = (0..by_id.len()).collect();
    order.sort_by(|&a, &b| by_id[b].hybrid.partial_cmp(&by_id[a].hybrid).unwrap());
    order.into_iter().take(k).map(|i| by_id[i].id).collect()
}

/// Central finite-difference gradient of the weighted mean NLL.
pub fn finite_difference_gradient(head: &SoftmaxHead, batch: &[Example<'_>], step: f64) -> (Vec<f64>, Vec<f64>) {
    let (k, d) = (head.classes(), head.dim());
    let loss_at = |w: &[f64], b: &[f64]| {
        let h = SoftmaxHead::from_parts(k, d, w.to_vec(), b.to_vec()).unwrap();
        nll_loss(&h, batch).unwrap()
    };
    let w0 = head.weights().to_vec();
    let b0 = head.bias().to_vec();
    let mut gw = vec![0.0; w0.len()];
    for i in 0..w0.len() {
        let mut plus = w0.clone();
        let mut minus = w0.clone();
        plus[i] += step;
        minus[i] -= step;
        gw[i] = (loss_at(&plus, &b0) - loss_at(&minus, &b0)) / (2.0 * step);
    }
    let mut gb = vec![0.0; b0.len()];
    for i in 0..b0.len() {
        let mut plus = b0.clone();
        let mut minus = b0.clone();
        plus[i] += step;
        minus[i] -= step;
        gb[i] = (loss_at(&w0, &plus) - loss_at(&w0, &minus)) / (2.0 * step);
    }
    (gw, gb)
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-300)
}

/// The general pool-based loop, one query per iteration:
///
/// ```text
/// while queries < m:
///     Θ ← learn a model on D^L
///     for x_i in D^U: u_i ← u(x_i, Θ)
///     x* ← argmax_i u_i
///     D^L ← D^L ∪ {x*}
/// ```
///
/// Entropy uncertainty, noiseless labels, warm-started Θ, D^L iterated in
/// id order, training shuffle seeded per iteration from the master seed.
pub fn reference_loop_queries(dataset: &Dataset, seed_count: usize, m: usize, seed: u64, train: TrainConfig) -> Vec<usize> {
    let pools = init_pools(dataset, seed_count, rng::derive(&[seed, stream::SEED_SET])).unwrap();
    let mut labeled: std::collections::BTreeMap<usize, usize> =
        pools.labeled().map(|r| (r.instance_id, r.label)).collect();
    let mut theta = SoftmaxHead::zeros(dataset.classes(), dataset.dim());
    let mut queried = Vec::new();
    let mut iteration = 0;
    while queried.len() < m {
        let examples: Vec<Example<'_>> = labeled
            .iter()
            .map(|(&id, &y)| Example::new(dataset.features(id), y))
            .collect();
        let cfg = TrainConfig {
            shuffle_seed: rng::round_seed(seed, stream::TRAIN, iteration) ^ train.shuffle_seed,
            ..train
        };
        theta = sgd_fit(&theta, &examples, &cfg).unwrap();

        let unlabeled: Vec<usize> = dataset
            .train_ids()
            .iter()
            .copied()
            .filter(|id| !labeled.contains_key(id))
            .collect();
        if unlabeled.is_empty() {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for &id in &unlabeled {
            let u = entropy_uncertainty(&theta.predict_proba(dataset.features(id)).unwrap());
            if best.is_none_or(|(_, bu)| u > bu) {
                best = Some((id, u));
            }
        }
        let (star, _) = best.unwrap();
        labeled.insert(star, dataset.true_label(star));
        queried.push(star);
        iteration += 1;
    }
    queried
}
