mod common;

use budget_al::budget::{assign_pseudo_labels, BudgetLedger};
use budget_al::classifier::{gradients, nll_loss, sgd_fit, Example, ProbVector, SoftmaxHead, TrainConfig};
use budget_al::data_io::{generate_synthetic, SyntheticSpec};
use budget_al::pools::{init_pools, LabelRecord};
use budget_al::strategies::{
    density, entropy_uncertainty, least_confidence, margin_uncertainty, select_batch, DensityIndex,
    ScoredInstance,
};
use budget_al::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prob_vector() -> impl Strategy<Value = ProbVector> {
    prop::collection::vec(0.0f64..10.0, 2..12).prop_filter_map("non-zero mass", |raw| {
        let total: f64 = raw.iter().sum();
        (total > 1e-6).then(|| ProbVector::softmax(&raw.iter().map(|x| x.ln_1p() * 3.0).collect::<Vec<_>>()))
    })
}

fn random_head(rng: &mut ChaCha8Rng, k: usize, d: usize, scale: f64) -> SoftmaxHead {
    let w = (0..k * d).map(|_| rng.random_range(-scale..scale)).collect();
    let b = (0..k).map(|_| rng.random_range(-scale..scale)).collect();
    SoftmaxHead::from_parts(k, d, w, b).unwrap()
}

proptest! {
    #[test]
    fn predictions_are_normalized(seed in any::<u64>(), scale in 0.01f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = random_head(&mut rng, 7, 5, scale);
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-10.0..10.0)).collect();
        let p = head.predict_proba(&x).unwrap();
        let sum: f64 = p.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(p.as_slice().iter().all(|q| (0.0..=1.0).contains(q)));
        prop_assert!(ProbVector::new(p.as_slice().to_vec()).is_ok());
    }

    #[test]
    fn softmax_shift_invariance(seed in any::<u64>(), shift in -100.0f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = random_head(&mut rng, 4, 3, 2.0);
        let shifted = SoftmaxHead::from_parts(
            4, 3,
            head.weights().to_vec(),
            head.bias().iter().map(|b| b + shift).collect(),
        ).unwrap();
        let x = [0.3, -1.1, 2.0];
        let a = head.predict_proba(&x).unwrap();
        let b = shifted.predict_proba(&x).unwrap();
        for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn uncertainty_is_permutation_invariant(p in prob_vector(), rot in 0usize..12) {
        let mut v = p.as_slice().to_vec();
        let r = rot % v.len();
        v.rotate_left(r);
        v.reverse();
        let q = ProbVector::new(v).unwrap();
        prop_assert!((entropy_uncertainty(&p) - entropy_uncertainty(&q)).abs() < 1e-12);
        prop_assert!((margin_uncertainty(&p).unwrap() - margin_uncertainty(&q).unwrap()).abs() < 1e-12);
        prop_assert!((least_confidence(&p).unwrap() - least_confidence(&q).unwrap()).abs() < 1e-12);
        for u in [entropy_uncertainty(&p), margin_uncertainty(&p).unwrap(), least_confidence(&p).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&u));
        }
    }

    #[test]
    fn raising_tau_never_grows_pseudo_set(ps in prop::collection::vec(prob_vector(), 1..40), lo in 0.05f64..1.0, gap in 0.0f64..0.5) {
        let hi = (lo + gap).min(1.0);
        let indexed: Vec<(usize, &ProbVector)> = ps.iter().enumerate().collect();
        let a = assign_pseudo_labels(indexed.iter().copied(), lo, usize::MAX);
        let b = assign_pseudo_labels(indexed.iter().copied(), hi, usize::MAX);
        prop_assert!(b.len() <= a.len());
        prop_assert!(b.iter().all(|x| a.iter().any(|y| y.instance_id == x.instance_id)));
        prop_assert!(a.iter().all(|x| x.confidence >= lo));
    }

    #[test]
    fn selection_matches_brute_force(scores in prop::collection::vec(0u8..6, 1..200), k in 1usize..50) {
        let scored: Vec<ScoredInstance> = scores.iter().enumerate().map(|(id, &s)| ScoredInstance {
            id, uncertainty: 0.0, density: None, hybrid: f64::from(s) / 5.0,
        }).collect();
        prop_assert_eq!(select_batch(&scored, k), common::brute_force_select(&scored, k));
    }

    #[test]
    fn raising_a_score_keeps_it_selected(scores in prop::collection::vec(0.0f64..1.0, 2..100), k in 1usize..20, pick in 0usize..100, bump in 0.0f64..1.0) {
        let mut scored: Vec<ScoredInstance> = scores.iter().enumerate().map(|(id, &s)| ScoredInstance {
            id, uncertainty: s, density: None, hybrid: s,
        }).collect();
        let before = select_batch(&scored, k);
        let target = before[pick % before.len()];
        scored[target].hybrid += bump;
        prop_assert!(select_batch(&scored, k).contains(&target));
    }

    #[test]
    fn commit_and_rebuild_preserve_partition(seed in any::<u64>(), ops in prop::collection::vec((any::<bool>(), 1usize..6), 1..25)) {
        let ds = generate_synthetic(&SyntheticSpec { classes: 3, dim: 2, per_class: 15, separation: 2.0, sigma: 1.0, seed: 1 }).unwrap();
        let mut state = init_pools(&ds, 5, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labeled_before = state.labeled_len();
        for (round, (oracle, n)) in ops.into_iter().enumerate() {
            let pool = state.unlabeled_ids();
            if pool.is_empty() { break; }
            let take: Vec<usize> = (0..n.min(pool.len())).map(|_| pool[rng.random_range(0..pool.len())]).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
            if oracle {
                let assignments: Vec<(usize, usize)> = take.iter().map(|&id| (id, ds.true_label(id))).collect();
                state.commit_oracle_labels(&assignments, round).unwrap();
            } else {
                let recs: Vec<LabelRecord> = take.iter().map(|&id| LabelRecord::pseudo(id, 0, 0.99, round)).collect();
                state.rebuild_pseudo_set(&recs).unwrap();
            }
            state.check_invariants(&ds).unwrap();
            prop_assert!(state.labeled_len() >= labeled_before);
            labeled_before = state.labeled_len();
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..120 {
        let head = random_head(&mut rng, 5, 10, 1.0);
        let n = rng.random_range(1..12);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..10).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let batch: Vec<Example<'_>> = xs
            .iter()
            .map(|x| Example::weighted(x, rng.random_range(0..5), rng.random_range(0.1..1.0)))
            .collect();
        let g = gradients(&head, &batch).unwrap();
        let (fw, fb) = common::finite_difference_gradient(&head, &batch, 1e-5);
        let analytic: Vec<f64> = g.weights.iter().chain(&g.bias).copied().collect();
        let numeric: Vec<f64> = fw.iter().chain(&fb).copied().collect();
        worst = worst.max(common::relative_error(&analytic, &numeric));
    }
    assert!(worst < 1e-5, "worst relative error {worst}");
}

#[test]
fn small_step_does_not_increase_loss() {
    let ds = generate_synthetic(&SyntheticSpec { classes: 4, dim: 6, per_class: 30, separation: 3.0, sigma: 1.0, seed: 4 }).unwrap();
    let batch: Vec<Example<'_>> = ds.train_ids().iter().map(|&i| Example::new(ds.features(i), ds.true_label(i))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let head = random_head(&mut rng, 4, 6, 0.5);
        let cfg = TrainConfig { epochs: 1, batch_size: batch.len(), learning_rate: 1e-4, ..TrainConfig::default() };
        let next = sgd_fit(&head, &batch, &cfg).unwrap();
        assert!(nll_loss(&next, &batch).unwrap() <= nll_loss(&head, &batch).unwrap());
    }
}

#[test]
fn ledger_never_overspends() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut ledger = BudgetLedger::new(250, 20, 100, 0.95).unwrap();
    for _ in 0..10_000 {
        let n = rng.random_range(0..30);
        let before = ledger.oracle_spent;
        match ledger.charge_queries(n) {
            Ok(()) => assert_eq!(ledger.oracle_spent, before + n),
            Err(Error::BudgetExhausted { .. }) => assert_eq!(ledger.oracle_spent, before),
            Err(e) => panic!("{e}"),
        }
        assert!(ledger.oracle_spent <= ledger.oracle_budget);
        assert!(ledger.remaining_allowance() <= ledger.per_round_query_cap);
        if ledger.remaining_budget() == 0 && rng.random_bool(0.05) {
            ledger = BudgetLedger::new(rng.random_range(0..300), rng.random_range(1..25), 100, 0.95).unwrap();
        }
    }
}

#[test]
fn density_index_matches_reference_density() {
    let ds = generate_synthetic(&SyntheticSpec { classes: 3, dim: 5, per_class: 40, separation: 2.0, sigma: 1.0, seed: 6 }).unwrap();
    let index = DensityIndex::new(&ds);
    let pool: Vec<usize> = ds.train_ids().to_vec();
    for (cap, seed) in [(10usize, 1u64), (2_000, 2), (50, 3)] {
        for &c in pool.iter().step_by(7) {
            let others: Vec<&[f64]> = pool.iter().filter(|&&id| id != c).map(|&id| ds.features(id)).collect();
            let a = density(ds.features(c), &others, cap, seed).unwrap();
            let b = index.density_of(c, &pool, cap, seed).unwrap();
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_scoring_matches_sequential() {
    use budget_al::strategies::{score_pool_par, score_pool_seq, StrategyConfig};
    let ds = generate_synthetic(&SyntheticSpec { classes: 4, dim: 8, per_class: 60, ..SyntheticSpec::default() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let head = random_head(&mut rng, 4, 8, 0.3);
    let index = DensityIndex::new(&ds);
    let pool = ds.train_ids().to_vec();
    let cfg = StrategyConfig { density_sample: 50, ..StrategyConfig::default() };
    let seq = score_pool_seq(&head, &ds, &index, &pool, &cfg, 77).unwrap();
    let par = score_pool_par(&head, &ds, &index, &pool, &cfg, 77).unwrap();
    assert_eq!(seq, par);
}
