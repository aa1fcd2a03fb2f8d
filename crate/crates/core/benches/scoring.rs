use budget_al::classifier::{sgd_fit, Example, SoftmaxHead, TrainConfig};
use budget_al::data_io::{generate_synthetic, SyntheticSpec};
use budget_al::strategies::{score_pool_seq, DensityIndex, StrategyConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn bench_scoring(c: &mut Criterion) {
    let ds = generate_synthetic(&SyntheticSpec {
        per_class: 200,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let seedset: Vec<Example<'_>> = ds
        .train_ids()
        .iter()
        .take(200)
        .map(|&i| Example::new(ds.features(i), ds.true_label(i)))
        .collect();
    let head = sgd_fit(&SoftmaxHead::zeros(ds.classes(), ds.dim()), &seedset, &TrainConfig::default()).unwrap();
    let index = DensityIndex::new(&ds);
    let pool = ds.train_ids().to_vec();

    let mut group = c.benchmark_group("score_pool");
    group.sample_size(10);
    for sample in [200usize, 2_000] {
        let cfg = StrategyConfig {
            density_sample: sample,
            ..StrategyConfig::default()
        };
        group.bench_with_input(BenchmarkId::new("sequential", sample), &cfg, |b, cfg| {
            b.iter(|| score_pool_seq(&head, &ds, &index, black_box(&pool), cfg, 7).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", sample), &cfg, |b, cfg| {
            b.iter(|| budget_al::strategies::score_pool_par(&head, &ds, &index, black_box(&pool), cfg, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_scoring);
criterion_main!(benches);
