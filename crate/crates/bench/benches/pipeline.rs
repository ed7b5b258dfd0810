use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dbinds_bench::{inds, labelled_matrix, latent};
use dbinds_core::belm::invert_frame;
use dbinds_core::classify::{train_gbdt, GbdtParams};
use dbinds_core::predictor::FrozenRandomPredictor;
use dbinds_core::schedule::{make_schedule, LinearBetaParams};
use dbinds_core::{extract_features, FeatureConfig};
use std::hint::black_box;

fn inversion(c: &mut Criterion) {
    let x = latent(&[4, 64, 64], 1);
    let pred = FrozenRandomPredictor::new(7);
    let mut g = c.benchmark_group("invert_frame_4x64x64");
    for steps in [1, 10, 20] {
        let sched = make_schedule(steps, LinearBetaParams::default()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, _| {
            b.iter(|| invert_frame(black_box(&x), &sched, &pred).unwrap())
        });
    }
    g.finish();
}

fn features(c: &mut Criterion) {
    let cfg = FeatureConfig::default();
    let mut g = c.benchmark_group("extract_features");
    for size in [8, 32] {
        let d = inds(4, size, 3);
        g.bench_with_input(BenchmarkId::from_parameter(format!("7x4x{size}x{size}")), &d, |b, d| {
            b.iter(|| extract_features(black_box(d), &cfg).unwrap())
        });
    }
    g.finish();
}

fn boosting(c: &mut Criterion) {
    let (x, y) = labelled_matrix(400, 50, 5, 11);
    let w = vec![1.0; y.len()];
    let params = GbdtParams { num_trees: 50, ..Default::default() };
    c.bench_function("train_gbdt_400x50_50trees", |b| {
        b.iter(|| train_gbdt(black_box(&x), &y, &w, &params, 0).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = inversion, features, boosting
}
criterion_main!(benches);
