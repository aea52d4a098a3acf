use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use permsgd::*;

fn herding(c: &mut Criterion) {
    let mut g = c.benchmark_group("herd_greedy");
    for n in [64usize, 256, 1024] {
        let b = VectorBatch::random_unit(n, 8, 1).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &b, |bench, b| bench.iter(|| herd_greedy(b)));
    }
    g.finish();
}

fn epochs(c: &mut Criterion) {
    let agg = make_thm1_aggregate(1.0, 1.0 / 4830.0, 1.0, 16, 64).unwrap();
    let y = agg.restrict(1).unwrap();
    c.bench_function("run_epochs/aggregate_n16_k64", |b| {
        b.iter(|| run_epochs(RunConfig::new(&agg, PermutationPolicy::random_reshuffle(3), 1e-3, 64)).unwrap())
    });
    c.bench_function("run_epochs/restricted_n16_k64", |b| {
        b.iter(|| run_epochs(RunConfig::new(&y, PermutationPolicy::random_reshuffle(3), 1e-3, 64)).unwrap())
    });
}

fn scalars(c: &mut Criterion) {
    c.bench_function("lambert_w0", |b| b.iter(|| lambert_w0(black_box(123.4)).unwrap()));
    c.bench_function("sign_stats_exact/16", |b| b.iter(|| sign_stats_exact(black_box(16)).unwrap()));
}

criterion_group!(benches, herding, epochs, scalars);
criterion_main!(benches);
