use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use persuasion_bench::two_type_model;
use persuasion_core::netgen::{sample_network, DEFAULT_EDGE_BUDGET};
use persuasion_core::optimizer::{optimize_network, optimize_public, OptimizerOptions};
use persuasion_core::{compute_limits, LimitOptions, RngSpec};

fn limits(c: &mut Criterion) {
    let params = two_type_model();
    let opts = LimitOptions::default();
    c.bench_function("compute_limits", |b| b.iter(|| compute_limits(black_box(&params), &opts).unwrap()));
}

fn optimize(c: &mut Criterion) {
    let params = two_type_model();
    let limits = compute_limits(&params, &LimitOptions::default()).unwrap();
    let opts = OptimizerOptions::default();
    let mut g = c.benchmark_group("optimize");
    g.sample_size(10);
    g.bench_function("network", |b| b.iter(|| optimize_network(black_box(&params), &limits, &opts).unwrap()));
    g.bench_function("public", |b| b.iter(|| optimize_public(black_box(&params), &opts).unwrap()));
    g.finish();
}

fn netgen(c: &mut Criterion) {
    let params = two_type_model();
    let mut g = c.benchmark_group("sample_network");
    g.sample_size(10);
    for n in [10_000usize, 100_000] {
        g.bench_function(format!("n={n}"), |b| {
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                sample_network(&params, n, &RngSpec::new(seed), DEFAULT_EDGE_BUDGET).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, limits, optimize, netgen);
criterion_main!(benches);
