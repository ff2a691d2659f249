//! Whole-run costs for the relax-factor strategies on a small band graph.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sorlayout_bench::{band, prepared};
use sorlayout_core::engine::LayoutConfig;
use sorlayout_core::RelaxStrategy;

fn bench_full_layout(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_layout_band46");
    group.sample_size(20);
    let problem = prepared(&band(46));
    for strategy in [
        RelaxStrategy::NonSor,
        RelaxStrategy::Fixed(1.5),
        RelaxStrategy::probabilistic_default(),
        RelaxStrategy::enumerating_default(),
    ] {
        group.bench_function(strategy.label(), |b| {
            let cfg = LayoutConfig {
                rel_err: 1e-6,
                seed: 1,
                strategy: strategy.clone(),
                ..LayoutConfig::default()
            };
            b.iter(|| problem.run(black_box(&cfg)).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_full_layout);
criterion_main!(benches);
