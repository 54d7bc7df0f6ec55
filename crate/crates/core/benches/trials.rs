use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use thinsim::montecarlo::{self, ScenarioConfig};
use thinsim::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn coverage(c: &mut Criterion) {
    let cfg = ScenarioConfig::new(1.0, 0.5, 4.0)
        .with_seed(1)
        .with_trials(2_000);
    let thresholds: Vec<f64> = (0..31)
        .map(|i| 10f64.powf((-10.0 + i as f64) / 10.0))
        .collect();
    let mut group = c.benchmark_group("typical_ue_coverage");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                montecarlo::estimate_coverage_with(black_box(&cfg), &thresholds, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn ratio(c: &mut Criterion) {
    let cfg = ScenarioConfig::new(1.0, 0.3, 4.0)
        .with_seed(2)
        .with_trials(2_000);
    let mut group = c.benchmark_group("ratio_distribution");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| montecarlo::estimate_ratio_distribution_with(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

fn generative(c: &mut Criterion) {
    let cfg = ScenarioConfig::new(1.0, 0.7, 4.0)
        .with_seed(3)
        .with_trials(4);
    let thresholds = [0.1, 1.0, 10.0];
    let mut group = c.benchmark_group("generative_coverage");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                montecarlo::estimate_generative_coverage_with(black_box(&cfg), &thresholds, exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, coverage, ratio, generative);
criterion_main!(benches);
