//! Sequential against rayon execution for the three data-parallel kernels.
//! Built without the `parallel` feature both arms run on one thread.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use emachine::circuit::{build_cu_decomposed_with, channel_pair, NoiseModel, Route};
use emachine::fixedpoint::{solve_fixed_points_with, OptimizerConfig};
use emachine::ising::{transition_probabilities, ChainHistogram, IsingParams};
use emachine::par::Exec;
use emachine::pipeline::{complexity_sweep_with, RunConfig};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("chain_enumeration");
    for length in [16usize, 20] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, length), &length, |b, &l| {
                b.iter(|| ChainHistogram::enumerate(l, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn multistart(c: &mut Criterion) {
    let gamma = transition_probabilities(&IsingParams::new(1.0, 0.3, 2.0).unwrap()).unwrap();
    let (_, pair) = channel_pair(&gamma, Route::Decomposed, &NoiseModel::default()).unwrap();
    let cfg = OptimizerConfig::default();
    let mut g = c.benchmark_group("fixed_point_multistart");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| solve_fixed_points_with(&pair, &cfg, 1.0, Some(&gamma), exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("cu_decomposition");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| build_cu_decomposed_with(&gamma, exec).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let mut g = c.benchmark_group("complexity_sweep");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| complexity_sweep_with(&cfg, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, enumeration, multistart, sweep);
criterion_main!(benches);
