//! Criterion benchmarks for `entdyn-core`.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use entdyn_core::evolution::{channel_benchmark, evolve_two_sided};
use entdyn_core::linalg::hermitian_eig;
use entdyn_core::measures::concurrence_wootters;
use entdyn_core::montecarlo::{run_sweep, sample_haar_pure, ChannelFamily, Sides};
use entdyn_core::quantum::{amplitude_damping, pure_to_density, random_unitary};
use entdyn_core::{ComplexMatrix, DensityMatrix, ExperimentConfig};

/// A fixed full-rank Hermitian test matrix of size `n`.
fn hermitian(n: usize) -> ComplexMatrix {
    let u = random_unitary(n, n as u64).unwrap();
    let d = ComplexMatrix::from_real_diag(&(0..n).map(|i| 1.0 + i as f64).collect::<Vec<_>>());
    d.conjugate_by(&u)
}

fn noisy_state() -> DensityMatrix {
    let pure = pure_to_density(&sample_haar_pure(2, 2, 1, 0).unwrap());
    pure.mix(&DensityMatrix::maximally_mixed(2, 2), 0.9)
}

pub fn benchmarks(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eig");
    for n in [4, 8, 16] {
        let m = hermitian(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| hermitian_eig(black_box(m))));
    }
    group.finish();

    let rho = noisy_state();
    c.bench_function("concurrence_wootters", |b| b.iter(|| concurrence_wootters(black_box(&rho))));

    let ch = amplitude_damping(0.3).unwrap();
    c.bench_function("channel_benchmark", |b| b.iter(|| channel_benchmark(black_box(&ch))));
    c.bench_function("evolve_two_sided", |b| b.iter(|| evolve_two_sided(black_box(&rho), &ch, &ch)));

    let cfg = ExperimentConfig {
        channel_family: ChannelFamily::PhaseDamping,
        channel_family_b: None,
        p_grid: vec![0.1],
        n_samples: 1000,
        seed: 0,
        sides: Sides::TwoSidedIdentical,
        dims: [2, 2],
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("two_sided_phase_1000", |b| b.iter(|| run_sweep(black_box(&cfg))));
    group.finish();
}
