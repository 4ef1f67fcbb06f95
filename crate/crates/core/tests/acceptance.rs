//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs under `cargo test` (custom harness).

use std::path::Path;
use std::time::{Duration, Instant};

use entdyn_core::evolution::{
    channel_benchmark, evolve_gconcurrence_pure, evolve_mixed_one_sided, evolve_pure_one_sided, Certification,
};
use entdyn_core::linalg::{Complex, ComplexMatrix};
use entdyn_core::measures::{
    concurrence_pure, concurrence_threshold, concurrence_wootters, gconcurrence_pure, max_concurrence,
    predict_filtered_concurrence_mixed, predict_filtered_concurrence_pure,
};
use entdyn_core::montecarlo::{
    build_histogram, records_to_csv, run_sweep, sample_haar_pure, ChannelFamily, HistogramField, Sides,
};
use entdyn_core::quantum::{
    amplitude_damping, bell_phi_plus, choi_state, filter_pure, filter_state, phase_damping, pure_to_density,
    random_channel,
};
use entdyn_core::{DensityMatrix, ExperimentConfig, FilterOperation, PureState, QuantumChannel, Side};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn gaussian_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im)
    })
}

/// Random two-qubit density matrix: Ginibre of rank 1..=4, or a pure state
/// mixed with white noise (which crosses the separability boundary).
fn random_density(rng: &mut StdRng, i: usize) -> DensityMatrix {
    let rho = if i % 5 == 4 {
        let psi = gaussian_matrix(rng, 4, 1);
        let pure = psi.matmul(&psi.adjoint()).unwrap();
        let w: f64 = rng.random();
        let noise = ComplexMatrix::identity(4).scale_real(pure.trace().re / 4.0);
        &pure.scale_real(w) + &noise.scale_real(1.0 - w)
    } else {
        let g = gaussian_matrix(rng, 4, 1 + i % 5);
        g.matmul(&g.adjoint()).unwrap()
    };
    let t = rho.trace().re;
    DensityMatrix::new(2, 2, rho.scale_real(1.0 / t).hermitian_part()).unwrap()
}

fn haar(seed: u64, n: usize) -> Vec<PureState> {
    (0..n as u64).map(|i| sample_haar_pure(2, 2, seed, i).unwrap()).collect()
}

fn p_grid(steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| k as f64 / steps as f64).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let states = haar(101, 1000);
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for (k, &p) in p_grid(10).iter().enumerate() {
        let channels = [
            phase_damping(p).unwrap(),
            amplitude_damping(p).unwrap(),
            random_channel(2, 1 + k % 4, 7000 + k as u64).unwrap(),
        ];
        for ch in &channels {
            let bench = channel_benchmark(ch).unwrap().value();
            for s in &states {
                let r = evolve_pure_one_sided(s, ch, Side::B).unwrap();
                worst = worst.max((r.final_concurrence - r.initial_concurrence * bench).abs());
                checks += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("{checks} cases, max |C_f - C_i*bench| = {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

/// Two-qubit X-state concurrence, `2 max(0, |r03| - sqrt(r11 r22), |r12| - sqrt(r00 r33))`.
fn x_state_concurrence(rho: &ComplexMatrix) -> f64 {
    let d = |i: usize| rho[(i, i)].re;
    let a = rho[(0, 3)].norm() - (d(1) * d(2)).sqrt();
    let b = rho[(1, 2)].norm() - (d(0) * d(3)).sqrt();
    2.0 * a.max(b).max(0.0)
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_x = 0.0f64;
    for p in p_grid(100) {
        for (ch, analytic) in [(phase_damping(p).unwrap(), 1.0 - p), (amplitude_damping(p).unwrap(), (1.0 - p).sqrt())]
        {
            worst = worst.max((channel_benchmark(&ch).unwrap().value() - analytic).abs());
            let choi = choi_state(&ch).unwrap();
            worst_x = worst_x.max((x_state_concurrence(choi.matrix()) - analytic).abs());
        }
    }
    outcome(
        worst <= 1e-9 && worst_x <= 1e-9,
        format!("202 channels, max error {worst:.2e} (X-state oracle vs analytic {worst_x:.2e})"),
    )
}

fn criterion_3() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let mut violations = 0usize;
    let mut records = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for family in [ChannelFamily::PhaseDamping, ChannelFamily::AmplitudeDamping] {
        let cfg = ExperimentConfig {
            channel_family: family,
            channel_family_b: None,
            p_grid: vec![0.01, 0.1, 0.25, 0.5],
            n_samples: 10_000,
            seed: 2024,
            sides: Sides::TwoSidedIdentical,
            dims: [2, 2],
        };
        for r in pool.install(|| run_sweep(&cfg)).unwrap() {
            records += 1;
            worst = worst.max(r.c_final - r.bound);
            if r.c_final > r.bound + 1e-9 {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{records} records, {violations} violations, max c_final - bound = {worst:.2e}, {:.2} s single-threaded",
            elapsed.as_secs_f64()
        ),
    )
}

/// Independent PPT oracle: nalgebra eigenvalues of the partial transpose on B.
fn ppt_min_eigenvalue(rho: &ComplexMatrix) -> f64 {
    let pt = nalgebra::DMatrix::from_fn(4, 4, |r, c| {
        let (i, j, k, l) = (r / 2, r % 2, c / 2, c % 2);
        let z = rho[(2 * i + l, 2 * k + j)];
        nalgebra::Complex::new(z.re, z.im)
    });
    pt.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(404);
    let mut mismatches = 0usize;
    let mut entangled = 0usize;
    for i in 0..1000 {
        let rho = random_density(&mut rng, i);
        let c = concurrence_wootters(&rho).unwrap().value();
        let oracle_entangled = ppt_min_eigenvalue(rho.matrix()) < -1e-13;
        entangled += oracle_entangled as usize;
        if (c > 1e-7) != oracle_entangled {
            mismatches += 1;
        }
    }
    let mut worst = 0.0f64;
    for k in 0..=20 {
        let q = k as f64 * 0.05;
        // q |phi+><phi+| + (1 - q) I/4 written out entrywise
        let rho = ComplexMatrix::from_fn(4, 4, |r, c| {
            let bell = if (r == 0 || r == 3) && (c == 0 || c == 3) { q / 2.0 } else { 0.0 };
            let noise = if r == c { (1.0 - q) / 4.0 } else { 0.0 };
            Complex::new(bell + noise, 0.0)
        });
        let c = concurrence_wootters(&DensityMatrix::new(2, 2, rho).unwrap()).unwrap().value();
        worst = worst.max((c - ((3.0 * q - 1.0) / 2.0).max(0.0)).abs());
    }
    outcome(
        mismatches == 0 && worst <= 1e-9,
        format!("1000 states ({entangled} entangled), {mismatches} disagreements; Werner max error {worst:.2e}"),
    )
}

fn random_filter(rng: &mut StdRng, d: usize) -> ComplexMatrix {
    loop {
        let m = gaussian_matrix(rng, d, d);
        if entdyn_core::linalg::determinant(&m).unwrap().norm() > 1e-3 {
            return m;
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(505);
    let side = |i: usize| if i.is_multiple_of(2) { Side::A } else { Side::B };
    let mut worst_pure = 0.0f64;
    for (i, s) in haar(55, 1000).iter().enumerate() {
        let f = FilterOperation::new(random_filter(&mut rng, 2), side(i)).unwrap();
        let predicted = predict_filtered_concurrence_pure(concurrence_pure(s), &f, s).unwrap().value();
        let (out, _) = filter_pure(s, &f).unwrap();
        let chi = out.chi();
        let direct = 2.0 * (chi[(0, 0)] * chi[(1, 1)] - chi[(0, 1)] * chi[(1, 0)]).norm();
        worst_pure = worst_pure.max((predicted - direct).abs());
    }
    let mut worst_mixed = 0.0f64;
    for i in 0..1000 {
        let rho = random_density(&mut rng, i);
        let f = FilterOperation::new(random_filter(&mut rng, 2), side(i)).unwrap();
        let c0 = concurrence_wootters(&rho).unwrap();
        let predicted = predict_filtered_concurrence_mixed(c0, &f, &rho).unwrap().value();
        let (out, _) = filter_state(&rho, &f).unwrap();
        worst_mixed = worst_mixed.max((predicted - concurrence_wootters(&out).unwrap().value()).abs());
    }
    let phi = bell_phi_plus(2).unwrap();
    let m = ComplexMatrix::from_real_diag(&[1.0, 0.5]);
    let f = FilterOperation::new(m, Side::A).unwrap();
    let example = predict_filtered_concurrence_pure(concurrence_pure(&phi), &f, &phi).unwrap().value();
    let example_direct = concurrence_pure(&filter_pure(&phi, &f).unwrap().0).value();
    let example_err = (example - 0.8).abs().max((example_direct - 0.8).abs());
    outcome(
        worst_pure <= 1e-9 && worst_mixed <= 1e-9 && example_err <= 1e-9,
        format!("pure max error {worst_pure:.2e}, mixed {worst_mixed:.2e}, diag(1,1/2) on phi+ -> {example:.12}"),
    )
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();

    let phi_err = (2..=6)
        .map(|d| (gconcurrence_pure(&bell_phi_plus(d).unwrap()).unwrap().value() - 1.0).abs())
        .fold(0.0, f64::max);
    ok &= phi_err <= 1e-12;
    notes.push(format!("phi_d max error {phi_err:.1e}"));

    let r = std::f64::consts::FRAC_1_SQRT_2;
    let bell3 = PureState::new(ComplexMatrix::from_real_diag(&[r, r, 0.0])).unwrap();
    let g3 = gconcurrence_pure(&bell3).unwrap().value();
    ok &= g3 == 0.0 && concurrence_pure(&bell3).value() > 0.0;
    notes.push(format!("3x3 Bell-like G = {g3}"));

    let d2 = haar(66, 1000)
        .iter()
        .map(|s| (gconcurrence_pure(s).unwrap().value() - concurrence_pure(s).value()).abs())
        .fold(0.0, f64::max);
    ok &= d2 <= 1e-12;
    notes.push(format!("d=2 vs concurrence {d2:.1e}"));

    let mut rng = StdRng::seed_from_u64(606);
    let mut single = 0.0f64;
    for d in 2..=5 {
        for i in 0..50 {
            let chi = gaussian_matrix(&mut rng, d, d);
            let s = PureState::normalize(chi).unwrap();
            let k = random_filter(&mut rng, d);
            let k = k.scale_real(0.999 / spectral_norm(&k));
            let ch = QuantumChannel::new(vec![k.clone()]).unwrap();
            let side = if i % 2 == 0 { Side::A } else { Side::B };
            let report = evolve_gconcurrence_pure(&s, &ch, side).unwrap();
            let direct = gconcurrence_pure(&filter_pure(&s, &FilterOperation::new(k, side).unwrap()).unwrap().0)
                .unwrap()
                .value();
            if report.certification != Certification::Certified {
                ok = false;
            }
            let fin = report.final_value.unwrap_or(f64::NAN);
            single = single.max((fin - report.predicted).abs()).max((direct - report.predicted).abs());
        }
    }
    ok &= single <= 1e-10;
    notes.push(format!("single-Kraus max error {single:.1e}"));

    let mut exceed = 0usize;
    for d in [3usize, 4] {
        let limit = concurrence_threshold(d).unwrap() * max_concurrence(d);
        for _ in 0..1000 {
            let chi = gaussian_matrix(&mut rng, d, d - 1).matmul(&gaussian_matrix(&mut rng, d - 1, d)).unwrap();
            let s = PureState::normalize(chi).unwrap();
            if concurrence_pure(&s).value() > limit + 1e-12 {
                exceed += 1;
            }
        }
    }
    ok &= exceed == 0;
    notes.push(format!("rank-deficient threshold violations {exceed}/2000"));
    outcome(ok, notes.join("; "))
}

/// Largest singular value via the eigenvalues of `k^dagger k`.
fn spectral_norm(k: &ComplexMatrix) -> f64 {
    let g = k.adjoint().matmul(k).unwrap();
    entdyn_core::linalg::hermitian_eig(&g).unwrap().values[0].sqrt()
}

fn criterion_7() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["sweep_two_sided_phase_damping.json", "sweep_two_sided_amplitude_damping.json"] {
        let cfg = ExperimentConfig::from_file(&data.join(name)).unwrap();
        let mut written = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{run}.csv"));
            std::fs::write(&path, records_to_csv(&run_sweep(&cfg).unwrap())).unwrap();
            written.push(std::fs::read(&path).unwrap());
        }
        let identical = written[0] == written[1];
        let records = run_sweep(&cfg).unwrap();
        let mut worst_mass = 0.0f64;
        for chunk in records.chunks(cfg.n_samples) {
            for field in [HistogramField::Ratio, HistogramField::CFinal] {
                let h = build_histogram(chunk, 50, field).unwrap();
                worst_mass = worst_mass.max((h.total_mass() - 1.0).abs());
            }
        }
        ok &= identical && worst_mass <= 1e-9;
        notes.push(format!("{name}: identical={identical}, histogram mass error {worst_mass:.1e}"));
    }
    outcome(ok, notes.join("; "))
}

/// Smallest bound ratio over 100 Haar states depolarized by `mixing`, each
/// under phase damping (even index) or dissipation (odd index) on B with
/// `p = 0.05 (i mod 10)`.
fn near_pure_min_ratio(mixing: f64) -> f64 {
    let mut min_ratio = f64::INFINITY;
    for (i, s) in haar(88, 100).iter().enumerate() {
        let rho = pure_to_density(s).mix(&DensityMatrix::maximally_mixed(2, 2), 1.0 - mixing);
        let p = 0.05 * (i % 10) as f64;
        let ch = if i % 2 == 0 { phase_damping(p).unwrap() } else { amplitude_damping(p).unwrap() };
        min_ratio = min_ratio.min(evolve_mixed_one_sided(&rho, &ch, Side::B).unwrap().ratio);
    }
    min_ratio
}

fn criterion_8() -> Outcome {
    let at = near_pure_min_ratio(1e-4);
    let trend: Vec<String> =
        [1e-6, 1e-8, 1e-10].iter().map(|&m| format!("{m:e}: {:.6}", near_pure_min_ratio(m))).collect();
    outcome(
        at >= 0.999,
        format!(
            "100 states at mixing 1e-4, min ratio {at:.6} (required >= 0.999); smaller mixing {}",
            trend.join(", ")
        ),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("factorization law exactness", criterion_1),
        ("analytic benchmarks", criterion_2),
        ("two-sided bound safety", criterion_3),
        ("Wootters faithfulness", criterion_4),
        ("filtering laws", criterion_5),
        ("G-concurrence", criterion_6),
        ("determinism and histograms", criterion_7),
        ("near-pure continuity", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag}  {name}: {}", k + 1, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
