//! Entanglement evolution under local channels.
//!
//! The benchmark factor of a channel is the concurrence of its Choi state.
//! For a pure 2x2 state and a one-sided trace-preserving channel the final
//! concurrence is exactly `C(chi) * benchmark`; for mixed states and for
//! noise on both sides the same product is an upper bound.
//!
//! Concurrence is homogeneous of degree one in the (unnormalized) state, so
//! trace-decreasing channels fit the same pattern once normalized quantities
//! are rescaled by `p_benchmark / p_state`, where `p_state` is the
//! probability for the input to pass the channel(s) and `p_benchmark` the
//! product of the passage probabilities of `|phi_d>`. For trace-preserving
//! channels both are 1.

use crate::error::{Error, Result};
use crate::linalg::Side;
use crate::measures::{
    concurrence_pure_det, concurrence_wootters, gconcurrence_of_coefficients, gconcurrence_pure, Concurrence,
};
use crate::quantum::{
    apply_channel, choi_state, pure_to_density, DensityMatrix, FilterOperation, PureState, QuantumChannel,
    MIN_PROBABILITY,
};

/// Below this both sides of a law count as zero and the ratio is 1.
pub const ZERO_TOL: f64 = 1e-12;

/// Probabilities for the evolved state and for the benchmark state(s) to
/// pass trace-decreasing channels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Passage {
    pub state: f64,
    pub benchmark: f64,
}

impl Passage {
    fn rescale(&self) -> f64 {
        self.benchmark / self.state
    }
}

/// Both sides of an evolution law for one initial state and dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionReport {
    pub initial_concurrence: f64,
    pub final_concurrence: f64,
    /// Factorization value (exact regime) or upper bound.
    pub predicted: f64,
    /// Pure initial state and a single one-sided channel.
    pub is_exact_regime: bool,
    /// `final / predicted`, 1 when both vanish.
    pub ratio: f64,
    /// Present when a channel is not trace preserving.
    pub passage: Option<Passage>,
}

impl EvolutionReport {
    fn new(initial: f64, final_concurrence: f64, predicted: f64, exact: bool, passage: Option<Passage>) -> Self {
        Self {
            initial_concurrence: initial,
            final_concurrence,
            predicted,
            is_exact_regime: exact,
            ratio: bound_ratio(final_concurrence, predicted),
            passage,
        }
    }

    /// `max(final - predicted, 0)`.
    pub fn violation(&self) -> f64 {
        (self.final_concurrence - self.predicted).max(0.0)
    }
}

/// `final / predicted` with `0 / 0 = 1`.
pub fn bound_ratio(final_value: f64, predicted: f64) -> f64 {
    if predicted <= ZERO_TOL && final_value <= ZERO_TOL {
        1.0
    } else if predicted <= 0.0 {
        f64::INFINITY
    } else {
        final_value / predicted
    }
}

fn require_qubit_channel(ch: &QuantumChannel) -> Result<()> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        return Err(Error::Unsupported(format!(
            "concurrence benchmark needs a qubit channel, got {} -> {}",
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    Ok(())
}

/// Probability for `|phi_d>` to pass `ch` on one side: `Tr(sum K^dagger K) / d`.
pub fn benchmark_passage(ch: &QuantumChannel) -> f64 {
    ch.gram().trace().re / ch.dim_in() as f64
}

/// Concurrence of the (normalized) Choi state `(I (x) ch)|phi+><phi+|`.
///
/// The value is the same whichever side the channel acts on and for any
/// maximally entangled reference state.
pub fn channel_benchmark(ch: &QuantumChannel) -> Result<Concurrence> {
    require_qubit_channel(ch)?;
    concurrence_wootters(&choi_state(ch)?.normalized()?)
}

fn normalized_output(out: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let p = out.trace();
    if p <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability: p });
    }
    Ok((out.normalized()?, p))
}

/// Exact factorization law for a pure 2x2 state and a trace-preserving
/// channel on one side.
pub fn evolve_pure_one_sided(s: &PureState, ch: &QuantumChannel, side: Side) -> Result<EvolutionReport> {
    if !ch.is_trace_preserving() {
        return Err(Error::InvalidParameter(
            "channel is not trace preserving; use evolve_pure_non_trace_preserving".into(),
        ));
    }
    let report = evolve_pure_non_trace_preserving(s, ch, side)?;
    Ok(EvolutionReport { passage: None, ..report })
}

/// Factorization law for a pure 2x2 state and a trace non-increasing channel,
/// in normalized form: `C(rho) = C(chi) * (p_phi / p_chi) * C(rho_choi)`.
pub fn evolve_pure_non_trace_preserving(s: &PureState, ch: &QuantumChannel, side: Side) -> Result<EvolutionReport> {
    require_qubit_channel(ch)?;
    let initial = concurrence_pure_det(s)?.value();
    let out = apply_channel(&pure_to_density(s), ch, side)?;
    let (out, p_state) = normalized_output(&out)?;
    let final_concurrence = concurrence_wootters(&out)?.value();
    let p_benchmark = benchmark_passage(ch);
    if p_benchmark <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability: p_benchmark });
    }
    let passage = Passage { state: p_state, benchmark: p_benchmark };
    let predicted = initial * passage.rescale() * channel_benchmark(ch)?.value();
    Ok(EvolutionReport::new(initial, final_concurrence, predicted, true, Some(passage)))
}

fn require_normalized_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != (2, 2) {
        let (a, b) = rho.dims();
        return Err(Error::Unsupported(format!("concurrence bounds need a 2x2 state, got {a}x{b}")));
    }
    if !rho.is_normalized() {
        return Err(Error::NotNormalized { what: "initial state", value: rho.trace() });
    }
    Ok(())
}

fn tp_passage(passage: Passage, channels: &[&QuantumChannel]) -> Option<Passage> {
    if channels.iter().all(|c| c.is_trace_preserving()) {
        None
    } else {
        Some(passage)
    }
}

/// Upper bound for a mixed 2x2 state with a channel on one side:
/// `C(out) <= C(rho) * benchmark`.
pub fn evolve_mixed_one_sided(rho: &DensityMatrix, ch: &QuantumChannel, side: Side) -> Result<EvolutionReport> {
    require_normalized_qubits(rho)?;
    require_qubit_channel(ch)?;
    let initial = concurrence_wootters(rho)?.value();
    let (out, p_state) = normalized_output(&apply_channel(rho, ch, side)?)?;
    let final_concurrence = concurrence_wootters(&out)?.value();
    let passage = Passage { state: p_state, benchmark: benchmark_passage(ch) };
    let predicted = initial * channel_benchmark(ch)?.value() * passage.rescale();
    Ok(EvolutionReport::new(initial, final_concurrence, predicted, false, tp_passage(passage, &[ch])))
}

/// Two-sided upper bound: `ch_a` on subsystem A, then `ch_b` on B;
/// `C(out) <= C(rho) * benchmark(ch_a) * benchmark(ch_b)`.
pub fn evolve_two_sided(rho: &DensityMatrix, ch_a: &QuantumChannel, ch_b: &QuantumChannel) -> Result<EvolutionReport> {
    require_normalized_qubits(rho)?;
    require_qubit_channel(ch_a)?;
    require_qubit_channel(ch_b)?;
    let initial = concurrence_wootters(rho)?.value();
    let benchmarks = (channel_benchmark(ch_a)?.value(), channel_benchmark(ch_b)?.value());
    two_sided_with_benchmarks(rho, initial, ch_a, ch_b, benchmarks)
}

/// [`evolve_two_sided`] with precomputed initial concurrence and benchmark
/// factors, for sweeps that reuse them across many states.
pub(crate) fn two_sided_with_benchmarks(
    rho: &DensityMatrix,
    initial: f64,
    ch_a: &QuantumChannel,
    ch_b: &QuantumChannel,
    (bench_a, bench_b): (f64, f64),
) -> Result<EvolutionReport> {
    let mid = apply_channel(rho, ch_a, Side::A)?;
    let (out, p_state) = normalized_output(&apply_channel(&mid, ch_b, Side::B)?)?;
    let final_concurrence = concurrence_wootters(&out)?.value();
    let passage = Passage { state: p_state, benchmark: benchmark_passage(ch_a) * benchmark_passage(ch_b) };
    let predicted = initial * bench_a * bench_b * passage.rescale();
    Ok(EvolutionReport::new(initial, final_concurrence, predicted, false, tp_passage(passage, &[ch_a, ch_b])))
}

/// One-sided pure-state law with a precomputed benchmark.
pub(crate) fn one_sided_with_benchmark(
    s: &PureState,
    initial: f64,
    ch: &QuantumChannel,
    side: Side,
    bench: f64,
) -> Result<EvolutionReport> {
    let (out, p_state) = normalized_output(&apply_channel(&pure_to_density(s), ch, side)?)?;
    let final_concurrence = concurrence_wootters(&out)?.value();
    let passage = Passage { state: p_state, benchmark: benchmark_passage(ch) };
    let predicted = initial * bench * passage.rescale();
    Ok(EvolutionReport::new(initial, final_concurrence, predicted, true, tp_passage(passage, &[ch])))
}

/// G-concurrence of a channel's normalized Choi state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChoiGConcurrence {
    /// Single Kraus operator: the Choi state is pure and the value exact.
    Exact(f64),
    /// Several Kraus operators: no closed form for mixed states, so this is
    /// the average over the Kraus decomposition, an upper bound on the
    /// convex roof.
    UpperBound(f64),
}

impl ChoiGConcurrence {
    pub fn value(self) -> f64 {
        match self {
            ChoiGConcurrence::Exact(v) | ChoiGConcurrence::UpperBound(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, ChoiGConcurrence::Exact(_))
    }
}

fn require_square_channel(ch: &QuantumChannel) -> Result<usize> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::Unsupported("G-concurrence needs channels with equal input and output dimension".into()));
    }
    Ok(ch.dim_in())
}

/// G-concurrence of `(I (x) ch)|phi_d><phi_d|` (normalized).
///
/// For Kraus operator `K` the branch `(I (x) K)|phi_d>` has coefficient
/// matrix `K^T / sqrt(d)`, so its normalized G-concurrence is
/// `d |det K|^(2/d) / |K|_F^2`.
pub fn choi_gconcurrence(ch: &QuantumChannel) -> Result<ChoiGConcurrence> {
    let d = require_square_channel(ch)? as f64;
    let total_weight: f64 = ch.kraus().iter().map(|k| k.frobenius_norm_sqr()).sum();
    if total_weight <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability: total_weight / d });
    }
    let weighted: f64 = ch
        .kraus()
        .iter()
        .map(|k| {
            let det = crate::linalg::determinant(k).expect("square Kraus operator").norm();
            d * det.powf(2.0 / d)
        })
        .sum();
    let value = weighted / total_weight;
    Ok(if ch.kraus().len() == 1 { ChoiGConcurrence::Exact(value) } else { ChoiGConcurrence::UpperBound(value) })
}

/// How far a G-concurrence report's final value can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certification {
    /// The evolved state is pure; the final value was computed exactly.
    Certified,
    /// The evolved state is mixed; only the predicted right-hand side
    /// (built from Kraus-decomposition upper bounds) is available.
    PredictionOnly,
    /// Mixed initial state; the report carries the bound alone.
    BoundOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GConcurrenceReport {
    pub initial: f64,
    pub predicted: f64,
    /// Only present when [`Certification::Certified`].
    pub final_value: Option<f64>,
    pub certification: Certification,
    pub passage: Option<Passage>,
}

impl GConcurrenceReport {
    pub fn ratio(&self) -> Option<f64> {
        self.final_value.map(|f| bound_ratio(f, self.predicted))
    }
}

fn choi_factor(ch: &QuantumChannel) -> Result<(ChoiGConcurrence, f64)> {
    Ok((choi_gconcurrence(ch)?, benchmark_passage(ch)))
}

/// G-concurrence law for a pure `d x d` state and a channel on one side.
///
/// Single-Kraus channels keep the state pure, so the final value is computed
/// directly and certified; otherwise only the prediction is reported.
pub fn evolve_gconcurrence_pure(s: &PureState, ch: &QuantumChannel, side: Side) -> Result<GConcurrenceReport> {
    let initial = gconcurrence_pure(s)?.value();
    let d = require_square_channel(ch)?;
    if s.dims() != (d, d) {
        return Err(Error::DimensionMismatch(format!("channel dimension {d} does not match the state")));
    }
    let (choi, p_benchmark) = choi_factor(ch)?;

    if let [k] = ch.kraus() {
        let chi = FilterOperation::new(k.clone(), side)?.apply_to_coefficients(s)?;
        let p_state = chi.frobenius_norm_sqr();
        if p_state <= MIN_PROBABILITY {
            return Err(Error::Annihilated { probability: p_state });
        }
        let passage = Passage { state: p_state, benchmark: p_benchmark };
        return Ok(GConcurrenceReport {
            initial,
            predicted: initial * choi.value() * passage.rescale(),
            final_value: Some(gconcurrence_of_coefficients(&chi)),
            certification: Certification::Certified,
            passage: tp_passage(passage, &[ch]),
        });
    }

    let out = apply_channel(&pure_to_density(s), ch, side)?;
    let passage = Passage { state: out.trace(), benchmark: p_benchmark };
    if passage.state <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability: passage.state });
    }
    Ok(GConcurrenceReport {
        initial,
        predicted: initial * choi.value() * passage.rescale(),
        final_value: None,
        certification: Certification::PredictionOnly,
        passage: tp_passage(passage, &[ch]),
    })
}

/// Initial condition for [`evolve_gconcurrence_bound`]. Mixed states carry
/// their G-concurrence explicitly since it has no closed form.
#[derive(Clone, Debug)]
pub enum GInitialState {
    Pure(PureState),
    Mixed { rho: DensityMatrix, gconcurrence: f64 },
}

/// G-concurrence bound with `ch_a` on subsystem A and `ch_b` on B.
pub fn evolve_gconcurrence_bound(
    initial: &GInitialState,
    ch_a: &QuantumChannel,
    ch_b: &QuantumChannel,
) -> Result<GConcurrenceReport> {
    let d = require_square_channel(ch_a)?;
    if require_square_channel(ch_b)? != d {
        return Err(Error::DimensionMismatch("channels act on different dimensions".into()));
    }
    let (rho, initial_value) = match initial {
        GInitialState::Pure(s) => (pure_to_density(s), gconcurrence_pure(s)?.value()),
        GInitialState::Mixed { rho, gconcurrence } => {
            if !(0.0..=1.0 + 1e-9).contains(gconcurrence) {
                return Err(Error::InvalidParameter(format!("G-concurrence {gconcurrence} outside [0, 1]")));
            }
            (rho.clone(), *gconcurrence)
        }
    };
    if rho.dims() != (d, d) {
        return Err(Error::Unsupported(format!("state is not {d}x{d}")));
    }
    let (choi_a, p_a) = choi_factor(ch_a)?;
    let (choi_b, p_b) = choi_factor(ch_b)?;
    let out = apply_channel(&apply_channel(&rho, ch_a, Side::A)?, ch_b, Side::B)?;
    let passage = Passage { state: out.trace(), benchmark: p_a * p_b };
    if passage.state <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability: passage.state });
    }
    let predicted = initial_value * choi_a.value() * choi_b.value() * passage.rescale();
    let passage = tp_passage(passage, &[ch_a, ch_b]);

    let (final_value, certification) = match (initial, ch_a.kraus(), ch_b.kraus()) {
        (GInitialState::Pure(s), [ka], [kb]) => {
            let chi = &(ka * s.chi()) * &kb.transpose();
            (Some(gconcurrence_of_coefficients(&chi)), Certification::Certified)
        }
        (GInitialState::Pure(_), _, _) => (None, Certification::PredictionOnly),
        (GInitialState::Mixed { .. }, _, _) => (None, Certification::BoundOnly),
    };
    Ok(GConcurrenceReport { initial: initial_value, predicted, final_value, certification, passage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Complex, ComplexMatrix};
    use crate::quantum::{amplitude_damping, bell_phi_plus, phase_damping, random_channel, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn state(seed: u64, d: usize) -> PureState {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let chi = ComplexMatrix::from_fn(d, d, |_, _| crate::quantum::complex_gaussian(&mut rng));
        PureState::normalize(chi).unwrap()
    }

    /// A state `cos t |00> + sin t |11>` with concurrence `sin 2t`.
    fn state_with_concurrence(c: f64) -> PureState {
        let t = c.asin() / 2.0;
        PureState::new(ComplexMatrix::from_real_diag(&[t.cos(), t.sin()])).unwrap()
    }

    #[test]
    fn benchmark_examples() {
        assert!((channel_benchmark(&QuantumChannel::identity(2)).unwrap().value() - 1.0).abs() < 1e-12);
        assert!((channel_benchmark(&phase_damping(0.5).unwrap()).unwrap().value() - 0.5).abs() < 1e-9);
        assert!((channel_benchmark(&amplitude_damping(0.36).unwrap()).unwrap().value() - 0.8).abs() < 1e-9);
        assert!(channel_benchmark(&random_channel(3, 2, 0).unwrap()).is_err());
    }

    #[test]
    fn benchmark_is_monotone_for_named_channels() {
        let mut last = (f64::INFINITY, f64::INFINITY);
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let ph = channel_benchmark(&phase_damping(p).unwrap()).unwrap().value();
            let amp = channel_benchmark(&amplitude_damping(p).unwrap()).unwrap().value();
            assert!(ph <= last.0 + 1e-12 && amp <= last.1 + 1e-12);
            last = (ph, amp);
        }
    }

    #[test]
    fn benchmark_independent_of_reference_state() {
        for seed in 0..20 {
            let ch = random_channel(2, 2, seed).unwrap();
            let u = random_unitary(2, 500 + seed).unwrap();
            let bell = bell_phi_plus(2).unwrap();
            let rotated = PureState::new(&u * bell.chi()).unwrap();
            let out = apply_channel(&pure_to_density(&rotated), &ch, Side::B).unwrap();
            let c = concurrence_wootters(&out).unwrap().value();
            assert!((c - channel_benchmark(&ch).unwrap().value()).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_law_examples() {
        for ch in [phase_damping(0.3).unwrap(), amplitude_damping(0.7).unwrap(), random_channel(2, 3, 1).unwrap()] {
            let r = evolve_pure_one_sided(&bell_phi_plus(2).unwrap(), &ch, Side::B).unwrap();
            let bench = channel_benchmark(&ch).unwrap().value();
            assert!((r.final_concurrence - bench).abs() < 1e-9 && (r.predicted - bench).abs() < 1e-12);
            assert!(r.is_exact_regime);
        }
        let r = evolve_pure_one_sided(&state_with_concurrence(0.6), &phase_damping(0.25).unwrap(), Side::B).unwrap();
        assert!((r.final_concurrence - 0.45).abs() < 1e-9);
        assert!((r.predicted - 0.45).abs() < 1e-9);

        let product = PureState::basis(2, 2, 1, 0).unwrap();
        let r = evolve_pure_one_sided(&product, &random_channel(2, 2, 4).unwrap(), Side::A).unwrap();
        assert!(r.final_concurrence < 1e-9 && r.predicted == 0.0 && r.ratio == 1.0);
    }

    #[test]
    fn pure_law_holds_on_both_sides() {
        for seed in 0..50 {
            let s = state(seed, 2);
            let ch = random_channel(2, 1 + seed as usize % 4, 77 + seed).unwrap();
            for side in [Side::A, Side::B] {
                let r = evolve_pure_one_sided(&s, &ch, side).unwrap();
                assert!((r.final_concurrence - r.predicted).abs() <= 1e-9, "seed {seed} side {side}");
            }
        }
    }

    #[test]
    fn one_sided_law_rejects_trace_decreasing_channel() {
        let ch = QuantumChannel::new(vec![ComplexMatrix::from_real_diag(&[1.0, 0.5])]).unwrap();
        assert!(evolve_pure_one_sided(&state(0, 2), &ch, Side::B).is_err());
    }

    #[test]
    fn non_trace_preserving_law() {
        let s = state(9, 2);
        let tp = phase_damping(0.4).unwrap();
        let a = evolve_pure_non_trace_preserving(&s, &tp, Side::B).unwrap();
        let b = evolve_pure_one_sided(&s, &tp, Side::B).unwrap();
        let passage = a.passage.unwrap();
        assert!((passage.state - 1.0).abs() < 1e-12 && (passage.benchmark - 1.0).abs() < 1e-12);
        assert!((a.final_concurrence - b.final_concurrence).abs() < 1e-15);
        assert!((a.predicted - b.predicted).abs() < 1e-12);

        // single Kraus operator = filtering; both laws coincide
        let k = ComplexMatrix::from_real_diag(&[1.0, 0.5]);
        let ch = QuantumChannel::new(vec![k.clone()]).unwrap();
        for side in [Side::A, Side::B] {
            let r = evolve_pure_non_trace_preserving(&s, &ch, side).unwrap();
            let f = FilterOperation::new(k.clone(), side).unwrap();
            let c0 = concurrence_pure_det(&s).unwrap();
            let filtered = crate::measures::predict_filtered_concurrence_pure(c0, &f, &s).unwrap().value();
            assert!((r.predicted - filtered).abs() < 1e-12);
            assert!((r.final_concurrence - r.predicted).abs() < 1e-9);
        }

        let half = QuantumChannel::new(vec![ComplexMatrix::identity(2).scale_real(0.5f64.sqrt())]).unwrap();
        let r = evolve_pure_non_trace_preserving(&s, &half, Side::B).unwrap();
        let p = r.passage.unwrap();
        assert!((p.state - 0.5).abs() < 1e-12 && (p.benchmark - 0.5).abs() < 1e-12);
        assert!((r.final_concurrence - r.initial_concurrence).abs() < 1e-9);
        assert!((r.predicted - r.initial_concurrence).abs() < 1e-12);

        // random sub-unital channels: scaled Kraus ops of a TP channel, plus a filter
        for seed in 0..20 {
            let base = random_channel(2, 2, seed).unwrap();
            let filter = ComplexMatrix::from_real_diag(&[0.9, 0.35]);
            let kraus = base.kraus().iter().map(|k| &filter * k).collect();
            let ch = QuantumChannel::new(kraus).unwrap();
            assert!(!ch.is_trace_preserving());
            let r = evolve_pure_non_trace_preserving(&state(seed + 40, 2), &ch, Side::B).unwrap();
            assert!((r.final_concurrence - r.predicted).abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_one_sided_bound() {
        let s = state(3, 2);
        let ch = amplitude_damping(0.45).unwrap();
        let r = evolve_mixed_one_sided(&pure_to_density(&s), &ch, Side::B).unwrap();
        assert!((r.final_concurrence - r.predicted).abs() < 1e-9);
        assert!(!r.is_exact_regime);

        let sep = DensityMatrix::werner(0.2).unwrap();
        let r = evolve_mixed_one_sided(&sep, &ch, Side::B).unwrap();
        assert!(r.predicted.abs() < 1e-12 && r.final_concurrence.abs() < 1e-12 && r.ratio == 1.0);

        let r = evolve_mixed_one_sided(&DensityMatrix::werner(0.8).unwrap(), &phase_damping(0.3).unwrap(), Side::B)
            .unwrap();
        assert!((r.predicted - 0.49).abs() < 1e-9);
        assert!(r.final_concurrence <= 0.49 + 1e-9);
    }

    #[test]
    fn two_sided_bound() {
        let rho = DensityMatrix::werner(0.9).unwrap().mix(&pure_to_density(&state(1, 2)), 0.5);
        let ch = random_channel(2, 2, 8).unwrap();
        let two = evolve_two_sided(&rho, &ch, &QuantumChannel::identity(2)).unwrap();
        let one = evolve_mixed_one_sided(&rho, &ch, Side::A).unwrap();
        assert!((two.final_concurrence - one.final_concurrence).abs() < 1e-12);
        assert!((two.predicted - one.predicted).abs() < 1e-12);

        let bell = pure_to_density(&bell_phi_plus(2).unwrap());
        for p in [0.0, 0.1, 0.5, 0.9] {
            let ch = phase_damping(p).unwrap();
            let r = evolve_two_sided(&bell, &ch, &ch).unwrap();
            assert!((r.predicted - (1.0 - p) * (1.0 - p)).abs() < 1e-9);
            assert!(r.final_concurrence <= r.predicted + 1e-9);
        }

        let breaker = phase_damping(1.0).unwrap();
        let r = evolve_two_sided(&bell, &breaker, &breaker).unwrap();
        assert!(r.predicted < 1e-12 && r.final_concurrence < 1e-12);
    }

    #[test]
    fn two_sided_order_is_irrelevant() {
        let rho = pure_to_density(&state(5, 2));
        let a = random_channel(2, 3, 1).unwrap();
        let b = random_channel(2, 2, 2).unwrap();
        let ab = apply_channel(&apply_channel(&rho, &a, Side::A).unwrap(), &b, Side::B).unwrap();
        let ba = apply_channel(&apply_channel(&rho, &b, Side::B).unwrap(), &a, Side::A).unwrap();
        assert!(ab.matrix().max_abs_diff(ba.matrix()) < 1e-14);
    }

    #[test]
    fn composition_of_channels() {
        for seed in 0..20 {
            let s = state(seed, 2);
            let ch_a = amplitude_damping(0.1 + 0.04 * seed as f64).unwrap();
            let ch_b = amplitude_damping(0.3).unwrap();
            let composed = ch_b.compose_after(&ch_a).unwrap();
            let r = evolve_pure_one_sided(&s, &composed, Side::B).unwrap();
            assert!((r.final_concurrence - r.predicted).abs() < 1e-9, "seed {seed}");
            // concatenated dissipation: benchmarks multiply
            let chained = channel_benchmark(&ch_a).unwrap().value() * channel_benchmark(&ch_b).unwrap().value();
            assert!((r.final_concurrence - r.initial_concurrence * chained).abs() < 1e-9);
        }
    }

    #[test]
    fn choi_gconcurrence_values() {
        for d in 2..5 {
            let u = random_unitary(d, d as u64).unwrap();
            let g = choi_gconcurrence(&QuantumChannel::unitary(u).unwrap()).unwrap();
            assert!(g.is_exact() && (g.value() - 1.0).abs() < 1e-12);
        }
        let g = choi_gconcurrence(&phase_damping(0.3).unwrap()).unwrap();
        assert!(!g.is_exact());
        // the Kraus average bounds the exact two-qubit value from above
        assert!(g.value() + 1e-12 >= channel_benchmark(&phase_damping(0.3).unwrap()).unwrap().value());
    }

    #[test]
    fn gconcurrence_law_examples() {
        let s = state(2, 3);
        let u = QuantumChannel::unitary(random_unitary(3, 1).unwrap()).unwrap();
        let r = evolve_gconcurrence_pure(&s, &u, Side::B).unwrap();
        assert_eq!(r.certification, Certification::Certified);
        assert!((r.final_value.unwrap() - r.initial).abs() < 1e-12);
        assert!((r.predicted - r.initial).abs() < 1e-12);

        let k = ComplexMatrix::from_real_diag(&[1.0, 1.0, 0.5]);
        let filter = QuantumChannel::new(vec![k]).unwrap();
        let r = evolve_gconcurrence_pure(&bell_phi_plus(3).unwrap(), &filter, Side::B).unwrap();
        assert!((r.final_value.unwrap() - r.predicted).abs() < 1e-10);
        assert!(r.final_value.unwrap() < 1.0);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let deficient = PureState::new(ComplexMatrix::from_real_diag(&[0.0, h, h])).unwrap();
        let noisy = random_channel(3, 3, 5).unwrap();
        let r = evolve_gconcurrence_pure(&deficient, &noisy, Side::B).unwrap();
        assert_eq!(r.predicted, 0.0);
        assert_eq!(r.certification, Certification::PredictionOnly);
        assert!(r.final_value.is_none());

        assert!(evolve_gconcurrence_pure(&PureState::basis(2, 3, 0, 0).unwrap(), &u, Side::B).is_err());
    }

    #[test]
    fn gconcurrence_law_general_single_kraus() {
        for seed in 0..30 {
            let d = 2 + seed as usize % 4;
            let s = state(seed, d);
            let k = ComplexMatrix::from_fn(d, d, |i, j| {
                Complex::new(((i * 7 + j * 3 + seed as usize) % 5) as f64 / 5.0, (i as f64 - j as f64) * 0.1)
            });
            let scale = crate::linalg::hermitian_eig(&(&k.adjoint() * &k)).unwrap().values[0].sqrt();
            let ch = QuantumChannel::new(vec![k.scale_real(1.0 / scale)]).unwrap();
            for side in [Side::A, Side::B] {
                let r = evolve_gconcurrence_pure(&s, &ch, side).unwrap();
                assert!((r.final_value.unwrap() - r.predicted).abs() < 1e-10, "seed {seed}");
            }
        }
    }

    #[test]
    fn gconcurrence_bound_examples() {
        let s = state(4, 3);
        let u1 = QuantumChannel::unitary(random_unitary(3, 10).unwrap()).unwrap();
        let u2 = QuantumChannel::unitary(random_unitary(3, 11).unwrap()).unwrap();
        let r = evolve_gconcurrence_bound(&GInitialState::Pure(s.clone()), &u1, &u2).unwrap();
        assert!((r.final_value.unwrap() - r.initial).abs() < 1e-12);

        let k1 = QuantumChannel::new(vec![ComplexMatrix::from_real_diag(&[1.0, 0.6, 0.9])]).unwrap();
        let k2 = QuantumChannel::new(vec![ComplexMatrix::from_real_diag(&[0.3, 1.0, 0.8])]).unwrap();
        let r = evolve_gconcurrence_bound(&GInitialState::Pure(bell_phi_plus(3).unwrap()), &k1, &k2).unwrap();
        assert_eq!(r.certification, Certification::Certified);
        assert!(r.final_value.unwrap() <= r.predicted + 1e-9);

        let rho = pure_to_density(&s).mix(&DensityMatrix::maximally_mixed(3, 3), 0.9);
        let init = GInitialState::Mixed { rho, gconcurrence: 0.4 };
        let r = evolve_gconcurrence_bound(&init, &k1, &random_channel(3, 2, 0).unwrap()).unwrap();
        assert_eq!(r.certification, Certification::BoundOnly);
        assert!(r.final_value.is_none());

        let r = evolve_gconcurrence_bound(&GInitialState::Pure(s), &phase_damping(0.1).unwrap(), &u1);
        assert!(r.is_err());
    }

    #[test]
    fn mixed_bound_tightens_towards_pure_states() {
        // deficit shrinks like the mixing weight, or its square root when the
        // evolved pure state is rank deficient (dissipation)
        for seed in 0..20 {
            let pure = pure_to_density(&state(seed, 2));
            let ch = if seed % 2 == 0 { phase_damping(0.3).unwrap() } else { amplitude_damping(0.3).unwrap() };
            let deficit = |mixing: f64| {
                let rho = pure.mix(&DensityMatrix::maximally_mixed(2, 2), 1.0 - mixing);
                1.0 - evolve_mixed_one_sided(&rho, &ch, Side::B).unwrap().ratio
            };
            let d: Vec<f64> = [1e-4, 1e-6, 1e-8, 1e-10].iter().map(|&m| deficit(m)).collect();
            assert!(d.windows(2).all(|w| w[1] < w[0]), "seed {seed}: {d:?}");
            assert!(d[3] < 1e-3 && d[3] >= -1e-9, "seed {seed}: {d:?}");
        }
    }

    #[test]
    fn ratio_convention() {
        assert_eq!(bound_ratio(0.0, 0.0), 1.0);
        assert_eq!(bound_ratio(1e-13, 5e-13), 1.0);
        assert_eq!(bound_ratio(0.25, 0.5), 0.5);
        assert!(bound_ratio(0.1, 0.0).is_infinite());
    }
}
