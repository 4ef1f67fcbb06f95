//! Bipartite states, local Kraus channels and filtering operations.
//!
//! Basis convention for the qubit channels: `|g> = |0>`, `|e> = |1>`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, Complex, ComplexMatrix, Side};

/// Tolerance used for normalization, trace-preservation and positivity checks.
pub const STATE_TOL: f64 = 1e-9;
/// Probabilities at or below this are treated as an annihilated state.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// Pure state of a `d_a x d_b` system stored as its coefficient matrix:
/// `chi[(i, j)]` is the amplitude of `|i>_A |j>_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    d_a: usize,
    d_b: usize,
    chi: ComplexMatrix,
}

impl PureState {
    /// Wraps a coefficient matrix, which must have unit Frobenius norm.
    pub fn new(chi: ComplexMatrix) -> Result<Self> {
        let norm = chi.frobenius_norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { what: "pure state", value: norm });
        }
        let (d_a, d_b) = chi.shape();
        Ok(Self { d_a, d_b, chi })
    }

    /// Rescales `chi` to unit norm.
    pub fn normalize(chi: ComplexMatrix) -> Result<Self> {
        let norm = chi.frobenius_norm();
        if norm * norm <= MIN_PROBABILITY {
            return Err(Error::Annihilated { probability: norm * norm });
        }
        let (d_a, d_b) = chi.shape();
        Ok(Self { d_a, d_b, chi: chi.scale_real(1.0 / norm) })
    }

    /// Amplitudes in product-basis order (`i * d_b + j`).
    pub fn from_amplitudes(d_a: usize, d_b: usize, amplitudes: Vec<Complex>) -> Result<Self> {
        Self::new(ComplexMatrix::new(d_a, d_b, amplitudes)?)
    }

    /// The product basis state `|i>|j>`.
    pub fn basis(d_a: usize, d_b: usize, i: usize, j: usize) -> Result<Self> {
        if i >= d_a || j >= d_b {
            return Err(Error::InvalidParameter(format!("basis index ({i}, {j}) out of range")));
        }
        let mut chi = ComplexMatrix::zeros(d_a, d_b);
        chi[(i, j)] = Complex::new(1.0, 0.0);
        Self::new(chi)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn chi(&self) -> &ComplexMatrix {
        &self.chi
    }

    pub fn amplitudes(&self) -> &[Complex] {
        self.chi.as_slice()
    }

    pub fn is_square(&self) -> bool {
        self.d_a == self.d_b
    }
}

/// Whether a [`DensityMatrix`] has unit trace or carries a recorded trace
/// (output of a trace-decreasing map).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    Normalized,
    Unnormalized { trace: f64 },
}

/// Density operator on a `d_a x d_b` system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    d_a: usize,
    d_b: usize,
    rho: ComplexMatrix,
    normalization: Normalization,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace (all within 1e-9).
    pub fn new(d_a: usize, d_b: usize, rho: ComplexMatrix) -> Result<Self> {
        let rho = validate_positive(d_a, d_b, rho)?;
        let trace = rho.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { what: "density matrix", value: trace });
        }
        Ok(Self { d_a, d_b, rho, normalization: Normalization::Normalized })
    }

    /// Like [`DensityMatrix::new`] but accepts any positive trace, recording
    /// it instead of requiring 1.
    pub fn unnormalized(d_a: usize, d_b: usize, rho: ComplexMatrix) -> Result<Self> {
        let rho = validate_positive(d_a, d_b, rho)?;
        let trace = rho.trace().re;
        Ok(Self { d_a, d_b, rho, normalization: Normalization::Unnormalized { trace } })
    }

    /// Builds from matrices produced by trusted internal maps (no eigen check).
    fn from_map_output(d_a: usize, d_b: usize, rho: ComplexMatrix, normalized: bool) -> Self {
        let rho = rho.hermitian_part();
        let normalization =
            if normalized { Normalization::Normalized } else { Normalization::Unnormalized { trace: rho.trace().re } };
        Self { d_a, d_b, rho, normalization }
    }

    /// The maximally mixed state `I / (d_a d_b)`.
    pub fn maximally_mixed(d_a: usize, d_b: usize) -> Self {
        let n = d_a * d_b;
        let rho = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
        Self { d_a, d_b, rho, normalization: Normalization::Normalized }
    }

    /// `q |phi+><phi+| + (1 - q) I / 4`.
    pub fn werner(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("Werner weight {q} outside [0, 1]")));
        }
        let bell = pure_to_density(&bell_phi_plus(2)?);
        let mixed = Self::maximally_mixed(2, 2);
        Ok(bell.mix(&mixed, q))
    }

    /// Convex combination `w * self + (1 - w) * other` (same dimensions).
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> DensityMatrix {
        assert_eq!(self.dims(), other.dims(), "mixing states of different dimensions");
        let rho = &self.rho.scale_real(w) + &other.rho.scale_real(1.0 - w);
        let normalized = self.is_normalized() && other.is_normalized();
        Self::from_map_output(self.d_a, self.d_b, rho, normalized)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization == Normalization::Normalized
    }

    pub fn trace(&self) -> f64 {
        match self.normalization {
            Normalization::Normalized => 1.0,
            Normalization::Unnormalized { trace } => trace,
        }
    }

    /// Divides by the recorded trace.
    pub fn normalized(&self) -> Result<DensityMatrix> {
        match self.normalization {
            Normalization::Normalized => Ok(self.clone()),
            Normalization::Unnormalized { trace } => {
                if trace <= MIN_PROBABILITY {
                    return Err(Error::Annihilated { probability: trace });
                }
                let rho = self.rho.scale_real(1.0 / trace);
                Ok(Self::from_map_output(self.d_a, self.d_b, rho, true))
            }
        }
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn reduced(&self, keep: Side) -> ComplexMatrix {
        linalg::partial_trace(&self.rho, self.d_a, self.d_b, keep.other())
            .expect("density matrix dimensions are consistent")
    }

    /// Applies the local unitary (or any local operators) `u (x) v`.
    pub fn conjugate_local(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.shape() != (self.d_a, self.d_a) || v.shape() != (self.d_b, self.d_b) {
            return Err(Error::DimensionMismatch("local operators do not match subsystems".into()));
        }
        let rho = self.rho.conjugate_by(&kron(u, v));
        Ok(Self::from_map_output(self.d_a, self.d_b, rho, false).renormalize_if(self.is_normalized()))
    }

    fn renormalize_if(self, normalized: bool) -> DensityMatrix {
        if normalized && (self.trace() - 1.0).abs() <= STATE_TOL {
            Self { normalization: Normalization::Normalized, ..self }
        } else {
            self
        }
    }
}

fn validate_positive(d_a: usize, d_b: usize, rho: ComplexMatrix) -> Result<ComplexMatrix> {
    let n = d_a * d_b;
    if d_a == 0 || d_b == 0 || rho.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix cannot describe a {d_a}x{d_b} system",
            rho.rows(),
            rho.cols()
        )));
    }
    let eig = linalg::hermitian_eig(&rho)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -STATE_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(rho.hermitian_part())
}

/// `|chi><chi|`.
pub fn pure_to_density(s: &PureState) -> DensityMatrix {
    let v = s.amplitudes();
    DensityMatrix { d_a: s.d_a, d_b: s.d_b, rho: ComplexMatrix::outer(v, v), normalization: Normalization::Normalized }
}

/// `|phi_d> = sum_i |i>|i> / sqrt(d)`.
pub fn bell_phi_plus(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("maximally entangled state needs d >= 2, got {d}")));
    }
    let chi = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
    Ok(PureState { d_a: d, d_b: d, chi })
}

/// Kraus representation of a map acting on one subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

impl QuantumChannel {
    /// Validates shapes and classifies the map: trace preserving when
    /// `|sum K^dagger K - I|_F <= 1e-9`, otherwise the largest eigenvalue of
    /// `sum K^dagger K` must not exceed `1 + 1e-9`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::Empty("Kraus operator list"))?;
        let (dim_out, dim_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch("Kraus operators have different shapes".into()));
        }
        let gram = kraus_gram(&kraus, dim_in);
        let deviation = (&gram - &ComplexMatrix::identity(dim_in)).frobenius_norm();
        let trace_preserving = deviation <= STATE_TOL;
        if !trace_preserving {
            let max_eigenvalue = linalg::hermitian_eig(&gram)?.values[0];
            if max_eigenvalue > 1.0 + STATE_TOL {
                return Err(Error::NotContractive { max_eigenvalue });
            }
        }
        Ok(Self { dim_in, dim_out, kraus, trace_preserving })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).expect("identity is a channel")
    }

    /// Single-Kraus channel `rho -> u rho u^dagger`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `sum_i K_i^dagger K_i`.
    pub fn gram(&self) -> ComplexMatrix {
        kraus_gram(&self.kraus, self.dim_in)
    }

    /// `self` after `first`: Kraus operators `K_j L_i` for all pairs.
    pub fn compose_after(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch("channel composition dimensions".into()));
        }
        let kraus = self.kraus.iter().flat_map(|k| first.kraus.iter().map(move |l| k * l)).collect();
        QuantumChannel::new(kraus)
    }
}

fn kraus_gram(kraus: &[ComplexMatrix], dim_in: usize) -> ComplexMatrix {
    kraus.iter().fold(ComplexMatrix::zeros(dim_in, dim_in), |acc, k| &acc + &(&k.adjoint() * k))
}

fn lift(op: &ComplexMatrix, d_a: usize, d_b: usize, side: Side) -> ComplexMatrix {
    match side {
        Side::A => kron(op, &ComplexMatrix::identity(d_b)),
        Side::B => kron(&ComplexMatrix::identity(d_a), op),
    }
}

/// `sum_i (I (x) K_i) rho (I (x) K_i)^dagger` (or `K_i (x) I` for side A).
///
/// The result is flagged unnormalized, with its trace recorded, whenever the
/// channel is not trace preserving or the input was already unnormalized.
pub fn apply_channel(rho: &DensityMatrix, ch: &QuantumChannel, side: Side) -> Result<DensityMatrix> {
    let (d_a, d_b) = rho.dims();
    let d_side = if side == Side::A { d_a } else { d_b };
    if ch.dim_in != d_side {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {} but subsystem {side} has dimension {d_side}",
            ch.dim_in
        )));
    }
    let (out_a, out_b) = match side {
        Side::A => (ch.dim_out, d_b),
        Side::B => (d_a, ch.dim_out),
    };
    let n = out_a * out_b;
    let out = ch
        .kraus
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, k| &acc + &rho.rho.conjugate_by(&lift(k, d_a, d_b, side)));
    let normalized = ch.trace_preserving && rho.is_normalized();
    Ok(DensityMatrix::from_map_output(out_a, out_b, out, normalized))
}

/// Choi state `(I (x) ch) |phi_d><phi_d|`; unnormalized for trace-decreasing
/// channels.
pub fn choi_state(ch: &QuantumChannel) -> Result<DensityMatrix> {
    let phi = pure_to_density(&bell_phi_plus(ch.dim_in)?);
    apply_channel(&phi, ch, Side::B)
}

/// A local (generally non-unitary) filter `m` acting on one subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterOperation {
    pub m: ComplexMatrix,
    pub side: Side,
}

impl FilterOperation {
    pub fn new(m: ComplexMatrix, side: Side) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        Ok(Self { m, side })
    }

    pub fn determinant(&self) -> Complex {
        linalg::determinant(&self.m).expect("filter is square")
    }

    fn check(&self, d_a: usize, d_b: usize) -> Result<()> {
        let d = if self.side == Side::A { d_a } else { d_b };
        if self.m.rows() != d {
            return Err(Error::DimensionMismatch(format!(
                "filter of dimension {} applied to subsystem {} of dimension {d}",
                self.m.rows(),
                self.side
            )));
        }
        Ok(())
    }

    /// Coefficient matrix of `(M (x) I)|chi>` (or `I (x) M`), unnormalized.
    pub fn apply_to_coefficients(&self, s: &PureState) -> Result<ComplexMatrix> {
        self.check(s.d_a, s.d_b)?;
        Ok(match self.side {
            Side::A => &self.m * &s.chi,
            Side::B => &s.chi * &self.m.transpose(),
        })
    }
}

/// Filters a (possibly mixed) state and renormalizes. Returns the filtered
/// state and the success probability `Tr[(M (x) I) rho (M (x) I)^dagger]`.
pub fn filter_state(s: &DensityMatrix, f: &FilterOperation) -> Result<(DensityMatrix, f64)> {
    let (d_a, d_b) = s.dims();
    f.check(d_a, d_b)?;
    let out = s.rho.conjugate_by(&lift(&f.m, d_a, d_b, f.side));
    let probability = out.trace().re;
    if probability <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability });
    }
    let out = out.scale_real(1.0 / probability);
    Ok((DensityMatrix::from_map_output(d_a, d_b, out, true), probability))
}

/// Pure-state version of [`filter_state`]: the filtered pure state and
/// `|(M (x) I)|chi>|^2`.
pub fn filter_pure(s: &PureState, f: &FilterOperation) -> Result<(PureState, f64)> {
    let chi = f.apply_to_coefficients(s)?;
    let probability = chi.frobenius_norm_sqr();
    if probability <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability });
    }
    Ok((PureState::normalize(chi)?, probability))
}

/// The filter `sqrt(d) chi` on side A that maps `|phi_d>` onto `s`.
pub fn state_as_filter(s: &PureState) -> Result<FilterOperation> {
    if !s.is_square() {
        return Err(Error::Unsupported(format!(
            "state-to-filter map needs a square bipartition, got {}x{}",
            s.d_a, s.d_b
        )));
    }
    let m = s.chi.scale_real((s.d_a as f64).sqrt());
    FilterOperation::new(m, Side::A)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Dephasing: `K0 = sqrt(1-p) I`, `K1 = sqrt(p) |g><g|`, `K2 = sqrt(p) |e><e|`.
pub fn phase_damping(p: f64) -> Result<QuantumChannel> {
    check_probability(p)?;
    let k0 = ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt());
    let k1 = ComplexMatrix::from_real_diag(&[p.sqrt(), 0.0]);
    let k2 = ComplexMatrix::from_real_diag(&[0.0, p.sqrt()]);
    QuantumChannel::new(vec![k0, k1, k2])
}

/// Dissipation: `K0 = |g><g| + sqrt(1-p) |e><e|`, `K1 = sqrt(p) |g><e|`.
pub fn amplitude_damping(p: f64) -> Result<QuantumChannel> {
    check_probability(p)?;
    let k0 = ComplexMatrix::from_real_diag(&[1.0, (1.0 - p).sqrt()]);
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1[(0, 1)] = Complex::new(p.sqrt(), 0.0);
    QuantumChannel::new(vec![k0, k1])
}

/// Standard complex Gaussian with `E|z|^2 = 1`.
pub(crate) fn complex_gaussian(rng: &mut ChaCha20Rng) -> Complex {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Orthonormalizes the columns of `m` in place (modified Gram-Schmidt with
/// one reorthogonalization pass). The implied `R` has a positive diagonal.
fn orthonormalize_columns(m: &mut ComplexMatrix) -> Result<()> {
    let (rows, cols) = m.shape();
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex = (0..rows).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
                for i in 0..rows {
                    let sub = proj * m[(i, k)];
                    m[(i, j)] -= sub;
                }
            }
        }
        let norm = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            return Err(Error::InvalidParameter("degenerate Gaussian sample".into()));
        }
        for i in 0..rows {
            m[(i, j)] /= norm;
        }
    }
    Ok(())
}

/// Trace-preserving channel obtained by slicing a random isometry
/// `C^d -> C^(n_kraus d)` into `n_kraus` stacked `d x d` blocks.
///
/// The isometry is the Q factor of an `(n_kraus d) x d` matrix of standard
/// complex Gaussians drawn from `ChaCha20Rng::seed_from_u64(seed)`, so the
/// output is bit-for-bit deterministic per seed. With `n_kraus = 1` the single
/// block is a Haar-random unitary.
pub fn random_channel(d: usize, n_kraus: usize, seed: u64) -> Result<QuantumChannel> {
    if d < 2 || n_kraus < 1 {
        return Err(Error::InvalidParameter(format!(
            "random channel needs d >= 2 and n_kraus >= 1, got d={d}, n_kraus={n_kraus}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rows = n_kraus * d;
    let mut g = ComplexMatrix::from_fn(rows, d, |_, _| complex_gaussian(&mut rng));
    orthonormalize_columns(&mut g)?;
    let kraus = (0..n_kraus).map(|b| ComplexMatrix::from_fn(d, d, |i, j| g[(b * d + i, j)])).collect();
    QuantumChannel::new(kraus)
}

/// Haar-random `d x d` unitary for the given seed.
pub fn random_unitary(d: usize, seed: u64) -> Result<ComplexMatrix> {
    Ok(random_channel(d, 1, seed)?.kraus.remove(0))
}
