//! Concurrence, G-concurrence and the filtering-law predictors.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, kron, pauli, ComplexMatrix, Side};
use crate::quantum::{DensityMatrix, FilterOperation, PureState, MIN_PROBABILITY, STATE_TOL};

/// A concurrence value; non-negative and at most `sqrt(2 (1 - 1/d))`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Concurrence(f64);

impl Concurrence {
    /// Rejects negative (beyond rounding) and non-finite values.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        if value < -STATE_TOL {
            return Err(Error::InvalidParameter(format!("negative concurrence {value}")));
        }
        Ok(Self(value.max(0.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Concurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12}", self.0)
    }
}

/// A G-concurrence value in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct GConcurrence(f64);

impl GConcurrence {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for GConcurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12}", self.0)
    }
}

/// Largest pure-state concurrence of a `d x d'` system, `min(d, d') = d`.
pub fn max_concurrence(d: usize) -> f64 {
    (2.0 * (1.0 - 1.0 / d as f64)).sqrt()
}

/// Pure-state concurrence `sqrt(2 (1 - Tr rho_A^2))`.
///
/// `(Tr rho_A)^2 - Tr rho_A^2` equals twice the sum of squared 2x2 minors of
/// `chi` (Cauchy-Binet with `rho_A = chi chi^dagger`), which we evaluate
/// directly: it avoids the cancellation in `1 - Tr rho_A^2` near product
/// states.
pub fn concurrence_pure(s: &PureState) -> Concurrence {
    let chi = s.chi();
    let (d_a, d_b) = s.dims();
    let mut sum = 0.0;
    for i in 0..d_a {
        for j in i + 1..d_a {
            for k in 0..d_b {
                for l in k + 1..d_b {
                    let minor = chi[(i, k)] * chi[(j, l)] - chi[(i, l)] * chi[(j, k)];
                    sum += minor.norm_sqr();
                }
            }
        }
    }
    Concurrence(2.0 * sum.sqrt())
}

fn require_two_qubits(dims: (usize, usize), what: &str) -> Result<()> {
    if dims != (2, 2) {
        return Err(Error::Unsupported(format!("{what} is only defined for 2x2 systems, got {}x{}", dims.0, dims.1)));
    }
    Ok(())
}

/// `2 |det chi|` for a 2x2 pure state.
pub fn concurrence_pure_det(s: &PureState) -> Result<Concurrence> {
    require_two_qubits(s.dims(), "determinant concurrence")?;
    Ok(Concurrence(2.0 * linalg::determinant(s.chi())?.norm()))
}

/// Eigenvalues of a unit-trace state at or below this are treated as zero
/// when forming its square root.
pub const SUPPORT_TOL: f64 = 1e-13;

/// Wootters' concurrence of a normalized two-qubit density matrix.
///
/// The square roots of the eigenvalues of `rho (sy sy) rho* (sy sy)` are the
/// singular values of `sqrt(rho) sqrt(rho~)` with
/// `sqrt(rho~) = (sy sy) sqrt(rho)* (sy sy)`; taking singular values directly
/// keeps the small ones accurate, which matters for nearly pure states.
pub fn concurrence_wootters(rho: &DensityMatrix) -> Result<Concurrence> {
    require_two_qubits(rho.dims(), "Wootters concurrence")?;
    let trace = rho.matrix().trace().re;
    if (trace - 1.0).abs() > STATE_TOL {
        return Err(Error::NotNormalized { what: "density matrix", value: trace });
    }
    let eig = linalg::hermitian_eig(rho.matrix())?;
    let min = eig.values[3];
    if min < -STATE_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    // The spectrum of sqrt(rho) rho~ sqrt(rho) reacts like a square root to
    // noise in the kernel of rho, so rounding-level eigenvalues are dropped.
    let sqrt_rho = eig.reconstruct_with(|l| if l > SUPPORT_TOL { l.sqrt() } else { 0.0 }).hermitian_part();
    let flip = kron(&pauli::y(), &pauli::y());
    let sqrt_tilde = &(&flip * &sqrt_rho.conj()) * &flip;
    let s = linalg::singular_values(&(&sqrt_rho * &sqrt_tilde))?;
    Ok(Concurrence((s[0] - s[1] - s[2] - s[3]).max(0.0)))
}

/// `d |det chi|^(2/d)` for a `d x d` pure state.
pub fn gconcurrence_pure(s: &PureState) -> Result<GConcurrence> {
    if !s.is_square() {
        let (a, b) = s.dims();
        return Err(Error::Unsupported(format!("G-concurrence needs a square bipartition, got {a}x{b}")));
    }
    Ok(GConcurrence(gconcurrence_of_coefficients(s.chi())))
}

/// `d |det chi|^(2/d) / |chi|_F^2`, i.e. the G-concurrence of the normalized
/// state with (square) coefficient matrix `chi`.
pub(crate) fn gconcurrence_of_coefficients(chi: &ComplexMatrix) -> f64 {
    let d = chi.rows() as f64;
    let det = linalg::determinant(chi).expect("square coefficient matrix").norm();
    d * det.powf(2.0 / d) / chi.frobenius_norm_sqr()
}

/// Concurrence after filtering a 2x2 pure state, predicted from the initial
/// value: `|det M| / |(M (x) I)|psi>|^2 * c0`.
pub fn predict_filtered_concurrence_pure(c0: Concurrence, f: &FilterOperation, s: &PureState) -> Result<Concurrence> {
    require_two_qubits(s.dims(), "filtered concurrence")?;
    let norm_sqr = f.apply_to_coefficients(s)?.frobenius_norm_sqr();
    if norm_sqr <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability: norm_sqr });
    }
    Ok(Concurrence(f.determinant().norm() / norm_sqr * c0.0))
}

/// Mixed-state analogue: `|det M| / Tr[(M (x) I) rho (M (x) I)^dagger] * c0`.
pub fn predict_filtered_concurrence_mixed(
    c0: Concurrence,
    f: &FilterOperation,
    rho: &DensityMatrix,
) -> Result<Concurrence> {
    require_two_qubits(rho.dims(), "filtered concurrence")?;
    if f.m.rows() != 2 {
        return Err(Error::DimensionMismatch("filter must be 2x2".into()));
    }
    let lifted = match f.side {
        Side::A => kron(&f.m, &ComplexMatrix::identity(2)),
        Side::B => kron(&ComplexMatrix::identity(2), &f.m),
    };
    let probability = rho.matrix().conjugate_by(&lifted).trace().re;
    if probability <= MIN_PROBABILITY {
        return Err(Error::Annihilated { probability });
    }
    Ok(Concurrence(f.determinant().norm() / probability * c0.0))
}

/// Peres-Horodecki test; exact for two qubits. Separable iff the partial
/// transpose has no eigenvalue below `-1e-9`.
pub fn ppt_is_separable(rho: &DensityMatrix) -> Result<bool> {
    Ok(min_partial_transpose_eigenvalue(rho)? >= -STATE_TOL)
}

pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho.dims(), "PPT criterion")?;
    let pt = linalg::partial_transpose(rho.matrix(), 2, 2, Side::B)?;
    let eig = linalg::hermitian_eig(&pt)?;
    Ok(eig.values[3])
}

/// Fraction of the maximal concurrence reachable by a `d x d` pure state
/// whose G-concurrence vanishes: `sqrt(1 - 1/(d-1)^2)`.
pub fn concurrence_threshold(d: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("threshold needs d >= 3, got {d}")));
    }
    let k = (d - 1) as f64;
    Ok((1.0 - 1.0 / (k * k)).sqrt())
}
