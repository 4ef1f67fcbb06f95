//! Cyclic Jacobi eigensolver for Hermitian matrices, plus the PSD square
//! root and singular values built on top of it.

use std::cmp::Ordering;

use super::{Complex, ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Sweeps stop once the off-diagonal Frobenius mass drops below this
/// fraction of the input's Frobenius norm.
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
/// Eigenvalues closer than this (relative to the matrix norm) are ties.
const TIE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as "non-negative" by [`matrix_sqrt_psd`].
pub(crate) const PSD_TOL: f64 = 1e-9;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Real eigenvalues, descending.
    pub values: Vec<f64>,
    /// Unitary matrix whose column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<Complex> {
        self.vectors.col(k)
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * v[(j, k)].conj() * weights[k]).sum())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

fn off_diagonal_norm(a: &[Complex], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Zeroes `a[p][q]` with a complex Jacobi rotation `W`, updating
/// `a <- W^dagger a W` and `v <- v W`.
fn rotate(a: &mut [Complex], v: &mut [Complex], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    // Phase that makes the (p, q) element real and positive.
    let phase = apq / abs;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * abs);
    let t = if theta.is_infinite() { 0.0 } else { theta.signum() / (theta.abs() + theta.hypot(1.0)) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e = phase.conj();

    // Columns: a <- a W with W = [[c, s], [-s e, c e]] on the (p, q) plane.
    for r in 0..n {
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        a[r * n + p] = arp * c - arq * e * s;
        a[r * n + q] = arp * s + arq * e * c;
        let vrp = v[r * n + p];
        let vrq = v[r * n + q];
        v[r * n + p] = vrp * c - vrq * e * s;
        v[r * n + q] = vrp * s + vrq * e * c;
    }
    // Rows: a <- W^dagger a.
    let ec = e.conj();
    for r in 0..n {
        let apr = a[p * n + r];
        let aqr = a[q * n + r];
        a[p * n + r] = apr * c - aqr * ec * s;
        a[q * n + r] = apr * s + aqr * ec * c;
    }
    a[p * n + q] = Complex::new(0.0, 0.0);
    a[q * n + p] = Complex::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}

/// Rotates `v` so that its first non-negligible component is real positive.
fn normalize_phase(v: &mut [Complex]) {
    if let Some(&lead) = v.iter().find(|z| z.norm() > 1e-12) {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

fn lex_desc(a: &[Complex], b: &[Complex]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order. Each eigenvector is rotated so
/// its first non-negligible entry is real positive, and eigenvectors of tied
/// eigenvalues are ordered lexicographically (largest first) so the output
/// is reproducible.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let deviation = m.hermiticity_error();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows();
    let mut a = m.hermitian_part().into_vec();
    let mut v = ComplexMatrix::identity(n).into_vec();
    let target = OFF_DIAGONAL_TOL * m.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > target {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let v = ComplexMatrix::new(n, n, v)?;
    let mut pairs: Vec<(f64, Vec<Complex>)> = (0..n)
        .map(|k| {
            let mut col = v.col(k);
            normalize_phase(&mut col);
            (a[k * n + k].re, col)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    // Within a group of tied eigenvalues, order the vectors deterministically
    // and keep the values themselves descending.
    let tie = TIE_TOL * m.frobenius_norm().max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end - 1].0 - pairs[end].0 <= tie {
            end += 1;
        }
        if end - start > 1 {
            let mut values: Vec<f64> = pairs[start..end].iter().map(|p| p.0).collect();
            pairs[start..end].sort_by(|x, y| lex_desc(&x.1, &y.1));
            values.sort_by(|x, y| y.total_cmp(x));
            for (pair, value) in pairs[start..end].iter_mut().zip(values) {
                pair.0 = value;
            }
        }
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| pairs[k].1[i]);
    Ok(Eigen { values, vectors })
}

/// Square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-9, 0)` are treated as zero; anything lower is an
/// error.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()).hermitian_part())
}

/// Singular values of `m`, descending, `min(rows, cols)` of them.
///
/// Computed as the non-negative eigenvalues of the Hermitian dilation
/// `[[0, m], [m^dagger, 0]]`, which keeps small singular values accurate to
/// roughly machine precision times `|m|` (forming `m m^dagger` would square
/// the error).
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let (r, c) = m.shape();
    let n = r + c;
    let dilation = ComplexMatrix::from_fn(n, n, |i, j| match (i < r, j < r) {
        (true, false) => m[(i, j - r)],
        (false, true) => m[(j, i - r)].conj(),
        _ => Complex::new(0.0, 0.0),
    });
    let eig = hermitian_eig(&dilation)?;
    Ok(eig.values.iter().take(r.min(c)).map(|&s| s.max(0.0)).collect())
}
