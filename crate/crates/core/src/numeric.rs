//! Small dense complex linear algebra.
//!
//! Everything here works on `nalgebra` dense matrices of `Complex64`. Boundary
//! spaces in this crate are at most a few dozen dimensions, so no sparse
//! storage is used anywhere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative Hermiticity tolerance, applied as `tol * (1 + ||M||_F)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative rank threshold `tol * sigma_max`.
pub const RANK_TOL: f64 = 1e-10;
/// A matrix is treated as singular when `sigma_min <= SINGULAR_TOL * sigma_max`.
pub const SINGULAR_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("matrix is singular to tolerance: sigma_min {sigma_min:.3e}, threshold {threshold:.3e}")]
    Singular { sigma_min: f64, threshold: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm of `M - M*`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (m - m.adjoint()).norm()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn check_square(m: &CMatrix) -> Result<(), NumericError> {
    if m.is_square() {
        Ok(())
    } else {
        Err(NumericError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The input is checked against `HERMITIAN_TOL` and symmetrized before the
/// decomposition, since Hermitian matrices assembled from Weyl functions on the
/// real axis are only Hermitian up to roundoff.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig, NumericError> {
    check_square(m)?;
    if !is_finite(m) {
        return Err(NumericError::NonFinite);
    }
    let residual = hermitian_residual(m);
    let tol = HERMITIAN_TOL * (1.0 + m.norm());
    if residual > tol {
        return Err(NumericError::NotHermitian { residual, tol });
    }
    Ok(hermitian_eig_unchecked(&hermitian_part(m)))
}

fn hermitian_eig_unchecked(m: &CMatrix) -> HermitianEig {
    let n = m.nrows();
    if n == 0 {
        return HermitianEig {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    HermitianEig { values, vectors }
}

/// Singular triplets above the rank threshold, plus all singular values.
struct Svd {
    /// All `min(rows, cols)` singular values, descending.
    values: Vec<f64>,
    /// Left singular vectors for the values above `RANK_TOL * sigma_max`.
    u: CMatrix,
    /// Matching right singular vectors.
    v: CMatrix,
}

/// SVD from the Hermitian eigendecomposition of `[[0, M], [M*, 0]]`, whose
/// eigenvalues are `+-sigma_i` (and `|rows - cols|` zeros) with eigenvectors
/// `(u_i, +-v_i) / sqrt(2)`. Backward stable like a direct SVD, and it relies
/// only on the Hermitian eigensolver.
fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Svd {
            values: Vec::new(),
            u: CMatrix::zeros(rows, 0),
            v: CMatrix::zeros(cols, 0),
        };
    }
    let mut jw = CMatrix::zeros(rows + cols, rows + cols);
    jw.view_mut((0, rows), (rows, cols)).copy_from(m);
    jw.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    let eig = hermitian_eig_unchecked(&jw);
    let total = rows + cols;
    let values: Vec<f64> = (0..r).map(|i| eig.values[total - 1 - i].max(0.0)).collect();
    let smax = values[0];
    let keep = if smax > 0.0 {
        values.iter().take_while(|&&x| x > RANK_TOL * smax).count()
    } else {
        0
    };
    let scale = c(std::f64::consts::SQRT_2, 0.0);
    let u = CMatrix::from_fn(rows, keep, |i, j| eig.vectors[(i, total - 1 - j)] * scale);
    let v = CMatrix::from_fn(cols, keep, |i, j| eig.vectors[(rows + i, total - 1 - j)] * scale);
    Svd { values, u, v }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    svd(m).values
}

/// Smallest singular value; zero for empty or zero matrices.
///
/// For non-square input this is the smallest of the `min(rows, cols)` values.
pub fn min_singular(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Spectral norm.
pub fn norm2(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Solve `M x = b` for square, numerically nonsingular `M`.
pub fn solve_linear(m: &CMatrix, b: &CMatrix) -> Result<CMatrix, NumericError> {
    check_square(m)?;
    if b.nrows() != m.nrows() {
        return Err(NumericError::DimensionMismatch {
            expected: m.nrows(),
            found: b.nrows(),
        });
    }
    if m.nrows() == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    let s = singular_values(m);
    let smax = s[0];
    let smin = *s.last().unwrap();
    let threshold = SINGULAR_TOL * smax;
    if smax == 0.0 || smin <= threshold {
        return Err(NumericError::Singular {
            sigma_min: smin,
            threshold,
        });
    }
    m.clone().lu().solve(b).ok_or(NumericError::Singular {
        sigma_min: smin,
        threshold,
    })
}

/// Orthonormal basis (as columns) of the column span of `m`, using the rank
/// threshold `RANK_TOL * sigma_max`.
pub fn range_basis(m: &CMatrix) -> CMatrix {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let u = svd(m).u;
    if u.ncols() == 0 {
        return u;
    }
    // Re-orthonormalize; eigenvector halves are orthonormal only to roundoff.
    u.qr().q()
}

/// Orthonormal basis of the null space of `m` (columns), same rank policy.
pub fn null_basis(m: &CMatrix) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    // Range of M* is the orthogonal complement of the kernel.
    let range = range_basis(&m.adjoint());
    complement_basis(&range, cols)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` in C^n.
pub fn complement_basis(q: &CMatrix, n: usize) -> CMatrix {
    let k = q.ncols();
    if k == 0 {
        return CMatrix::identity(n, n);
    }
    if k >= n {
        return CMatrix::zeros(n, 0);
    }
    let residual = CMatrix::identity(n, n) - q * q.adjoint();
    let basis = range_basis(&residual);
    // The complement projector has exact rank n-k up to roundoff; trim if needed.
    if basis.ncols() > n - k {
        basis.columns(0, n - k).into_owned()
    } else {
        basis
    }
}

pub fn rank(m: &CMatrix) -> usize {
    range_basis(m).ncols()
}

/// Orthogonal projector onto the span of `vectors` in C^n.
///
/// Dependent inputs are fine; an empty list gives the zero matrix.
pub fn projector_from_span(n: usize, vectors: &[CVector]) -> Result<CMatrix, NumericError> {
    if vectors.is_empty() {
        return Ok(CMatrix::zeros(n, n));
    }
    for v in vectors {
        if v.len() != n {
            return Err(NumericError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let m = CMatrix::from_fn(n, vectors.len(), |r, j| vectors[j][r]);
    Ok(projector_onto(&range_basis(&m)))
}

/// `Q Q*` for orthonormal columns `Q`, symmetrized.
pub fn projector_onto(q: &CMatrix) -> CMatrix {
    hermitian_part(&(q * q.adjoint()))
}

/// Moore-Penrose pseudo-inverse with the crate rank policy.
pub fn pseudo_inverse(m: &CMatrix) -> CMatrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMatrix::zeros(cols, rows);
    }
    let d = svd(m);
    let mut out = CMatrix::zeros(cols, rows);
    for i in 0..d.u.ncols() {
        out += (d.v.column(i) * d.u.column(i).adjoint()).scale(1.0 / d.values[i]);
    }
    out
}

/// Principal square root with the branch cut on the negative real axis.
#[inline]
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    z.sqrt()
}

/// `exp(w) - 1` without cancellation for small `|w|`.
pub fn cexpm1(w: Complex64) -> Complex64 {
    let (x, y) = (w.re, w.im);
    let s = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * s * s;
    let im = x.exp() * y.sin();
    c(re, im)
}

/// Determinant of a small square matrix via LU.
pub fn det(m: &CMatrix) -> Complex64 {
    if m.nrows() == 0 {
        return c(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Block diagonal assembly.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(n, m);
    let (mut r, mut col) = (0, 0);
    for b in blocks {
        out.view_mut((r, col), b.shape()).copy_from(b);
        r += b.nrows();
        col += b.ncols();
    }
    out
}

/// Max-modulus entry norm.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Vector 2-norm of a complex slice.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
