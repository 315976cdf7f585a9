//! Conversions between the four descriptions of a self-adjoint extension:
//! `(Pi, Theta)`, boundary pairs `(B1, B2)` with condition `B1 zeta1 = B2 zeta2`,
//! self-adjoint relations in `C^n + C^n`, and the von Neumann matrix `m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krein::{ExtensionParams, WeylSystem};
use crate::numeric::{
    c, hermitian_eig, hermitian_part, min_singular, norm2, projector_onto, pseudo_inverse, range_basis,
    singular_values, solve_linear, CMatrix,
};

/// Threshold for the nondegeneracy tests.
pub const PAIR_SINGULAR_TOL: f64 = 1e-10;
/// Tolerance on `||B1 B2* - B2 B1*||`, relative to `1 + ||B1|| ||B2||`.
pub const COMM_TOL: f64 = 1e-12;
/// Tolerance on the symmetry pairing of a relation basis.
pub const PAIRING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPair {
    #[serde(with = "crate::serde_util::matrix")]
    pub b1: CMatrix,
    #[serde(with = "crate::serde_util::matrix")]
    pub b2: CMatrix,
}

impl BoundaryPair {
    pub fn new(b1: CMatrix, b2: CMatrix) -> Result<Self> {
        for m in [&b1, &b2] {
            if !m.is_square() || m.nrows() != b1.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: b1.nrows(),
                    found: m.ncols().max(m.nrows()),
                });
            }
        }
        Ok(BoundaryPair { b1, b2 })
    }

    pub fn dim(&self) -> usize {
        self.b1.nrows()
    }
}

/// Residuals of the four pair conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairConditions {
    pub comm_residual: f64,
    pub comm: bool,
    /// `sigma_min([[B1, -B2], [B2, B1]])`
    pub nondeg_sigma: f64,
    pub nondeg: bool,
    /// `sigma_min([B1*; B2*]) / sigma_max`
    pub rofe1_sigma: f64,
    pub rofe1: bool,
    /// `sigma_min(B1 B1* + B2 B2*)`
    pub rofe2_sigma: f64,
    pub rofe2: bool,
    /// Whether the three equivalent nondegeneracy tests agree.
    pub agree: bool,
}

impl PairConditions {
    pub fn failed(&self) -> Vec<&'static str> {
        [
            (self.comm, "comm"),
            (self.nondeg, "nondeg"),
            (self.rofe1, "rofe1"),
            (self.rofe2, "rofe2"),
        ]
        .into_iter()
        .filter_map(|(ok, name)| (!ok).then_some(name))
        .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.comm && self.nondeg && self.rofe1 && self.rofe2
    }
}

pub fn check_pair_conditions(bp: &BoundaryPair) -> Result<PairConditions> {
    let (b1, b2) = (&bp.b1, &bp.b2);
    if !b1.is_square() || b1.shape() != b2.shape() {
        return Err(Error::DimensionMismatch {
            expected: b1.nrows(),
            found: b2.nrows(),
        });
    }
    let n = b1.nrows();
    let comm_residual = (b1 * b2.adjoint() - b2 * b1.adjoint()).norm();
    let comm = comm_residual <= COMM_TOL * (1.0 + b1.norm() * b2.norm());

    let mut block = CMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(b1);
    block.view_mut((0, n), (n, n)).copy_from(&(-b2));
    block.view_mut((n, 0), (n, n)).copy_from(b2);
    block.view_mut((n, n), (n, n)).copy_from(b1);
    let nondeg_sigma = min_singular(&block);

    let mut stacked = CMatrix::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&b1.adjoint());
    stacked.view_mut((n, 0), (n, n)).copy_from(&b2.adjoint());
    let s = singular_values(&stacked);
    let rofe1_sigma = match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    };

    let rofe2_sigma = min_singular(&(b1 * b1.adjoint() + b2 * b2.adjoint()));

    let nondeg = nondeg_sigma > PAIR_SINGULAR_TOL;
    let rofe1 = rofe1_sigma > PAIR_SINGULAR_TOL;
    let rofe2 = rofe2_sigma > PAIR_SINGULAR_TOL;
    Ok(PairConditions {
        comm_residual,
        comm,
        nondeg_sigma,
        nondeg,
        rofe1_sigma,
        rofe1,
        rofe2_sigma,
        rofe2,
        agree: nondeg == rofe1 && rofe1 == rofe2,
    })
}

/// `B1 = Theta (-Theta + i)^{-1} + (1 - Pi)`, `B2 = (-Theta + i)^{-1}` on `range(Pi)`.
pub fn pair_from_params(p: &ExtensionParams) -> BoundaryPair {
    let n = p.dim();
    let q = p.range_basis();
    let k = q.ncols();
    let t = p.theta_block();
    let shifted = CMatrix::identity(k, k) * c(0.0, 1.0) - t;
    // -Theta + i is invertible for Hermitian Theta: its singular values are |i - theta_j| >= 1.
    let inv = solve_linear(&shifted, &CMatrix::identity(k, k)).expect("-Theta + i is invertible");
    let b1 = q * (t * &inv) * q.adjoint() + (CMatrix::identity(n, n) - p.pi());
    let b2 = q * inv * q.adjoint();
    BoundaryPair { b1, b2 }
}

/// `Pi` projects onto `Ker(B2)^perp`, `Theta = Pi B1* (B2*)^+ Pi`.
pub fn params_from_pair(bp: &BoundaryPair) -> Result<ExtensionParams> {
    let cond = check_pair_conditions(bp)?;
    let mut failed: Vec<&'static str> = Vec::new();
    if !cond.comm {
        failed.push("comm");
    }
    if !cond.nondeg {
        failed.push("nondeg");
    }
    if !failed.is_empty() {
        return Err(Error::PairConditions { failed });
    }
    let b2s = bp.b2.adjoint();
    let q = range_basis(&b2s);
    let pi = projector_onto(&q);
    let theta = &pi * bp.b1.adjoint() * pseudo_inverse(&b2s) * &pi;
    let block = hermitian_part(&(q.adjoint() * theta * &q));
    ExtensionParams::from_range(&q, &block)
}

/// A subspace of `C^n + C^n` spanned by the columns of `basis` (2n x k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfAdjointRelation {
    pub dim_h: usize,
    #[serde(with = "crate::serde_util::matrix")]
    pub basis: CMatrix,
}

impl SelfAdjointRelation {
    pub fn new(dim_h: usize, basis: CMatrix) -> Result<Self> {
        if basis.nrows() != 2 * dim_h {
            return Err(Error::DimensionMismatch {
                expected: 2 * dim_h,
                found: basis.nrows(),
            });
        }
        Ok(SelfAdjointRelation { dim_h, basis })
    }

    fn orthonormal(&self) -> CMatrix {
        range_basis(&self.basis)
    }

    pub fn rank(&self) -> usize {
        self.orthonormal().ncols()
    }

    /// `||X* Y - Y* X||` for the orthonormalized basis `[X; Y]`.
    pub fn pairing_residual(&self) -> f64 {
        let o = self.orthonormal();
        let n = self.dim_h;
        let x = o.rows(0, n);
        let y = o.rows(n, n);
        (x.adjoint() * y - y.adjoint() * x).norm()
    }
}

/// `{(v, Theta v): v in range(Pi)} + {(0, u): u in Ker(Pi)}`.
pub fn relation_from_params(p: &ExtensionParams) -> SelfAdjointRelation {
    let n = p.dim();
    let q = p.range_basis();
    let kb = p.kernel_basis();
    let k = q.ncols();
    let mut basis = CMatrix::zeros(2 * n, n);
    basis.view_mut((0, 0), (n, k)).copy_from(q);
    basis.view_mut((n, 0), (n, k)).copy_from(&(p.theta() * q));
    basis.view_mut((n, k), (n, n - k)).copy_from(&kb);
    SelfAdjointRelation { dim_h: n, basis }
}

/// `{(B2* zeta, B1* zeta)}`.
pub fn relation_from_pair(bp: &BoundaryPair) -> Result<SelfAdjointRelation> {
    let cond = check_pair_conditions(bp)?;
    if !cond.all_pass() {
        return Err(Error::PairConditions { failed: cond.failed() });
    }
    let n = bp.dim();
    let mut basis = CMatrix::zeros(2 * n, n);
    basis.view_mut((0, 0), (n, n)).copy_from(&bp.b2.adjoint());
    basis.view_mut((n, 0), (n, n)).copy_from(&bp.b1.adjoint());
    Ok(SelfAdjointRelation { dim_h: n, basis })
}

/// Sine of the largest principal angle; 1 when the dimensions differ.
pub fn max_principal_angle_sine(r1: &SelfAdjointRelation, r2: &SelfAdjointRelation) -> Result<f64> {
    if r1.dim_h != r2.dim_h {
        return Err(Error::DimensionMismatch {
            expected: r1.dim_h,
            found: r2.dim_h,
        });
    }
    let (q1, q2) = (r1.orthonormal(), r2.orthonormal());
    if q1.ncols() != q2.ncols() {
        return Ok(1.0);
    }
    if q1.ncols() == 0 {
        return Ok(0.0);
    }
    let resid = &q2 - &q1 * (q1.adjoint() * &q2);
    Ok(norm2(&resid).min(1.0))
}

pub fn subspace_equal(r1: &SelfAdjointRelation, r2: &SelfAdjointRelation, tol: f64) -> Result<bool> {
    Ok(max_principal_angle_sine(r1, r2)?.asin() < tol)
}

pub fn is_selfadjoint_relation(r: &SelfAdjointRelation) -> bool {
    r.basis.nrows() == 2 * r.dim_h && r.rank() == r.dim_h && r.pairing_residual() <= PAIRING_TOL
}

/// The von Neumann description of an extension in the bases `{G(+-i) e_k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VonNeumannBlock {
    /// Matrix of `U` up to the sign: `U G(i) b = -G(-i) m b`.
    #[serde(with = "crate::serde_util::matrix")]
    pub m: CMatrix,
    /// `Im Gamma(i) = G(+-i)* G(+-i)`.
    #[serde(with = "crate::serde_util::matrix")]
    pub q: CMatrix,
    /// `i Im Gamma(i)`.
    #[serde(with = "crate::serde_util::matrix")]
    pub gamma_hat: CMatrix,
    /// `||m* q m - q||`
    pub unitarity_residual: f64,
    /// Difference between the two algebraic forms of the compressed block.
    pub alternative_form_residual: f64,
}

/// Build `m = 1 + 2 Q X^{-1} Q* Gamma_hat` with
/// `X = Q* (Theta + Re Gamma(i)) Q - Q* Gamma_hat Q`.
///
/// `Theta` is shifted by `Re Gamma(i)` because `Gamma_hat` differs from the
/// model's `Gamma` at the reference point `i` by exactly that Hermitian part.
/// The off-diagonal block `Q* m K = 2 X^{-1} Q* Gamma_hat K` is kept; it is
/// nonzero whenever `Pi` does not commute with `Im Gamma(i)`.
pub fn von_neumann_block<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams) -> Result<VonNeumannBlock> {
    let n = w.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let g_plus = w.gamma(c(0.0, 1.0))?;
    let g_minus = w.gamma(c(0.0, -1.0))?;
    let q = hermitian_part(&((&g_plus - &g_minus) * c(0.0, -0.5)));
    let re = hermitian_part(&((&g_plus + &g_minus) * c(0.5, 0.0)));
    let eig = hermitian_eig(&q)?;
    let lo = eig.values.first().copied().unwrap_or(1.0);
    let hi = eig.values.last().copied().unwrap_or(1.0);
    if lo <= 1e-14 * hi.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidModel(format!(
            "Im Gamma(i) is not positive definite (smallest eigenvalue {lo:.3e})"
        )));
    }
    let gamma_hat = &q * c(0.0, 1.0);
    let qb = p.range_basis();
    let k = qb.ncols();
    if k == 0 {
        return Ok(VonNeumannBlock {
            m: CMatrix::identity(n, n),
            q,
            gamma_hat,
            unitarity_residual: 0.0,
            alternative_form_residual: 0.0,
        });
    }
    let theta0 = p.theta_block() + qb.adjoint() * &re * qb;
    let gh0 = qb.adjoint() * &gamma_hat * qb;
    let x = &theta0 - &gh0;
    let xinv = solve_linear(&x, &CMatrix::identity(k, k))
        .map_err(|e| Error::Internal(format!("compressed von Neumann block is singular: {e}")))?;
    let m = CMatrix::identity(n, n) + qb * xinv.scale(2.0) * qb.adjoint() * &gamma_hat;
    let primary = CMatrix::identity(k, k) + (&xinv * &gh0).scale(2.0);
    let alternative = &xinv * (&theta0 + &gh0);
    let unitarity_residual = (m.adjoint() * &q * &m - &q).norm();
    Ok(VonNeumannBlock {
        m,
        q,
        gamma_hat,
        unitarity_residual,
        alternative_form_residual: (primary - alternative).norm(),
    })
}
