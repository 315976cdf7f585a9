//! Model-independent extension machinery.
//!
//! A self-adjoint extension is labelled by a pair `(Pi, Theta)`: an orthogonal
//! projector on the boundary space together with a Hermitian `Theta` living on
//! `range(Pi)`. Given a Weyl family `Gamma(z)` and the gamma field `G(z)` of a
//! model, the resolvent of the extension is
//!
//! ```text
//! R_{Pi,Theta}(z) = R(z) + G(z) Pi (Theta + Pi Gamma(z) Pi)^{-1} Pi G(conj z)^*
//! ```
//!
//! `Theta` is interpreted in the Weyl-family convention of the model that
//! supplies `Gamma`; see the individual models.

pub mod boundary;

pub use boundary::{
    green_identity_residual, line_boundary_residual, point_boundary_residual, BoundaryReport, DomainElement,
    GreenIdentityTerms, SineSeries, SmoothPart,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    c, hermitian_part, hermitian_residual, projector_onto, range_basis, singular_values, solve_linear, CMatrix,
    CVector, NumericError,
};
use crate::serde_util::{matrix_from_repr, matrix_to_repr, MatrixRepr};

/// Residual tolerance for the `(Pi, Theta)` invariants, scaled by `1 + ||.||_F`.
pub const PARAMS_TOL: f64 = 1e-12;
/// Relative singularity threshold for membership in `Z_{Pi,Theta}`.
pub const Z_SINGULAR_TOL: f64 = 1e-12;

/// Residuals of the `(Pi, Theta)` invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `||Pi^2 - Pi||_F`
    pub idempotence: f64,
    /// `||Pi - Pi*||_F`
    pub projector_selfadjoint: f64,
    /// `||Theta - Theta*||_F`
    pub theta_selfadjoint: f64,
    /// `||Pi Theta Pi - Theta||_F`
    pub theta_in_range: f64,
    pub pi_tol: f64,
    pub theta_tol: f64,
    pub passed: bool,
}

impl ValidationReport {
    /// Names of the violated invariants.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.idempotence > self.pi_tol {
            out.push("projector_idempotence");
        }
        if self.projector_selfadjoint > self.pi_tol {
            out.push("projector_selfadjoint");
        }
        if self.theta_selfadjoint > self.theta_tol {
            out.push("theta_selfadjoint");
        }
        if self.theta_in_range > self.theta_tol {
            out.push("theta_in_range");
        }
        out
    }
}

/// Check the `(Pi, Theta)` invariants on raw matrices.
pub fn validate_params(pi: &CMatrix, theta: &CMatrix) -> Result<ValidationReport> {
    let n = pi.nrows();
    if !pi.is_square() {
        return Err(NumericError::NotSquare {
            rows: pi.nrows(),
            cols: pi.ncols(),
        }
        .into());
    }
    if theta.nrows() != n || theta.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: theta.nrows().max(theta.ncols()),
        });
    }
    let idempotence = (pi * pi - pi).norm();
    let projector_selfadjoint = hermitian_residual(pi);
    let theta_selfadjoint = hermitian_residual(theta);
    let theta_in_range = (pi * theta * pi - theta).norm();
    let pi_tol = PARAMS_TOL * (1.0 + pi.norm());
    let theta_tol = PARAMS_TOL * (1.0 + theta.norm());
    let passed = idempotence <= pi_tol
        && projector_selfadjoint <= pi_tol
        && theta_selfadjoint <= theta_tol
        && theta_in_range <= theta_tol;
    Ok(ValidationReport {
        idempotence,
        projector_selfadjoint,
        theta_selfadjoint,
        theta_in_range,
        pi_tol,
        theta_tol,
        passed,
    })
}

/// A validated extension label `(Pi, Theta)` with `Theta` embedded in C^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct ExtensionParams {
    pi: CMatrix,
    theta: CMatrix,
    /// Orthonormal basis of `range(Pi)`, n x k.
    range: CMatrix,
    /// `range* Theta range`, k x k.
    theta_block: CMatrix,
}

impl ExtensionParams {
    pub fn new(pi: CMatrix, theta: CMatrix) -> Result<Self> {
        let report = validate_params(&pi, &theta)?;
        if !report.passed {
            return Err(Error::InvalidParams(format!(
                "violated {:?} (idempotence {:.2e}, projector self-adjointness {:.2e}, theta self-adjointness {:.2e}, theta range {:.2e})",
                report.violations(),
                report.idempotence,
                report.projector_selfadjoint,
                report.theta_selfadjoint,
                report.theta_in_range
            )));
        }
        let pi = hermitian_part(&pi);
        let theta = hermitian_part(&theta);
        let range = range_basis(&pi);
        let theta_block = hermitian_part(&(range.adjoint() * &theta * &range));
        Ok(Self {
            pi,
            theta,
            range,
            theta_block,
        })
    }

    /// Build from an orthonormal basis `q` (n x k) of `range(Pi)` and a
    /// Hermitian k x k block.
    pub fn from_range(q: &CMatrix, theta_block: &CMatrix) -> Result<Self> {
        if theta_block.nrows() != q.ncols() || theta_block.ncols() != q.ncols() {
            return Err(Error::DimensionMismatch {
                expected: q.ncols(),
                found: theta_block.nrows(),
            });
        }
        let pi = projector_onto(q);
        let theta = q * theta_block * q.adjoint();
        Self::new(pi, theta)
    }

    /// `Pi = 0`: the reference operator itself.
    pub fn reference(n: usize) -> Self {
        Self::new(CMatrix::zeros(n, n), CMatrix::zeros(n, n)).expect("zero params are valid")
    }

    /// `Pi = 1` with the given Hermitian `Theta`.
    pub fn full(theta: CMatrix) -> Result<Self> {
        let n = theta.nrows();
        Self::new(CMatrix::identity(n, n), theta)
    }

    /// `Pi = 1`, `Theta = theta * 1`.
    pub fn scalar(n: usize, theta: f64) -> Self {
        Self::full(CMatrix::identity(n, n).scale(theta)).expect("scalar params are valid")
    }

    pub fn dim(&self) -> usize {
        self.pi.nrows()
    }

    pub fn rank(&self) -> usize {
        self.range.ncols()
    }

    pub fn pi(&self) -> &CMatrix {
        &self.pi
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    pub fn range_basis(&self) -> &CMatrix {
        &self.range
    }

    pub fn theta_block(&self) -> &CMatrix {
        &self.theta_block
    }

    /// Orthonormal basis of `Ker(Pi)`.
    pub fn kernel_basis(&self) -> CMatrix {
        crate::numeric::complement_basis(&self.range, self.dim())
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    pi: MatrixRepr,
    theta: MatrixRepr,
}

impl TryFrom<ParamsRepr> for ExtensionParams {
    type Error = String;

    fn try_from(r: ParamsRepr) -> std::result::Result<Self, String> {
        let pi = matrix_from_repr(&r.pi)?;
        let theta = matrix_from_repr(&r.theta)?;
        ExtensionParams::new(pi, theta).map_err(|e| e.to_string())
    }
}

impl From<ExtensionParams> for ParamsRepr {
    fn from(p: ExtensionParams) -> Self {
        ParamsRepr {
            pi: matrix_to_repr(&p.pi),
            theta: matrix_to_repr(&p.theta),
        }
    }
}

/// What part of the real axis a model excludes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExclusionKind {
    /// Isolated eigenvalue of the reference operator (a pole of `Gamma`).
    Pole { at: f64 },
    /// Essential spectrum `(-inf, edge]`.
    HalfLine { edge: f64 },
}

/// An excluded real interval, already widened by its guard radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealExclusion {
    pub lo: f64,
    pub hi: f64,
    #[serde(flatten)]
    pub kind: ExclusionKind,
}

/// The analytic data of a model: boundary dimension, Weyl family and Gram
/// kernel, together with the excluded set of the reference operator.
pub trait WeylSystem: Send + Sync {
    fn dim(&self) -> usize;

    /// Fails with [`Error::Excluded`] for spectral points of the reference
    /// operator and their guard neighbourhoods.
    fn check_admissible(&self, z: Complex64) -> Result<()>;

    /// `Gamma(z)`, n x n.
    fn gamma(&self, z: Complex64) -> Result<CMatrix>;

    /// `G(conj w)^* G(z)`, n x n.
    fn gram(&self, z: Complex64, w: Complex64) -> Result<CMatrix>;

    /// Excluded subsets of the real axis meeting `[lo, hi]`, sorted by `lo`.
    fn real_exclusions(&self, lo: f64, hi: f64) -> Vec<RealExclusion>;

    /// Distance from a real point to the excluded set (zero inside it).
    fn distance_to_excluded(&self, lambda: f64) -> f64;
}

/// Models that can apply the free resolvent and gamma field to their own
/// representation of Hilbert-space elements.
pub trait ResolventModel: WeylSystem {
    type State: Clone + std::fmt::Debug;

    /// `R(z) psi`.
    fn free_resolvent(&self, z: Complex64, psi: &Self::State) -> Result<Self::State>;

    /// `G(z) zeta`, discretized like `like`.
    fn gamma_field(&self, z: Complex64, zeta: &CVector, like: &Self::State) -> Result<Self::State>;

    /// `G(conj z)^* psi`.
    fn gamma_field_adjoint(&self, z: Complex64, psi: &Self::State) -> Result<CVector>;

    /// `alpha a + beta b`.
    fn combine(&self, a: &Self::State, alpha: Complex64, b: &Self::State, beta: Complex64) -> Result<Self::State>;

    /// The norm the model uses for residual probes.
    fn state_norm(&self, s: &Self::State) -> f64;
}

fn check_dim<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams) -> Result<()> {
    if w.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: p.dim(),
        });
    }
    Ok(())
}

/// `Theta + Pi Gamma(z) Pi` compressed to an orthonormal basis of `range(Pi)`.
pub fn gamma_pi_theta<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams, z: Complex64) -> Result<CMatrix> {
    check_dim(w, p)?;
    let g = w.gamma(z)?;
    let q = p.range_basis();
    Ok(p.theta_block() + q.adjoint() * g * q)
}

fn is_numerically_real(z: Complex64) -> bool {
    z.im.abs() <= 1e-10 * (1.0 + z.norm())
}

/// Smallest singular value of the compressed `Gamma_{Pi,Theta}(z)` and the
/// membership threshold it is compared against.
pub fn z_margin<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams, z: Complex64) -> Result<(f64, f64)> {
    let m = gamma_pi_theta(w, p, z)?;
    if m.nrows() == 0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let s = singular_values(&m);
    Ok((*s.last().unwrap(), Z_SINGULAR_TOL * (1.0 + s[0])))
}

/// Whether `z` lies in `Z_{Pi,Theta}`.
///
/// Nonreal points always belong to the set; a numerical failure there is an
/// internal-consistency error rather than a `false`.
pub fn membership_z<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams, z: Complex64) -> Result<bool> {
    let (smin, threshold) = z_margin(w, p, z)?;
    let member = smin > threshold;
    if !member && !is_numerically_real(z) {
        return Err(Error::Internal(format!(
            "nonreal z = {z} rejected from Z_(Pi,Theta) with sigma_min {smin:.3e}"
        )));
    }
    Ok(member)
}

/// `Pi Gamma_{Pi,Theta}(z)^{-1} Pi`, embedded in C^n.
pub fn krein_correction<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams, z: Complex64) -> Result<CMatrix> {
    let m = gamma_pi_theta(w, p, z)?;
    let n = p.dim();
    if m.nrows() == 0 {
        return Ok(CMatrix::zeros(n, n));
    }
    let s = singular_values(&m);
    let smin = *s.last().unwrap();
    if smin <= Z_SINGULAR_TOL * (1.0 + s[0]) {
        if !is_numerically_real(z) {
            return Err(Error::Internal(format!(
                "nonreal z = {z} is extension-singular (sigma_min {smin:.3e})"
            )));
        }
        return Err(Error::ExtensionSingular { z, sigma_min: smin });
    }
    let k = m.nrows();
    let inv =
        solve_linear(&m, &CMatrix::identity(k, k)).map_err(|_| Error::ExtensionSingular { z, sigma_min: smin })?;
    let q = p.range_basis();
    Ok(q * inv * q.adjoint())
}

/// The pieces of one Krein resolvent application.
#[derive(Debug, Clone)]
pub struct ResolventOutput<S> {
    /// `R_{Pi,Theta}(z) psi`
    pub state: S,
    /// `R(z) psi`
    pub free: S,
    /// `G(z) C(z) G(conj z)^* psi`
    pub correction: S,
    /// Boundary coefficients `C(z) G(conj z)^* psi`.
    pub zeta: CVector,
    /// `sigma_min` of the compressed `Gamma_{Pi,Theta}(z)`.
    pub sigma_min: f64,
}

/// Apply the resolvent of the extension `(Pi, Theta)` at `z` to `psi`.
pub fn resolvent_apply<W: ResolventModel + ?Sized>(
    w: &W,
    p: &ExtensionParams,
    z: Complex64,
    psi: &W::State,
) -> Result<ResolventOutput<W::State>> {
    let (sigma_min, _) = z_margin(w, p, z)?;
    let corr_matrix = krein_correction(w, p, z)?;
    let free = w.free_resolvent(z, psi)?;
    let boundary = w.gamma_field_adjoint(z, psi)?;
    let zeta = &corr_matrix * boundary;
    let correction = w.gamma_field(z, &zeta, psi)?;
    let one = c(1.0, 0.0);
    let state = w.combine(&free, one, &correction, one)?;
    Ok(ResolventOutput {
        state,
        free,
        correction,
        zeta,
        sigma_min,
    })
}

/// `||(Gamma(z) - Gamma(v)) - (z - v) G(conj v)^* G(z)||_F`.
pub fn gamma_difference_residual<W: WeylSystem + ?Sized>(w: &W, z: Complex64, v: Complex64) -> Result<f64> {
    w.check_admissible(z)?;
    w.check_admissible(v)?;
    if z == v {
        return Ok(0.0);
    }
    let lhs = w.gamma(z)? - w.gamma(v)?;
    let rhs = w.gram(z, v)? * (z - v);
    Ok((lhs - rhs).norm())
}

/// `||Gamma(z)^* - Gamma(conj z)||_F`.
pub fn conjugation_residual<W: WeylSystem + ?Sized>(w: &W, z: Complex64) -> Result<f64> {
    let g = w.gamma(z)?;
    let gc = w.gamma(z.conj())?;
    Ok((g.adjoint() - gc).norm())
}
