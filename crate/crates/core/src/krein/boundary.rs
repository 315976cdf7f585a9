//! Boundary conditions and the boundary-triple Green identity.
//!
//! Elements of the adjoint domain are handled in split form
//! `phi = phi_* + G_* zeta` with `phi_*` in the reference domain and
//! `G_* = (G(i) + G(-i)) / 2`. The split is always supplied by the caller.
//!
//! Inner products are antilinear in the first slot. In that convention the
//! identity that holds is
//!
//! ```text
//! <phi, S* psi> - <S* phi, psi> = (tau phi_*, xi) - (zeta, tau psi_*)
//! ```

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krein::ExtensionParams;
use crate::models::line::{simpson, EdgeSamples};
use crate::models::LineModel;
use crate::numeric::{c, CMatrix, CVector};

/// A closed-form function on the edges of a line model, with two derivatives.
pub trait SmoothPart: Send + Sync {
    fn value(&self, edge: usize, x: f64) -> Complex64;
    fn d1(&self, edge: usize, x: f64) -> Complex64;
    fn d2(&self, edge: usize, x: f64) -> Complex64;
}

/// `sum_m coeffs[edge][m] sin((m + 1) pi x / a_edge)`: vanishes at every
/// endpoint, hence lies in the Dirichlet reference domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSeries {
    pub lengths: Vec<f64>,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl SineSeries {
    fn terms(&self, edge: usize) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        let a = self.lengths[edge];
        self.coeffs[edge]
            .iter()
            .enumerate()
            .map(move |(m, &cm)| ((m + 1) as f64 * std::f64::consts::PI / a, cm))
    }
}

impl SmoothPart for SineSeries {
    fn value(&self, edge: usize, x: f64) -> Complex64 {
        self.terms(edge).map(|(k, cm)| cm * (k * x).sin()).sum()
    }

    fn d1(&self, edge: usize, x: f64) -> Complex64 {
        self.terms(edge).map(|(k, cm)| cm * (k * (k * x).cos())).sum()
    }

    fn d2(&self, edge: usize, x: f64) -> Complex64 {
        self.terms(edge).map(|(k, cm)| cm * (-k * k * (k * x).sin())).sum()
    }
}

/// `phi_* + G_* zeta`.
pub struct DomainElement<'a> {
    pub smooth: &'a dyn SmoothPart,
    pub zeta: CVector,
}

impl DomainElement<'_> {
    /// `tau phi_*`, from the closed-form derivatives.
    pub fn tau_smooth(&self, lengths: &[f64]) -> CVector {
        let mut t = CVector::zeros(2 * lengths.len());
        for (e, &a) in lengths.iter().enumerate() {
            t[2 * e] = self.smooth.d1(e, 0.0);
            t[2 * e + 1] = -self.smooth.d1(e, a);
        }
        t
    }
}

/// The two sides of the Green identity and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenIdentityTerms {
    /// `<phi, S* psi> - <S* phi, psi>` by quadrature.
    #[serde(with = "crate::serde_util::complex")]
    pub interior: Complex64,
    /// `(beta2 phi, beta1 psi) - (beta1 phi, beta2 psi)`.
    #[serde(with = "crate::serde_util::complex")]
    pub boundary: Complex64,
    pub residual: f64,
}

fn dot(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Samples of `phi` and `S* phi` on one edge.
fn sample_edge<M: LineModel + ?Sized>(
    m: &M,
    el: &DomainElement<'_>,
    edge: usize,
    nodes: usize,
) -> (EdgeSamples, EdgeSamples) {
    let seg = &m.edge_list()[edge];
    let zeta = (el.zeta[2 * edge], el.zeta[2 * edge + 1]);
    let (ip, im) = (c(0.0, 1.0), c(0.0, -1.0));
    let a = seg.length();
    let phi = EdgeSamples::sample(a, nodes, |x| {
        let gs = (seg.gamma_field_at(ip, zeta, x) + seg.gamma_field_at(im, zeta, x)) * 0.5;
        el.smooth.value(edge, x) + gs
    });
    // S* acts as d^2/dx^2 and G(z) zeta solves u'' = z u.
    let sphi = EdgeSamples::sample(a, nodes, |x| {
        let gs = (seg.gamma_field_at(ip, zeta, x) - seg.gamma_field_at(im, zeta, x)) * c(0.0, 0.5);
        el.smooth.d2(edge, x) + gs
    });
    (phi, sphi)
}

/// `|<phi, S* psi> - <S* phi, psi> - [(beta2 phi, beta1 psi) - (beta1 phi, beta2 psi)]|`
/// with `beta1 = zeta` and `beta2 = tau phi_*`, by Simpson on `nodes` points per edge.
pub fn green_identity_residual<M: LineModel + ?Sized>(
    m: &M,
    phi: &DomainElement<'_>,
    psi: &DomainElement<'_>,
    nodes: usize,
) -> Result<GreenIdentityTerms> {
    let n = m.dim();
    for z in [&phi.zeta, &psi.zeta] {
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: z.len(),
            });
        }
    }
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(Error::GridTooCoarse(format!(
            "Green identity quadrature needs an odd node count >= 3, got {nodes}"
        )));
    }
    let mut interior = c(0.0, 0.0);
    for e in 0..m.edge_list().len() {
        let (f, sf) = sample_edge(m, phi, e, nodes);
        let (g, sg) = sample_edge(m, psi, e, nodes);
        let h = f.step();
        let a: Vec<Complex64> = f.values.iter().zip(&sg.values).map(|(u, v)| u.conj() * v).collect();
        let b: Vec<Complex64> = sf.values.iter().zip(&g.values).map(|(u, v)| u.conj() * v).collect();
        interior += simpson(&a, h)? - simpson(&b, h)?;
    }
    let lengths = m.edge_lengths();
    let boundary = dot(&phi.tau_smooth(&lengths), &psi.zeta) - dot(&phi.zeta, &psi.tau_smooth(&lengths));
    Ok(GreenIdentityTerms {
        interior,
        boundary,
        residual: (interior - boundary).norm(),
    })
}

/// Residuals of a boundary condition encoded by `(Pi, Theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryReport {
    /// `||(1 - Pi) rho psi||` or `||(1 - Pi) zeta||`.
    pub range: f64,
    /// `||Pi tau psi - Theta rho psi||` or `||Pi tau0 psi - Theta zeta||`.
    pub condition: f64,
}

impl BoundaryReport {
    pub fn max(&self) -> f64 {
        self.range.max(self.condition)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

fn complement(p: &ExtensionParams) -> CMatrix {
    CMatrix::identity(p.dim(), p.dim()) - p.pi()
}

fn check_len(p: &ExtensionParams, v: &CVector) -> Result<()> {
    if v.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Interval and graph form: `rho psi in range(Pi)`, `Pi tau psi = Theta rho psi`.
pub fn line_boundary_residual(p: &ExtensionParams, rho: &CVector, tau: &CVector) -> Result<BoundaryReport> {
    check_len(p, rho)?;
    check_len(p, tau)?;
    Ok(BoundaryReport {
        range: (complement(p) * rho).norm(),
        condition: (p.pi() * tau - p.theta() * rho).norm(),
    })
}

/// Point-interaction form: `zeta in range(Pi)`, `Pi tau0 psi = Theta zeta`.
pub fn point_boundary_residual(p: &ExtensionParams, tau0: &CVector, zeta: &CVector) -> Result<BoundaryReport> {
    check_len(p, tau0)?;
    check_len(p, zeta)?;
    Ok(BoundaryReport {
        range: (complement(p) * zeta).norm(),
        condition: (p.pi() * tau0 - p.theta() * zeta).norm(),
    })
}
