//! Point interactions in R^3, optionally with an internal (spin) degree of
//! freedom.
//!
//! With `s = sqrt(z)` on the principal branch (`Re s > 0` off `(-inf, 0]`),
//!
//! ```text
//! [G(z) zeta](x) = sum_k zeta_k exp(-s |x - y_k|) / (4 pi |x - y_k|)
//! Gamma_kk(z) = s / (4 pi),   Gamma_kj(z) = -exp(-s d_kj) / (4 pi d_kj)
//! ```
//!
//! With internal levels `b_1..b_d` every block `i` is the scalar model at
//! `z - b_i`; boundary index `i * n + k` is level `i`, center `k`.
//!
//! No 3D quadrature is done anywhere: states are finite combinations of
//! Green functions ([`GreenState`]) and every inner product reduces to the
//! closed-form Gram kernel.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::krein::{ExclusionKind, RealExclusion, ResolventModel, WeylSystem};
use crate::numeric::{c, cexpm1, principal_sqrt, CMatrix, CVector};

/// Minimum separation between centers.
pub const MIN_SEPARATION: f64 = 1e-9;
/// Refused margin above the essential-spectrum edge when scanning.
pub const EDGE_GUARD: f64 = 1e-8;

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub struct PointModel {
    centers: Vec<[f64; 3]>,
    dist: Vec<Vec<f64>>,
    levels: Vec<f64>,
}

/// The spin variant shares the implementation; it differs only in its levels.
pub type SpinPointModel = PointModel;

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl PointModel {
    pub fn new(centers: Vec<[f64; 3]>) -> Result<Self> {
        Self::with_levels(centers, vec![0.0])
    }

    /// Centers with internal levels `b` (the eigenvalues of the internal
    /// Hermitian operator).
    pub fn with_levels(centers: Vec<[f64; 3]>, levels: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidModel("need at least one center".into()));
        }
        if levels.is_empty() {
            return Err(Error::InvalidModel("need at least one internal level".into()));
        }
        if centers.iter().flatten().chain(&levels).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite center coordinate or level".into()));
        }
        let n = centers.len();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = distance(&centers[i], &centers[j]);
                    if d <= MIN_SEPARATION {
                        return Err(Error::InvalidModel(format!(
                            "centers {i} and {j} are {d:.3e} apart (minimum {MIN_SEPARATION:e})"
                        )));
                    }
                    dist[i][j] = d;
                }
            }
        }
        Ok(PointModel { centers, dist, levels })
    }

    pub fn centers(&self) -> &[[f64; 3]] {
        &self.centers
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn n_centers(&self) -> usize {
        self.centers.len()
    }

    pub fn separation(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    fn top_level(&self) -> f64 {
        self.levels.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Scalar block at shifted argument `u = z - b`.
    fn block_gamma(&self, u: Complex64) -> CMatrix {
        let n = self.n_centers();
        let s = principal_sqrt(u);
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                s / FOUR_PI
            } else {
                let d = self.dist[i][j];
                -(-s * d).exp() / (FOUR_PI * d)
            }
        })
    }

    /// `(Gamma(u) - Gamma(v)) / (u - v)` written without cancellation; the
    /// derivative at coincidence.
    fn block_gram(&self, u: Complex64, v: Complex64) -> CMatrix {
        let n = self.n_centers();
        let (su, sv) = (principal_sqrt(u), principal_sqrt(v));
        let sum = su + sv;
        let delta = su - sv;
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0 / (FOUR_PI * sum)
            } else {
                let d = self.dist[i][j];
                let x = -delta * d;
                // expm1(-delta d) / delta
                let ratio = if x.norm() < 1e-8 {
                    -d * (1.0 + x * 0.5)
                } else {
                    cexpm1(x) / delta
                };
                -(-sv * d).exp() * ratio / (FOUR_PI * d * sum)
            }
        })
    }

    fn shifts(&self, z: Complex64) -> impl Iterator<Item = Complex64> + '_ {
        self.levels.iter().map(move |&b| z - b)
    }

    fn on_cut(u: Complex64) -> bool {
        u.im == 0.0 && u.re <= 0.0
    }

    /// `[G(z) zeta](x)` per internal level.
    pub fn evaluate_green(&self, z: Complex64, zeta: &CVector, x: &[f64; 3]) -> Vec<Complex64> {
        let n = self.n_centers();
        self.shifts(z)
            .enumerate()
            .map(|(i, u)| {
                let s = principal_sqrt(u);
                (0..n)
                    .map(|k| {
                        let r = distance(x, &self.centers[k]);
                        zeta[i * n + k] * (-s * r).exp() / (FOUR_PI * r)
                    })
                    .sum()
            })
            .collect()
    }

    /// `psi_0(y_k)` for `psi = G(z) zeta` split as `psi_0 + G(0) zeta`.
    pub fn regular_part_at_centers(&self, z: Complex64, zeta: &CVector) -> CVector {
        let n = self.n_centers();
        let mut out = CVector::zeros(self.dim());
        for (i, u) in self.shifts(z).enumerate() {
            let s = principal_sqrt(u);
            for k in 0..n {
                let mut acc = -s / FOUR_PI * zeta[i * n + k];
                for j in (0..n).filter(|&j| j != k) {
                    let d = self.dist[k][j];
                    acc += zeta[i * n + j] * cexpm1(-s * d) / (FOUR_PI * d);
                }
                out[i * n + k] = acc;
            }
        }
        out
    }

    /// Renormalised trace `psi_0(y_k) + sum_{j != k} zeta_j / (4 pi d_kj)`
    /// of a state given in split form.
    pub fn tau0(&self, psi0_at_centers: &CVector, zeta: &CVector) -> Result<CVector> {
        let dim = self.dim();
        for v in [psi0_at_centers, zeta] {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let n = self.n_centers();
        let mut out = psi0_at_centers.clone();
        for i in 0..self.levels.len() {
            for k in 0..n {
                for j in (0..n).filter(|&j| j != k) {
                    out[i * n + k] += zeta[i * n + j] / (FOUR_PI * self.dist[k][j]);
                }
            }
        }
        Ok(out)
    }

    /// Split data `(psi_0(y), zeta)` of a Green-function combination.
    pub fn split(&self, psi: &GreenState) -> (CVector, CVector) {
        let dim = self.dim();
        let mut psi0 = CVector::zeros(dim);
        let mut zeta = CVector::zeros(dim);
        for (w, xi) in &psi.terms {
            psi0 += self.regular_part_at_centers(*w, xi);
            zeta += xi;
        }
        (psi0, zeta)
    }

    /// Renormalised trace of a Green-function combination.
    pub fn tau0_of_state(&self, psi: &GreenState) -> Result<CVector> {
        let (psi0, zeta) = self.split(psi);
        self.tau0(&psi0, &zeta)
    }

    /// Pointwise values of a state, one entry per internal level.
    pub fn evaluate(&self, psi: &GreenState, x: &[f64; 3]) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); self.levels.len()];
        for (w, xi) in &psi.terms {
            for (o, v) in out.iter_mut().zip(self.evaluate_green(*w, xi, x)) {
                *o += v;
            }
        }
        out
    }

    /// `<a, b>` in L^2(R^3) (tensor C^d).
    pub fn inner(&self, a: &GreenState, b: &GreenState) -> Result<Complex64> {
        let mut acc = c(0.0, 0.0);
        for (wa, xa) in &a.terms {
            for (wb, xb) in &b.terms {
                // G(wa)^* G(wb) = gram(wb, conj wa)
                let g = self.gram(*wb, wa.conj())?;
                acc += (xa.adjoint() * g * xb)[(0, 0)];
            }
        }
        Ok(acc)
    }
}

/// `sum_t G(w_t) xi_t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GreenState {
    pub terms: Vec<(Complex64, CVector)>,
}

impl GreenState {
    pub fn single(w: Complex64, xi: CVector) -> Self {
        GreenState { terms: vec![(w, xi)] }
    }

    fn push(&mut self, w: Complex64, xi: CVector) {
        if let Some((_, acc)) = self.terms.iter_mut().find(|(v, _)| *v == w) {
            *acc += xi;
        } else {
            self.terms.push((w, xi));
        }
    }
}

impl WeylSystem for PointModel {
    fn dim(&self) -> usize {
        self.centers.len() * self.levels.len()
    }

    fn check_admissible(&self, z: Complex64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) || self.shifts(z).any(Self::on_cut) {
            return Err(Error::Excluded { z });
        }
        Ok(())
    }

    fn gamma(&self, z: Complex64) -> Result<CMatrix> {
        self.check_admissible(z)?;
        let blocks: Vec<CMatrix> = self.shifts(z).map(|u| self.block_gamma(u)).collect();
        Ok(crate::numeric::block_diag(&blocks))
    }

    fn gram(&self, z: Complex64, w: Complex64) -> Result<CMatrix> {
        self.check_admissible(z)?;
        self.check_admissible(w)?;
        let blocks: Vec<CMatrix> = self.levels.iter().map(|&b| self.block_gram(z - b, w - b)).collect();
        Ok(crate::numeric::block_diag(&blocks))
    }

    fn real_exclusions(&self, lo: f64, _hi: f64) -> Vec<RealExclusion> {
        let edge = self.top_level();
        if lo > edge + EDGE_GUARD {
            return Vec::new();
        }
        vec![RealExclusion {
            lo: lo.min(edge),
            hi: edge + EDGE_GUARD,
            kind: ExclusionKind::HalfLine { edge },
        }]
    }

    fn distance_to_excluded(&self, lambda: f64) -> f64 {
        (lambda - self.top_level()).max(0.0)
    }
}

impl ResolventModel for PointModel {
    type State = GreenState;

    /// `R(z) G(w) xi = (G(z) xi - G(w) xi) / (w - z)`.
    fn free_resolvent(&self, z: Complex64, psi: &GreenState) -> Result<GreenState> {
        self.check_admissible(z)?;
        let mut out = GreenState::default();
        for (w, xi) in &psi.terms {
            if *w == z {
                return Err(Error::Unsupported(format!(
                    "R(z) G(z) needs the derivative of G at z = {z}"
                )));
            }
            let f = 1.0 / (*w - z);
            out.push(z, xi * f);
            out.push(*w, xi * -f);
        }
        Ok(out)
    }

    fn gamma_field(&self, z: Complex64, zeta: &CVector, _like: &GreenState) -> Result<GreenState> {
        self.check_admissible(z)?;
        if zeta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: zeta.len(),
            });
        }
        Ok(GreenState::single(z, zeta.clone()))
    }

    /// `G(conj z)^* G(w) xi = gram(w, z) xi`.
    fn gamma_field_adjoint(&self, z: Complex64, psi: &GreenState) -> Result<CVector> {
        let mut out = CVector::zeros(self.dim());
        for (w, xi) in &psi.terms {
            out += self.gram(*w, z)? * xi;
        }
        Ok(out)
    }

    fn combine(&self, a: &GreenState, alpha: Complex64, b: &GreenState, beta: Complex64) -> Result<GreenState> {
        let mut out = GreenState::default();
        for (w, xi) in &a.terms {
            out.push(*w, xi * alpha);
        }
        for (w, xi) in &b.terms {
            out.push(*w, xi * beta);
        }
        Ok(out)
    }

    /// L^2 norm.
    fn state_norm(&self, s: &GreenState) -> f64 {
        self.inner(s, s).map(|v| v.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
    }
}
