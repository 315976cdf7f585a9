//! The Laplacian `d^2/dx^2` on `(0, a)` with Dirichlet reference domain.
//!
//! Boundary maps: `rho psi = (psi(0+), psi(a-))`, `tau psi = (psi'(0+), -psi'(a-))`.
//! The Weyl family is `Gamma(z) = -tau G(z)`, so with `k = sqrt(-z)`
//!
//! ```text
//! Gamma(z) = k / sin(ka) [[cos(ka), -1], [-1, cos(ka)]],   Gamma(0) = (1/a) [[1, -1], [-1, 1]]
//! ```
//!
//! and `(Pi, Theta)` encodes the boundary condition `rho psi in range(Pi)`,
//! `Pi tau psi = Theta rho psi`. All kernels are even in `k`; the code picks
//! the root with `Im k >= 0` and writes every ratio of sines through
//! `exp(2ik.)` so nothing overflows for complex `z`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::krein::{ExclusionKind, RealExclusion};
use crate::numeric::{c, cexpm1, CMatrix};

use super::line::{cumulative_simpson, simpson, EdgeSamples, MIN_RESOLVENT_NODES};

/// Relative width of the refused neighbourhood around each Dirichlet point,
/// in units of the local pole spacing.
pub const POLE_GUARD: f64 = 1e-8;
/// Default quadrature density for Gram matrices.
pub const DEFAULT_NODES_PER_UNIT: usize = 2001;
/// Largest `Im(k) a` for which the free resolvent is evaluated.
pub const MAX_GROWTH: f64 = 300.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalModel {
    a: f64,
    quad_nodes: usize,
}

/// `sqrt(-z)` normalised to `Im k >= 0`.
pub fn wavenumber(z: Complex64) -> Complex64 {
    let k = (-z).sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        -k
    } else {
        k
    }
}

fn odd_nodes_for(a: f64, per_unit: usize) -> usize {
    let n = ((per_unit - 1) as f64 * a).ceil().max(2.0) as usize + 1;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

impl IntervalModel {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidModel(format!(
                "interval length must be positive, got {a}"
            )));
        }
        Ok(IntervalModel {
            a,
            quad_nodes: odd_nodes_for(a, DEFAULT_NODES_PER_UNIT),
        })
    }

    /// Override the total number of Simpson nodes used for Gram matrices.
    pub fn with_quadrature_nodes(mut self, nodes: usize) -> Result<Self> {
        if nodes < 3 || nodes.is_multiple_of(2) {
            return Err(Error::GridTooCoarse(format!(
                "quadrature needs an odd node count >= 3, got {nodes}"
            )));
        }
        self.quad_nodes = nodes;
        Ok(self)
    }

    pub fn length(&self) -> f64 {
        self.a
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.quad_nodes
    }

    /// `-(n pi / a)^2`, the n-th Dirichlet eigenvalue of `d^2/dx^2`.
    pub fn dirichlet_point(&self, n: usize) -> f64 {
        let t = n as f64 * PI / self.a;
        -t * t
    }

    fn guard(&self, n: usize) -> f64 {
        let base = (PI / self.a).powi(2);
        POLE_GUARD * (2 * n + 1) as f64 * base
    }

    fn nearby_poles(&self, re: f64) -> impl Iterator<Item = usize> {
        let t = (self.a * (-re).max(0.0).sqrt() / PI).floor() as usize;
        (t.saturating_sub(1)..=t + 1).filter(|&n| n >= 1)
    }

    pub fn check_admissible(&self, z: Complex64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Excluded { z });
        }
        for n in self.nearby_poles(z.re) {
            if (z - self.dirichlet_point(n)).norm() < self.guard(n) {
                return Err(Error::Excluded { z });
            }
        }
        Ok(())
    }

    /// `sin(k u) / sin(k a)`.
    fn sin_ratio(&self, k: Complex64, u: f64) -> Complex64 {
        if k == c(0.0, 0.0) {
            return c(u / self.a, 0.0);
        }
        (I * k * (self.a - u)).exp() * cexpm1(2.0 * I * k * u) / cexpm1(2.0 * I * k * self.a)
    }

    /// `[G(z) zeta](x)`.
    pub fn gamma_field_at(&self, z: Complex64, zeta: (Complex64, Complex64), x: f64) -> Complex64 {
        let k = wavenumber(z);
        self.sin_ratio(k, self.a - x) * zeta.0 + self.sin_ratio(k, x) * zeta.1
    }

    /// `d/dx [G(z) zeta](x)`.
    pub fn gamma_field_derivative_at(&self, z: Complex64, zeta: (Complex64, Complex64), x: f64) -> Complex64 {
        let k = wavenumber(z);
        if k == c(0.0, 0.0) {
            return (zeta.1 - zeta.0) / self.a;
        }
        // k cos(ku) / sin(ka) = k (e^{ik(u-a)} + e^{-ik(u+a)}) ... written with Im k >= 0.
        let dcos = |u: f64| {
            let num = (I * k * (self.a - u)).exp() * (cexpm1(2.0 * I * k * u) + 2.0);
            k * I * num / cexpm1(2.0 * I * k * self.a)
        };
        -dcos(self.a - x) * zeta.0 + dcos(x) * zeta.1
    }

    pub fn gamma(&self, z: Complex64) -> Result<CMatrix> {
        self.check_admissible(z)?;
        let (d, o) = if z == c(0.0, 0.0) {
            (c(1.0 / self.a, 0.0), c(-1.0 / self.a, 0.0))
        } else {
            let k = wavenumber(z);
            let em = cexpm1(2.0 * I * k * self.a);
            let diag = I * k * (em + 2.0) / em;
            let off = -2.0 * I * k * (I * k * self.a).exp() / em;
            (diag, off)
        };
        Ok(CMatrix::from_row_slice(2, 2, &[d, o, o, d]))
    }

    /// `G(conj w)^* G(z)` by composite Simpson on `quadrature_nodes` points.
    pub fn gram(&self, z: Complex64, w: Complex64) -> Result<CMatrix> {
        self.check_admissible(z)?;
        self.check_admissible(w)?;
        let n = self.quad_nodes;
        let h = self.a / (n - 1) as f64;
        let (kz, kw) = (wavenumber(z), wavenumber(w));
        let mut g = CMatrix::zeros(2, 2);
        let basis = |k: Complex64, j: usize, x: f64| {
            if j == 0 {
                self.sin_ratio(k, self.a - x)
            } else {
                self.sin_ratio(k, x)
            }
        };
        for r in 0..2 {
            for s in 0..2 {
                let f: Vec<Complex64> = (0..n)
                    .map(|i| {
                        let x = i as f64 * h;
                        basis(kw, r, x) * basis(kz, s, x)
                    })
                    .collect();
                g[(r, s)] = simpson(&f, h)?;
            }
        }
        Ok(g)
    }

    pub fn real_exclusions(&self, lo: f64, hi: f64) -> Vec<RealExclusion> {
        if hi >= 0.0 && lo >= 0.0 {
            return Vec::new();
        }
        let n_lo = (self.a * (-hi).max(0.0).sqrt() / PI).floor() as usize;
        let n_hi = (self.a * (-lo).max(0.0).sqrt() / PI).ceil() as usize + 1;
        (n_lo.max(1)..=n_hi)
            .filter_map(|n| {
                let p = self.dirichlet_point(n);
                let g = self.guard(n);
                (p + g >= lo && p - g <= hi).then_some(RealExclusion {
                    lo: p - g,
                    hi: p + g,
                    kind: ExclusionKind::Pole { at: p },
                })
            })
            .collect()
    }

    pub fn distance_to_excluded(&self, lambda: f64) -> f64 {
        self.nearby_poles(lambda)
            .map(|n| (lambda - self.dirichlet_point(n)).abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn check_samples(&self, psi: &EdgeSamples, min_nodes: usize) -> Result<()> {
        if (psi.length - self.a).abs() > 1e-12 * self.a {
            return Err(Error::InvalidModel(format!(
                "samples span length {} but the edge has length {}",
                psi.length, self.a
            )));
        }
        if psi.nodes() < min_nodes || psi.nodes().is_multiple_of(2) {
            return Err(Error::GridTooCoarse(format!(
                "need an odd number of at least {min_nodes} nodes per edge, got {}",
                psi.nodes()
            )));
        }
        Ok(())
    }

    /// `R(z) psi` on one edge.
    pub fn free_resolvent_edge(&self, z: Complex64, psi: &EdgeSamples) -> Result<EdgeSamples> {
        self.check_admissible(z)?;
        self.check_samples(psi, MIN_RESOLVENT_NODES)?;
        let k = wavenumber(z);
        if k.im * self.a > MAX_GROWTH {
            return Err(Error::Unsupported(format!(
                "free resolvent at z = {z}: Im(sqrt(-z)) a = {:.1} exceeds {MAX_GROWTH}",
                k.im * self.a
            )));
        }
        let sinc = |y: f64| -> Complex64 {
            let w = k * y;
            if w.norm() < 1e-4 {
                let w2 = w * w;
                y * (1.0 - w2 / 6.0 + w2 * w2 / 120.0)
            } else {
                w.sin() / k
            }
        };
        let h = psi.step();
        let n = psi.nodes();
        let xs: Vec<f64> = psi.positions().collect();
        let f1: Vec<Complex64> = xs.iter().zip(&psi.values).map(|(&x, &v)| sinc(x) * v).collect();
        let mut f2: Vec<Complex64> = xs
            .iter()
            .zip(&psi.values)
            .map(|(&x, &v)| sinc(self.a - x) * v)
            .collect();
        let left = cumulative_simpson(&f1, h)?;
        f2.reverse();
        let mut right = cumulative_simpson(&f2, h)?;
        right.reverse();
        let values = (0..n)
            .map(|j| self.sin_ratio(k, self.a - xs[j]) * left[j] + self.sin_ratio(k, xs[j]) * right[j])
            .collect();
        Ok(EdgeSamples { length: self.a, values })
    }

    /// `G(z) zeta` sampled on the grid of `like`.
    pub fn gamma_field_edge(
        &self,
        z: Complex64,
        zeta: (Complex64, Complex64),
        like: &EdgeSamples,
    ) -> Result<EdgeSamples> {
        self.check_admissible(z)?;
        self.check_samples(like, 3)?;
        let values = like.positions().map(|x| self.gamma_field_at(z, zeta, x)).collect();
        Ok(EdgeSamples { length: self.a, values })
    }

    /// `G(conj z)^* psi` on one edge.
    pub fn gamma_field_adjoint_edge(&self, z: Complex64, psi: &EdgeSamples) -> Result<(Complex64, Complex64)> {
        self.check_admissible(z)?;
        self.check_samples(psi, 3)?;
        let k = wavenumber(z);
        let h = psi.step();
        let xs: Vec<f64> = psi.positions().collect();
        let f1: Vec<Complex64> = xs
            .iter()
            .zip(&psi.values)
            .map(|(&x, &v)| self.sin_ratio(k, self.a - x) * v)
            .collect();
        let f2: Vec<Complex64> = xs
            .iter()
            .zip(&psi.values)
            .map(|(&x, &v)| self.sin_ratio(k, x) * v)
            .collect();
        Ok((simpson(&f1, h)?, simpson(&f2, h)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gamma_zero_is_exact() {
        for a in [1.0, 2.0, PI] {
            let m = IntervalModel::new(a).unwrap();
            let g = m.gamma(c(0.0, 0.0)).unwrap();
            let expected = CMatrix::from_row_slice(
                2,
                2,
                &[c(1.0 / a, 0.0), c(-1.0 / a, 0.0), c(-1.0 / a, 0.0), c(1.0 / a, 0.0)],
            );
            assert!((g - expected).norm() <= 1e-15);
        }
        let g = IntervalModel::new(2.0).unwrap().gamma(c(0.0, 0.0)).unwrap();
        assert_eq!(g[(0, 0)], c(0.5, 0.0));
        assert_eq!(g[(0, 1)], c(-0.5, 0.0));
    }

    #[test]
    fn gamma_at_one_hyperbolic() {
        let m = IntervalModel::new(PI).unwrap();
        let g = m.gamma(c(1.0, 0.0)).unwrap();
        let coth = 1.0 / PI.tanh();
        let csch = 1.0 / PI.sinh();
        assert_abs_diff_eq!((g[(0, 0)] - c(coth, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((g[(0, 1)] - c(-csch, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[(0, 0)].re, 1.003742, epsilon = 1e-6);
        assert_abs_diff_eq!(g[(0, 1)].re, -0.086589, epsilon = 1e-6);
    }

    #[test]
    fn gamma_matches_trig_form_off_axis() {
        let m = IntervalModel::new(1.3).unwrap();
        for z in [c(2.0, 3.0), c(-7.0, 0.5), c(-30.0, 0.0), c(0.3, -0.2)] {
            let k = (-z).sqrt();
            let a = 1.3;
            let d = k * (k * a).cos() / (k * a).sin();
            let o = -k / (k * a).sin();
            let g = m.gamma(z).unwrap();
            assert_abs_diff_eq!((g[(0, 0)] - d).norm(), 0.0, epsilon = 1e-12 * (1.0 + d.norm()));
            assert_abs_diff_eq!((g[(0, 1)] - o).norm(), 0.0, epsilon = 1e-12 * (1.0 + o.norm()));
        }
    }

    #[test]
    fn poles_are_refused() {
        let m = IntervalModel::new(PI).unwrap();
        assert!(matches!(m.gamma(c(-4.0, 0.0)), Err(Error::Excluded { .. })));
        assert!(matches!(m.gamma(c(-1.0 + 1e-10, 0.0)), Err(Error::Excluded { .. })));
        assert!(m.gamma(c(-1.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn gamma_field_zero_branch() {
        let m = IntervalModel::new(2.0).unwrap();
        for x in [0.0, 0.5, 1.3, 2.0] {
            let v = m.gamma_field_at(c(0.0, 0.0), (c(1.0, 0.0), c(0.0, 0.0)), x);
            assert_abs_diff_eq!((v - c((2.0 - x) / 2.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
            let one = m.gamma_field_at(c(0.0, 0.0), (c(1.0, 0.0), c(1.0, 0.0)), x);
            assert_abs_diff_eq!((one - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gamma_field_derivative_matches_difference() {
        let m = IntervalModel::new(1.7).unwrap();
        let z = c(-3.0, 2.0);
        let zeta = (c(0.4, -1.0), c(1.2, 0.3));
        for x in [0.1, 0.8, 1.6] {
            let h = 1e-5;
            let fd = (m.gamma_field_at(z, zeta, x + h) - m.gamma_field_at(z, zeta, x - h)) / (2.0 * h);
            let d = m.gamma_field_derivative_at(z, zeta, x);
            assert_abs_diff_eq!((fd - d).norm(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn exclusions_cover_window() {
        let m = IntervalModel::new(PI).unwrap();
        let ex = m.real_exclusions(-10.0, 0.5);
        let at: Vec<f64> = ex
            .iter()
            .map(|e| match e.kind {
                ExclusionKind::Pole { at } => at,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(at.len(), 3);
        for (got, want) in at.iter().zip([-1.0, -4.0, -9.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(m.real_exclusions(0.0, 5.0).is_empty());
    }
}
