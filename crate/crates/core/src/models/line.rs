//! Sampled functions on metric graphs (an interval is a one-edge graph) and
//! the uniform-grid quadrature used on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{c, CVector};

/// Minimum nodes per edge for resolvent quadrature.
pub const MIN_RESOLVENT_NODES: usize = 501;
/// Minimum nodes per edge for one-sided 4th-order endpoint derivatives.
pub const MIN_TRACE_NODES: usize = 5;

/// Uniform samples `values[j] = f(j * length / (nodes - 1))` on one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub length: f64,
    pub values: Vec<Complex64>,
}

impl EdgeSamples {
    pub fn sample(length: f64, nodes: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let h = length / (nodes - 1) as f64;
        let values = (0..nodes).map(|j| f(j as f64 * h)).collect();
        EdgeSamples { length, values }
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        self.length / (self.values.len() - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.step()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes()).map(move |j| self.x(j))
    }
}

/// A function on the edges of a graph, one sample array per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    pub edges: Vec<EdgeSamples>,
}

impl LineFunction {
    /// Sample `f(edge, x)` with `nodes` points per edge.
    pub fn sample(lengths: &[f64], nodes: usize, f: impl Fn(usize, f64) -> Complex64) -> Self {
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(k, &a)| EdgeSamples::sample(a, nodes, |x| f(k, x)))
            .collect();
        LineFunction { edges }
    }

    pub fn sup_norm(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.values.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn same_grid(&self, other: &LineFunction) -> bool {
        self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.length == b.length && a.nodes() == b.nodes())
    }

    /// `sum_k <self_k, other_k>` by composite Simpson, antilinear in `self`.
    pub fn inner(&self, other: &LineFunction) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                found: other.edges.len(),
            });
        }
        let mut acc = c(0.0, 0.0);
        for (a, b) in self.edges.iter().zip(&other.edges) {
            let prod: Vec<Complex64> = a.values.iter().zip(&b.values).map(|(u, v)| u.conj() * v).collect();
            acc += simpson(&prod, a.step())?;
        }
        Ok(acc)
    }
}

/// Composite Simpson on an odd number of uniform nodes.
pub fn simpson(f: &[Complex64], h: f64) -> Result<Complex64> {
    let n = f.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::GridTooCoarse(format!(
            "Simpson quadrature needs an odd node count >= 3, got {n}"
        )));
    }
    let mut odd = c(0.0, 0.0);
    let mut even = c(0.0, 0.0);
    for (j, &v) in f.iter().enumerate().take(n - 1).skip(1) {
        if j % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok((f[0] + f[n - 1] + odd * 4.0 + even * 2.0) * (h / 3.0))
}

/// Running integrals `F_j = int_0^{x_j} f`, Simpson at even nodes and a
/// quadratic one-panel rule at odd nodes.
pub fn cumulative_simpson(f: &[Complex64], h: f64) -> Result<Vec<Complex64>> {
    let n = f.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::GridTooCoarse(format!(
            "cumulative Simpson needs an odd node count >= 3, got {n}"
        )));
    }
    let mut out = vec![c(0.0, 0.0); n];
    let mut j = 2;
    while j < n {
        out[j] = out[j - 2] + (f[j - 2] + f[j - 1] * 4.0 + f[j]) * (h / 3.0);
        out[j - 1] = out[j - 2] + (f[j - 2] * 5.0 + f[j - 1] * 8.0 - f[j]) * (h / 12.0);
        j += 2;
    }
    Ok(out)
}

/// One-sided 4th-order derivative at the left end.
pub fn left_derivative(v: &[Complex64], h: f64) -> Complex64 {
    (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) / (12.0 * h)
}

/// One-sided 4th-order derivative at the right end.
pub fn right_derivative(v: &[Complex64], h: f64) -> Complex64 {
    let n = v.len();
    (v[n - 1] * 25.0 - v[n - 2] * 48.0 + v[n - 3] * 36.0 - v[n - 4] * 16.0 + v[n - 5] * 3.0) / (12.0 * h)
}

/// Endpoint traces `(rho, tau)` of a sampled graph function: per edge
/// `rho = (psi(0+), psi(a-))` and `tau = (psi'(0+), -psi'(a-))`.
pub fn sampled_traces(psi: &LineFunction) -> Result<(CVector, CVector)> {
    let k = psi.edges.len();
    let mut rho = CVector::zeros(2 * k);
    let mut tau = CVector::zeros(2 * k);
    for (e, edge) in psi.edges.iter().enumerate() {
        if edge.nodes() < MIN_TRACE_NODES {
            return Err(Error::GridTooCoarse(format!(
                "endpoint derivatives need at least {MIN_TRACE_NODES} nodes per edge, edge {e} has {}",
                edge.nodes()
            )));
        }
        let h = edge.step();
        rho[2 * e] = edge.values[0];
        rho[2 * e + 1] = *edge.values.last().unwrap();
        tau[2 * e] = left_derivative(&edge.values, h);
        tau[2 * e + 1] = -right_derivative(&edge.values, h);
    }
    Ok((rho, tau))
}

/// Endpoint traces of a closed-form graph function given value and derivative.
pub fn closed_form_traces(
    lengths: &[f64],
    value: impl Fn(usize, f64) -> Complex64,
    derivative: impl Fn(usize, f64) -> Complex64,
) -> (CVector, CVector) {
    let k = lengths.len();
    let mut rho = CVector::zeros(2 * k);
    let mut tau = CVector::zeros(2 * k);
    for (e, &a) in lengths.iter().enumerate() {
        rho[2 * e] = value(e, 0.0);
        rho[2 * e + 1] = value(e, a);
        tau[2 * e] = derivative(e, 0.0);
        tau[2 * e + 1] = -derivative(e, a);
    }
    (rho, tau)
}

/// Central second differences on interior nodes of each edge.
pub fn second_difference(psi: &LineFunction) -> Vec<Vec<Complex64>> {
    psi.edges
        .iter()
        .map(|e| {
            let h2 = e.step() * e.step();
            (1..e.nodes() - 1)
                .map(|j| (e.values[j - 1] - e.values[j] * 2.0 + e.values[j + 1]) / h2)
                .collect()
        })
        .collect()
}

/// Relative sup-norm residual of `(-u'' + z u) - f` on interior nodes.
pub fn helmholtz_residual(u: &LineFunction, z: Complex64, f: &LineFunction) -> f64 {
    let d2 = second_difference(u);
    let mut worst: f64 = 0.0;
    for (e, lap) in d2.iter().enumerate() {
        for (j, &uxx) in lap.iter().enumerate() {
            let r = -uxx + z * u.edges[e].values[j + 1] - f.edges[e].values[j + 1];
            worst = worst.max(r.norm());
        }
    }
    worst / f.sup_norm().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let e = EdgeSamples::sample(2.0, 11, |x| c(x * x * x - x, 0.0));
        let v = simpson(&e.values, e.step()).unwrap();
        assert_abs_diff_eq!(v.re, 4.0 - 2.0, epsilon = 1e-13);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let e = EdgeSamples::sample(PI, 401, |x| c(x.cos(), 0.0));
        let f = cumulative_simpson(&e.values, e.step()).unwrap();
        for (j, x) in e.positions().enumerate() {
            assert_abs_diff_eq!(f[j].re, x.sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn even_node_count_rejected() {
        assert!(simpson(&[c(1.0, 0.0); 4], 0.1).is_err());
    }

    #[test]
    fn traces_of_sine_and_constant() {
        let a = 2.0;
        let psi = LineFunction::sample(&[a], 201, |_, x| c((PI * x / a).sin(), 0.0));
        let (rho, tau) = sampled_traces(&psi).unwrap();
        assert_abs_diff_eq!(rho[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[1].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tau[0].re, PI / a, epsilon = 1e-7);
        assert_abs_diff_eq!(tau[1].re, PI / a, epsilon = 1e-7);

        let one = LineFunction::sample(&[a], 11, |_, _| c(1.0, 0.0));
        let (rho, tau) = sampled_traces(&one).unwrap();
        assert_eq!(rho[0], c(1.0, 0.0));
        assert_eq!(rho[1], c(1.0, 0.0));
        assert_abs_diff_eq!(tau.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coarse_grid_rejected_for_traces() {
        let psi = LineFunction::sample(&[1.0], 4, |_, _| c(1.0, 0.0));
        assert!(matches!(sampled_traces(&psi), Err(Error::GridTooCoarse(_))));
    }
}
