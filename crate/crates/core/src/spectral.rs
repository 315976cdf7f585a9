//! Point spectrum of an extension inside the resolvent set of the reference
//! operator: `lambda` is an eigenvalue iff the compressed
//! `Gamma_{Pi,Theta}(lambda)` is singular, and `G(lambda)` maps its kernel
//! onto the eigenspace.
//!
//! On real admissible `lambda` the compressed matrix is Hermitian with
//! derivative `Q* G(lambda)* G(lambda) Q > 0`, so every eigenvalue branch
//! increases strictly between poles. The number of negative eigenvalues is
//! therefore non-increasing on each admissible subinterval and drops by the
//! multiplicity exactly at the roots. The search brackets those drops,
//! bisects on the count and polishes with a Newton step on the branch
//! closest to zero.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krein::{
    gamma_pi_theta, line_boundary_residual, point_boundary_residual, BoundaryReport, ExtensionParams, RealExclusion,
    ResolventModel, WeylSystem,
};
use crate::models::line::{sampled_traces, LineFunction};
use crate::models::{GreenState, Model, PointModel};
use crate::numeric::{c, hermitian_eig, norm2, CMatrix, CVector};

/// Relative kernel threshold.
pub const KERNEL_TOL: f64 = 1e-10;
/// Roots closer than this are reported once.
pub const MERGE_TOL: f64 = 1e-9;
/// Limitation carried in every report.
pub const EMBEDDED_NOTE: &str =
    "eigenvalues of the extension embedded in the spectrum of the reference operator are not detected";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Scan nodes over the whole window.
    pub grid: usize,
    /// Bisection tolerance in `lambda`.
    pub tol: f64,
    /// If false, a window meeting the excluded set is an error.
    pub allow_gaps: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid: 2000,
            tol: 1e-12,
            allow_gaps: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    #[serde(serialize_with = "serialize_vectors")]
    pub null_basis: Vec<CVector>,
    pub sigma_min_at_lambda: f64,
    pub multiplicity: usize,
}

fn serialize_vectors<S: serde::Serializer>(v: &[CVector], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&crate::serde_util::vector_to_repr(x))?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub window: [f64; 2],
    pub eigenvalues: Vec<EigenResult>,
    /// Excluded subintervals of the window that were not searched.
    pub gaps: Vec<RealExclusion>,
    pub note: &'static str,
}

/// Admissible closed subintervals of `[lo, hi]` and the clipped gaps.
fn admissible_pieces<W: WeylSystem + ?Sized>(w: &W, lo: f64, hi: f64) -> (Vec<(f64, f64)>, Vec<RealExclusion>) {
    let mut gaps: Vec<RealExclusion> = w
        .real_exclusions(lo, hi)
        .into_iter()
        .filter(|e| e.hi >= lo && e.lo <= hi)
        .map(|mut e| {
            e.lo = e.lo.max(lo);
            e.hi = e.hi.min(hi);
            e
        })
        .collect();
    gaps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut pieces = Vec::new();
    let mut start = lo;
    for g in &gaps {
        if g.lo > start {
            pieces.push((start, g.lo));
        }
        start = start.max(g.hi);
    }
    if start < hi {
        pieces.push((start, hi));
    }
    // Endpoints sit on guard boundaries; nudge inward so they stay admissible.
    let pieces = pieces
        .into_iter()
        .filter_map(|(a, b)| {
            let eps = 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs()));
            let (a2, b2) = (a + eps, b - eps);
            (a2 < b2 && w.check_admissible(c(a2, 0.0)).is_ok() && w.check_admissible(c(b2, 0.0)).is_ok())
                .then_some((a2, b2))
        })
        .collect();
    (pieces, gaps)
}

/// Hermitian compressed matrix on the real axis.
fn compressed<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams, lambda: f64) -> Result<CMatrix> {
    let m = gamma_pi_theta(w, p, c(lambda, 0.0))?;
    Ok(crate::numeric::hermitian_part(&m))
}

fn negative_count<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams, lambda: f64) -> Result<usize> {
    let m = compressed(w, p, lambda)?;
    Ok(hermitian_eig(&m)?.values.iter().filter(|&&v| v < 0.0).count())
}

/// Roots of the count in `[a, b]` with `N(a) > N(b)`, as `(lambda, drop)`.
fn bisect<W: WeylSystem + ?Sized>(
    w: &W,
    p: &ExtensionParams,
    (a, na): (f64, usize),
    (b, nb): (f64, usize),
    tol: f64,
    out: &mut Vec<(f64, f64, f64, usize)>,
) -> Result<()> {
    if na <= nb {
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    if b - a <= tol || mid <= a || mid >= b {
        out.push((0.5 * (a + b), a, b, na - nb));
        return Ok(());
    }
    let nm = negative_count(w, p, mid)?;
    bisect(w, p, (a, na), (mid, nm), tol, out)?;
    bisect(w, p, (mid, nm), (b, nb), tol, out)
}

/// Eigenpairs of `M(lambda)` sorted by `|mu|`.
fn closest_to_zero(m: &CMatrix) -> Result<Vec<(f64, CVector)>> {
    let eig = hermitian_eig(m)?;
    let mut pairs: Vec<(f64, CVector)> = eig
        .values
        .iter()
        .enumerate()
        .map(|(j, &v)| (v, eig.vectors.column(j).into_owned()))
        .collect();
    pairs.sort_by(|x, y| x.0.abs().total_cmp(&y.0.abs()));
    Ok(pairs)
}

/// Newton on the branch closest to zero, kept inside the bracket.
fn polish<W: WeylSystem + ?Sized>(w: &W, p: &ExtensionParams, mut lambda: f64, a: f64, b: f64) -> Result<f64> {
    let q = p.range_basis();
    let mut best = (f64::INFINITY, lambda);
    for _ in 0..4 {
        let m = compressed(w, p, lambda)?;
        let pairs = closest_to_zero(&m)?;
        let (mu, v) = &pairs[0];
        if mu.abs() < best.0 {
            best = (mu.abs(), lambda);
        }
        if *mu == 0.0 {
            break;
        }
        let g = w.gram(c(lambda, 0.0), c(lambda, 0.0))?;
        let qv = q * v;
        let slope = (qv.adjoint() * g * &qv)[(0, 0)].re;
        if slope.is_nan() || slope <= 0.0 {
            break;
        }
        let next = lambda - mu / slope;
        if !(next > a && next < b) || next == lambda {
            break;
        }
        lambda = next;
    }
    Ok(best.1)
}

/// Search `[lo, hi]` for eigenvalues of the extension `(Pi, Theta)`.
pub fn eigenvalue_search<W: WeylSystem + ?Sized>(
    w: &W,
    p: &ExtensionParams,
    lo: f64,
    hi: f64,
    opts: &SearchOptions,
) -> Result<SpectrumReport> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidWindow(format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    if opts.grid < 2 || opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidWindow(format!(
            "grid must be >= 2 and tol positive (grid {}, tol {})",
            opts.grid, opts.tol
        )));
    }
    if w.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: p.dim(),
        });
    }
    let (pieces, gaps) = admissible_pieces(w, lo, hi);
    if !gaps.is_empty() && !opts.allow_gaps {
        return Err(Error::Unsearchable(format!(
            "[{lo}, {hi}] meets the excluded set in {} place(s)",
            gaps.len()
        )));
    }
    if pieces.is_empty() {
        return Err(Error::Unsearchable(format!(
            "[{lo}, {hi}] lies entirely in the excluded set"
        )));
    }
    let mut roots: Vec<(f64, f64, f64, usize)> = Vec::new();
    if p.rank() > 0 {
        for &(a, b) in &pieces {
            let share = ((b - a) / (hi - lo) * opts.grid as f64).ceil() as usize;
            let nodes = share.max(16);
            let xs: Vec<f64> = (0..nodes)
                .map(|j| {
                    if j + 1 == nodes {
                        b
                    } else {
                        a + (b - a) * j as f64 / (nodes - 1) as f64
                    }
                })
                .collect();
            let counts = xs
                .par_iter()
                .map(|&x| negative_count(w, p, x))
                .collect::<Result<Vec<_>>>()?;
            for j in 0..nodes - 1 {
                if counts[j] > counts[j + 1] {
                    bisect(
                        w,
                        p,
                        (xs[j], counts[j]),
                        (xs[j + 1], counts[j + 1]),
                        opts.tol,
                        &mut roots,
                    )?;
                }
            }
        }
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64, f64, usize)> = Vec::new();
    for r in roots {
        match merged.last_mut() {
            Some(last) if r.0 - last.0 <= MERGE_TOL => {
                last.2 = r.2;
                last.3 += r.3;
            }
            _ => merged.push(r),
        }
    }
    let q = p.range_basis();
    let mut eigenvalues = Vec::new();
    for (mid, a, b, mult) in merged {
        let lambda = polish(w, p, mid, a, b)?;
        let m = compressed(w, p, lambda)?;
        let pairs = closest_to_zero(&m)?;
        let sigma = pairs[0].0.abs();
        if sigma > KERNEL_TOL * (1.0 + norm2(&m)) {
            continue;
        }
        let null_basis = pairs.iter().take(mult).map(|(_, v)| q * v).collect();
        eigenvalues.push(EigenResult {
            lambda,
            null_basis,
            sigma_min_at_lambda: sigma,
            multiplicity: mult,
        });
    }
    Ok(SpectrumReport {
        window: [lo, hi],
        eigenvalues,
        gaps,
        note: EMBEDDED_NOTE,
    })
}

/// `||(Theta + Pi Gamma(lambda) Pi) zeta||` and `||(1 - Pi) zeta||`, relative to `||zeta||`.
fn kernel_residual<W: WeylSystem + ?Sized>(
    w: &W,
    p: &ExtensionParams,
    lambda: f64,
    zeta: &CVector,
) -> Result<(f64, f64)> {
    if zeta.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: zeta.len(),
        });
    }
    let g = w.gamma(c(lambda, 0.0))?;
    let full = p.theta() + p.pi() * g * p.pi();
    let n = p.dim();
    let out = (CMatrix::identity(n, n) - p.pi()) * zeta;
    let scale = zeta.norm().max(f64::MIN_POSITIVE);
    Ok(((full * zeta).norm() / scale, out.norm() / scale))
}

/// `G(lambda) zeta` on the grid of `like`, after checking that `zeta` is a
/// kernel vector.
pub fn eigenfunction<M: ResolventModel + ?Sized>(
    m: &M,
    p: &ExtensionParams,
    lambda: f64,
    zeta: &CVector,
    like: &M::State,
) -> Result<M::State> {
    let (res, out) = kernel_residual(m, p, lambda, zeta)?;
    let scale = 1.0 + norm2(&m.gamma(c(lambda, 0.0))?) + norm2(p.theta());
    let worst = res.max(out);
    if worst > KERNEL_TOL * scale {
        return Err(Error::NotInKernel { residual: worst });
    }
    m.gamma_field(c(lambda, 0.0), zeta, like)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenpairReport {
    pub lambda: f64,
    pub distance_to_excluded: f64,
    pub excluded: bool,
    pub sigma_min: Option<f64>,
    /// `||Gamma_{Pi,Theta}(lambda) zeta|| / ||zeta||`
    pub kernel_residual: Option<f64>,
    /// `||(1 - Pi) zeta|| / ||zeta||`
    pub range_residual: Option<f64>,
    pub boundary: Option<BoundaryReport>,
}

/// Nodes per edge used to sample eigenfunctions for the boundary check.
const CHECK_NODES: usize = 2001;

/// Consistency report for a candidate eigenpair.
pub fn validate_eigenpair(model: &Model, p: &ExtensionParams, lambda: f64, zeta: &CVector) -> Result<EigenpairReport> {
    let w = model.weyl();
    let distance = w.distance_to_excluded(lambda);
    let mut report = EigenpairReport {
        lambda,
        distance_to_excluded: distance,
        excluded: w.check_admissible(c(lambda, 0.0)).is_err(),
        sigma_min: None,
        kernel_residual: None,
        range_residual: None,
        boundary: None,
    };
    if report.excluded {
        return Ok(report);
    }
    let m = compressed(w, p, lambda)?;
    report.sigma_min = Some(if m.nrows() == 0 {
        f64::INFINITY
    } else {
        closest_to_zero(&m)?[0].0.abs()
    });
    let (res, out) = kernel_residual(w, p, lambda, zeta)?;
    report.kernel_residual = Some(res);
    report.range_residual = Some(out);
    let z = c(lambda, 0.0);
    report.boundary = Some(match model {
        Model::Interval(iv) => line_eigen_boundary(iv, p, z, zeta)?,
        Model::Graph(g) => line_eigen_boundary(g, p, z, zeta)?,
        Model::Points(pm) => point_eigen_boundary(pm, p, z, zeta)?,
    });
    Ok(report)
}

fn line_eigen_boundary<M: crate::models::LineModel>(
    m: &M,
    p: &ExtensionParams,
    z: Complex64,
    zeta: &CVector,
) -> Result<BoundaryReport> {
    let like = LineFunction::sample(&m.edge_lengths(), CHECK_NODES, |_, _| c(0.0, 0.0));
    let u = m.gamma_field(z, zeta, &like)?;
    let (rho, tau) = sampled_traces(&u)?;
    line_boundary_residual(p, &rho, &tau)
}

fn point_eigen_boundary(m: &PointModel, p: &ExtensionParams, z: Complex64, zeta: &CVector) -> Result<BoundaryReport> {
    let state = GreenState::single(z, zeta.clone());
    let tau0 = m.tau0_of_state(&state)?;
    point_boundary_residual(p, &tau0, zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::IntervalModel;
    use std::f64::consts::PI;

    #[test]
    fn neumann_zero_mode() {
        let m = IntervalModel::new(PI).unwrap();
        let p = ExtensionParams::scalar(2, 0.0);
        let r = eigenvalue_search(&m, &p, -0.5, 0.5, &SearchOptions::default()).unwrap();
        assert_eq!(r.eigenvalues.len(), 1);
        let e = &r.eigenvalues[0];
        assert!(e.lambda.abs() < 1e-8, "{}", e.lambda);
        assert_eq!(e.multiplicity, 1);
        assert!(e.sigma_min_at_lambda <= 1e-10);
        let v = &e.null_basis[0];
        assert!((v[0] - v[1]).norm() < 1e-8);
    }

    #[test]
    fn neumann_pole_window_is_a_gap() {
        let m = IntervalModel::new(PI).unwrap();
        let p = ExtensionParams::scalar(2, 0.0);
        let r = eigenvalue_search(&m, &p, -4.5, -3.5, &SearchOptions::default()).unwrap();
        assert!(r.eigenvalues.is_empty());
        assert_eq!(r.gaps.len(), 1);
        let strict = SearchOptions {
            allow_gaps: false,
            ..SearchOptions::default()
        };
        assert!(matches!(
            eigenvalue_search(&m, &p, -4.5, -3.5, &strict),
            Err(Error::Unsearchable(_))
        ));
    }

    #[test]
    fn point_bound_state() {
        let m = PointModel::new(vec![[0.0; 3]]).unwrap();
        let p = ExtensionParams::scalar(1, -1.0 / (4.0 * PI));
        let r = eigenvalue_search(&m, &p, 0.5, 2.0, &SearchOptions::default()).unwrap();
        assert_eq!(r.eigenvalues.len(), 1);
        assert!((r.eigenvalues[0].lambda - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bad_windows() {
        let m = IntervalModel::new(PI).unwrap();
        let p = ExtensionParams::scalar(2, 0.0);
        assert!(matches!(
            eigenvalue_search(&m, &p, 1.0, 1.0, &SearchOptions::default()),
            Err(Error::InvalidWindow(_))
        ));
        let pm = PointModel::new(vec![[0.0; 3]]).unwrap();
        let pp = ExtensionParams::scalar(1, 0.0);
        assert!(matches!(
            eigenvalue_search(&pm, &pp, -3.0, -1.0, &SearchOptions::default()),
            Err(Error::Unsearchable(_))
        ));
    }

    #[test]
    fn eigenfunction_checks_kernel() {
        let m = IntervalModel::new(PI).unwrap();
        let p = ExtensionParams::scalar(2, 0.0);
        let like = LineFunction::sample(&[PI], 101, |_, _| c(0.0, 0.0));
        let one = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let u = eigenfunction(&m, &p, 0.0, &one, &like).unwrap();
        assert!(u.edges[0].values.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-14));
        let orth = CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(
            eigenfunction(&m, &p, 0.0, &orth, &like),
            Err(Error::NotInKernel { .. })
        ));
    }

    #[test]
    fn eigenpair_reports() {
        let model = Model::Points(PointModel::new(vec![[0.0; 3]]).unwrap());
        let p = ExtensionParams::scalar(1, -1.0 / (4.0 * PI));
        let one = CVector::from_element(1, c(1.0, 0.0));
        let r = validate_eigenpair(&model, &p, 1.0, &one).unwrap();
        assert!(r.kernel_residual.unwrap() < 1e-15);
        assert!(r.boundary.unwrap().max() < 1e-10);
        let off = validate_eigenpair(&model, &p, 1.0 + 1e-3, &one).unwrap();
        assert!(off.kernel_residual.unwrap() > 1e-6);

        let iv = Model::Interval(IntervalModel::new(PI).unwrap());
        let np = ExtensionParams::scalar(2, 0.0);
        let pole = validate_eigenpair(&iv, &np, -4.0, &CVector::zeros(2)).unwrap();
        assert!(pole.excluded);
    }
}
