//! Identity suite: numerical probes of the structural laws every Weyl system
//! and every Krein resolvent must satisfy.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::krein::{
    conjugation_residual, gamma_difference_residual, green_identity_residual, membership_z, resolvent_apply,
    DomainElement, ExtensionParams, RealExclusion, ResolventModel, SineSeries, WeylSystem,
};
use crate::models::{GreenState, LineFunction, LineModel, Model, PointModel};
use crate::numeric::{c, det, CMatrix, CVector};
use crate::parametrizations::von_neumann_block;

pub const CONJUGATION_TOL: f64 = 1e-12;
pub const DIFFERENCE_TOL_LINE: f64 = 1e-8;
pub const DIFFERENCE_TOL_POINT: f64 = 1e-12;
/// Relative to `1 + |z|`.
pub const DET_TOL: f64 = 1e-10;
pub const GREEN_TOL: f64 = 1e-4;
pub const GREEN_NODES: usize = 4001;
pub const UNITARITY_TOL: f64 = 1e-8;
pub const ALTERNATIVE_FORM_TOL: f64 = 1e-12;
/// Relative to `||psi||_inf` on sampled line functions.
pub const RESOLVENT_IDENTITY_TOL_LINE: f64 = 1e-3;
/// Relative to `||psi||` on closed-form point states.
pub const RESOLVENT_IDENTITY_TOL_POINT: f64 = 1e-10;
pub const RESOLVENT_SAMPLES: usize = 2001;

/// Wraps a Weyl system and negates `Gamma` while keeping the Gram matrix.
/// Exists to show that the suite detects a mis-signed family.
pub struct SignFlipped<'a>(pub &'a dyn WeylSystem);

impl WeylSystem for SignFlipped<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn check_admissible(&self, z: Complex64) -> Result<()> {
        self.0.check_admissible(z)
    }

    fn gamma(&self, z: Complex64) -> Result<CMatrix> {
        Ok(-self.0.gamma(z)?)
    }

    fn gram(&self, z: Complex64, w: Complex64) -> Result<CMatrix> {
        self.0.gram(z, w)
    }

    fn real_exclusions(&self, lo: f64, hi: f64) -> Vec<RealExclusion> {
        self.0.real_exclusions(lo, hi)
    }

    fn distance_to_excluded(&self, lambda: f64) -> f64 {
        self.0.distance_to_excluded(lambda)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    pub flip_gamma_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// `None` when the check could not be evaluated; see `error`.
    pub residual: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    fn from_result(name: &'static str, threshold: f64, r: Result<f64>) -> Self {
        match r {
            Ok(v) => CheckResult {
                name,
                residual: Some(v),
                threshold,
                pass: v.is_finite() && v <= threshold,
                error: None,
            },
            Err(e) => CheckResult {
                name,
                residual: None,
                threshold,
                pass: false,
                error: Some(format!("{}: {e}", e.code())),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

/// Twenty nonreal points on both half-planes.
pub fn z_grid() -> Vec<Complex64> {
    let re = [-4.0, -1.5, 0.5, 2.0, 3.5];
    let im = [-2.0, -0.5, 0.5, 2.0];
    re.iter().flat_map(|&x| im.iter().map(move |&y| c(x, y))).collect()
}

fn max_over(zs: &[Complex64], f: impl Fn(Complex64) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in zs {
        worst = worst.max(f(z)?);
    }
    Ok(worst)
}

/// Worst `||Gamma(z)^* - Gamma(conj z)||` over the grid.
pub fn conjugation_check(w: &dyn WeylSystem, zs: &[Complex64]) -> Result<f64> {
    max_over(zs, |z| conjugation_residual(w, z))
}

/// Worst difference-identity residual over consecutive grid pairs and `(i, -i)`.
pub fn difference_check(w: &dyn WeylSystem, zs: &[Complex64]) -> Result<f64> {
    let mut worst = gamma_difference_residual(w, c(0.0, 1.0), c(0.0, -1.0))?;
    for pair in zs.windows(2) {
        worst = worst.max(gamma_difference_residual(w, pair[0], pair[1])?);
    }
    Ok(worst)
}

/// Worst `|det Gamma(z) - z| / (1 + |z|)` over the grid; meaningful for a
/// single interval only.
pub fn det_check(w: &dyn WeylSystem, zs: &[Complex64]) -> Result<f64> {
    max_over(zs, |z| Ok((det(&w.gamma(z)?) - z).norm() / (1.0 + z.norm())))
}

/// Green identity on a manufactured pair of split elements.
pub fn green_check<M: LineModel + ?Sized>(m: &M, nodes: usize) -> Result<f64> {
    let lengths = m.edge_lengths();
    let k = lengths.len();
    let phi_s = SineSeries {
        lengths: lengths.clone(),
        coeffs: (0..k)
            .map(|e| vec![c(1.0, 0.0), c(0.0, 0.5 / (e + 1) as f64)])
            .collect(),
    };
    let psi_s = SineSeries {
        lengths: lengths.clone(),
        coeffs: (0..k).map(|_| vec![c(0.0, 0.0), c(1.0, 0.0), c(-0.25, 0.25)]).collect(),
    };
    let zeta = CVector::from_fn(2 * k, |j, _| c(1.0 / (j + 1) as f64, 0.3 * j as f64));
    let xi = CVector::from_fn(2 * k, |j, _| {
        c(0.2 * j as f64 - 0.4, if j % 2 == 0 { 1.0 } else { -0.5 })
    });
    let phi = DomainElement { smooth: &phi_s, zeta };
    let psi = DomainElement {
        smooth: &psi_s,
        zeta: xi,
    };
    Ok(green_identity_residual(m, &phi, &psi, nodes)?.residual)
}

/// `m* q m - q` and the agreement of the two algebraic forms.
pub fn unitarity_check(w: &dyn WeylSystem, p: &ExtensionParams) -> Result<(f64, f64)> {
    let b = von_neumann_block(w, p)?;
    Ok((b.unitarity_residual, b.alternative_form_residual))
}

/// `||(z - w) R(w) R(z) psi - (R(w) psi - R(z) psi)|| / ||psi||` for line models.
pub fn resolvent_identity_line<M: LineModel + ?Sized>(
    m: &M,
    p: &ExtensionParams,
    z: Complex64,
    w: Complex64,
    samples: usize,
) -> Result<f64> {
    let psi = LineFunction::sample(&m.edge_lengths(), samples, |e, x| {
        let a = m.edge_lengths()[e];
        c(x * (a - x), 0.1 * (e as f64 + 1.0) * x)
    });
    resolvent_identity(m, p, z, w, &psi)
}

/// Same probe on closed-form point states.
pub fn resolvent_identity_point(m: &PointModel, p: &ExtensionParams, z: Complex64, w: Complex64) -> Result<f64> {
    let xi = CVector::from_fn(m.dim(), |j, _| c(1.0, 0.5 * j as f64));
    let psi = GreenState::single(c(0.0, 3.0), xi);
    resolvent_identity(m, p, z, w, &psi)
}

fn resolvent_identity<M: ResolventModel + ?Sized>(
    m: &M,
    p: &ExtensionParams,
    z: Complex64,
    w: Complex64,
    psi: &M::State,
) -> Result<f64> {
    let rz = resolvent_apply(m, p, z, psi)?.state;
    let rw = resolvent_apply(m, p, w, psi)?.state;
    let rwrz = resolvent_apply(m, p, w, &rz)?.state;
    let one = c(1.0, 0.0);
    let diff = m.combine(&rw, one, &rz, -one)?;
    let res = m.combine(&rwrz, z - w, &diff, -one)?;
    Ok(m.state_norm(&res) / m.state_norm(psi))
}

/// Every nonreal grid point belongs to `Z_{Pi,Theta}`; returns the number of
/// violations.
pub fn membership_check(w: &dyn WeylSystem, p: &ExtensionParams, zs: &[Complex64]) -> Result<f64> {
    let mut bad = 0usize;
    for &z in zs {
        if !membership_z(w, p, z)? {
            bad += 1;
        }
    }
    Ok(bad as f64)
}

/// Run the suite appropriate for `model` with extension `p`.
pub fn run_suite(model: &Model, p: &ExtensionParams, opts: VerifyOptions) -> VerifyReport {
    let flipped;
    let w: &dyn WeylSystem = if opts.flip_gamma_sign {
        flipped = SignFlipped(model.weyl());
        &flipped
    } else {
        model.weyl()
    };
    let zs = z_grid();
    let mut checks = vec![CheckResult::from_result(
        "conjugation",
        CONJUGATION_TOL,
        conjugation_check(w, &zs),
    )];
    let diff_tol = if model.has_trace_maps() {
        DIFFERENCE_TOL_LINE
    } else {
        DIFFERENCE_TOL_POINT
    };
    checks.push(CheckResult::from_result(
        "gamma_difference",
        diff_tol,
        difference_check(w, &zs),
    ));
    if let Model::Interval(_) = model {
        checks.push(CheckResult::from_result("det_identity", DET_TOL, det_check(w, &zs)));
    }
    checks.push(CheckResult::from_result("membership", 0.0, membership_check(w, p, &zs)));
    match unitarity_check(w, p) {
        Ok((u, alt)) => {
            checks.push(CheckResult::from_result("unitarity", UNITARITY_TOL, Ok(u)));
            checks.push(CheckResult::from_result(
                "unitarity_alternative_form",
                ALTERNATIVE_FORM_TOL,
                Ok(alt),
            ));
        }
        Err(e) => {
            let msg = e.to_string();
            checks.push(CheckResult::from_result("unitarity", UNITARITY_TOL, Err(e)));
            checks.push(CheckResult::from_result(
                "unitarity_alternative_form",
                ALTERNATIVE_FORM_TOL,
                Err(crate::Error::Internal(msg)),
            ));
        }
    }
    let (z, v) = (c(1.0, 1.0), c(2.0, -1.0));
    match model {
        Model::Interval(m) => {
            checks.push(CheckResult::from_result(
                "green_identity",
                GREEN_TOL,
                green_check(m, GREEN_NODES),
            ));
            checks.push(CheckResult::from_result(
                "resolvent_identity",
                RESOLVENT_IDENTITY_TOL_LINE,
                resolvent_identity_line(m, p, z, v, RESOLVENT_SAMPLES),
            ));
        }
        Model::Graph(m) => {
            checks.push(CheckResult::from_result(
                "green_identity",
                GREEN_TOL,
                green_check(m, GREEN_NODES),
            ));
            checks.push(CheckResult::from_result(
                "resolvent_identity",
                RESOLVENT_IDENTITY_TOL_LINE,
                resolvent_identity_line(m, p, z, v, RESOLVENT_SAMPLES),
            ));
        }
        Model::Points(m) => {
            checks.push(CheckResult::from_result(
                "resolvent_identity",
                RESOLVENT_IDENTITY_TOL_POINT,
                resolvent_identity_point(m, p, z, v),
            ));
        }
    }
    let all_pass = checks.iter().all(|ch| ch.pass);
    VerifyReport { checks, all_pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{IntervalModel, ModelDescriptor};

    fn interval() -> Model {
        Model::Interval(IntervalModel::new(std::f64::consts::PI).unwrap())
    }

    fn failing(r: &VerifyReport) -> Vec<&'static str> {
        r.checks.iter().filter(|ch| !ch.pass).map(|ch| ch.name).collect()
    }

    #[test]
    fn interval_suite_passes() {
        let r = run_suite(&interval(), &ExtensionParams::scalar(2, 0.7), VerifyOptions::default());
        assert!(r.all_pass, "{:?}", r.checks);
        assert_eq!(r.checks.len(), 8);
    }

    #[test]
    fn two_center_suite_passes() {
        let m = ModelDescriptor::Points {
            centers: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        }
        .build()
        .unwrap();
        let alpha = -1.0 / (4.0 * std::f64::consts::PI);
        let r = run_suite(&m, &ExtensionParams::scalar(2, alpha), VerifyOptions::default());
        assert!(r.all_pass, "{:?}", r.checks);
    }

    #[test]
    fn flipped_sign_is_caught() {
        let r = run_suite(
            &interval(),
            &ExtensionParams::reference(2),
            VerifyOptions { flip_gamma_sign: true },
        );
        assert!(!r.all_pass);
        assert!(failing(&r).contains(&"gamma_difference"));
    }
}
