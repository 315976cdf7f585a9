//! The four tasks.

use std::path::Path;

use krein_ext::krein::{
    line_boundary_residual, point_boundary_residual, resolvent_apply, BoundaryReport, ExclusionKind, ExtensionParams,
    WeylSystem,
};
use krein_ext::models::line::{helmholtz_residual, sampled_traces};
use krein_ext::models::{GreenState, LineFunction, LineModel, Model, PointModel};
use krein_ext::numeric::{c, CVector};
use krein_ext::parametrizations::{
    check_pair_conditions, max_principal_angle_sine, pair_from_params, params_from_pair, relation_from_pair,
    relation_from_params, von_neumann_block, BoundaryPair, PairConditions, SelfAdjointRelation, VonNeumannBlock,
};
use krein_ext::serde_util::{complex_to_repr, vector_to_repr, ComplexRepr};
use krein_ext::spectral::{eigenvalue_search, validate_eigenpair, EigenpairReport, SearchOptions, SpectrumReport};
use krein_ext::verify::{run_suite, VerifyOptions, VerifyReport};
use krein_ext::Error;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ConvertTarget, InputSpec, JobConfig, Resolved, Task};
use crate::output::{float, write_csv, write_json};
use crate::CliError;

/// Command-line overrides of task defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub tol: Option<f64>,
}

pub const DEFAULT_NODES: usize = 2001;
/// Eigenvalues closer than this to the excluded set get a flag in the CSV.
pub const NEAR_EXCLUDED: f64 = 1e-3;

pub fn run(config: &JobConfig, out: &Path, ov: Overrides) -> Result<(), CliError> {
    let model = config.model.build()?;
    let ext = config.extension.resolve(&model)?;
    match &config.task {
        Task::Spectrum {
            window,
            grid,
            tol,
            allow_gaps,
        } => {
            let defaults = SearchOptions::default();
            let opts = SearchOptions {
                grid: ov.grid.or(*grid).unwrap_or(defaults.grid),
                tol: ov.tol.or(*tol).unwrap_or(defaults.tol),
                allow_gaps: *allow_gaps,
            };
            spectrum(&model, &ext.params, *window, &opts, out)
        }
        Task::Resolvent {
            z,
            input,
            nodes,
            points,
        } => {
            let nodes = ov.grid.or(*nodes).unwrap_or(DEFAULT_NODES);
            resolvent(&model, &ext.params, *z, input, nodes, points.as_deref(), out)
        }
        Task::Convert { target } => convert(&model, &ext, *target, out),
        Task::Verify { flip_gamma_sign } => verify(&model, &ext.params, *flip_gamma_sign, out),
    }
}

#[derive(Serialize)]
struct SpectrumArtifact<'a> {
    report: &'a SpectrumReport,
    validation: Vec<EigenpairReport>,
    grid: usize,
    tol: f64,
}

fn spectrum(
    model: &Model,
    p: &ExtensionParams,
    window: [f64; 2],
    opts: &SearchOptions,
    out: &Path,
) -> Result<(), CliError> {
    let report = eigenvalue_search(model, p, window[0], window[1], opts)?;
    let w = model.weyl();
    let rows: Vec<Vec<String>> = report
        .eigenvalues
        .iter()
        .map(|e| {
            let flag = if w.distance_to_excluded(e.lambda) < NEAR_EXCLUDED {
                "near_excluded"
            } else {
                "none"
            };
            vec![
                float(e.lambda),
                e.multiplicity.to_string(),
                float(e.sigma_min_at_lambda),
                flag.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("spectrum.csv"),
        &["lambda", "multiplicity", "sigma_min", "gap_flags"],
        &rows,
    )?;
    let gaps: Vec<Vec<String>> = report
        .gaps
        .iter()
        .map(|g| {
            let (kind, at) = match g.kind {
                ExclusionKind::Pole { at } => ("pole", at),
                ExclusionKind::HalfLine { edge } => ("half_line", edge),
            };
            vec![float(g.lo), float(g.hi), kind.to_string(), float(at)]
        })
        .collect();
    write_csv(&out.join("spectrum_gaps.csv"), &["lo", "hi", "kind", "point"], &gaps)?;
    let mut validation = Vec::new();
    for e in &report.eigenvalues {
        validation.push(validate_eigenpair(model, p, e.lambda, &e.null_basis[0])?);
    }
    write_json(
        &out.join("spectrum.json"),
        &SpectrumArtifact {
            report: &report,
            validation,
            grid: opts.grid,
            tol: opts.tol,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ResolventMeta {
    z: ComplexRepr,
    sigma_min: f64,
    zeta: Vec<ComplexRepr>,
    /// Relative FD residual of the output (line models).
    helmholtz_residual: Option<f64>,
    boundary: BoundaryReport,
    samples: usize,
}

fn resolvent(
    model: &Model,
    p: &ExtensionParams,
    z: Complex64,
    input: &InputSpec,
    nodes: usize,
    points: Option<&[[f64; 3]]>,
    out: &Path,
) -> Result<(), CliError> {
    match model {
        Model::Interval(m) => line_resolvent(m, p, z, input, nodes, false, out),
        Model::Graph(m) => line_resolvent(m, p, z, input, nodes, true, out),
        Model::Points(m) => point_resolvent(m, p, z, input, points, out),
    }
}

fn line_resolvent<M: LineModel>(
    m: &M,
    p: &ExtensionParams,
    z: Complex64,
    input: &InputSpec,
    nodes: usize,
    with_edge: bool,
    out: &Path,
) -> Result<(), CliError> {
    let lengths = m.edge_lengths();
    let psi = match input {
        InputSpec::SinK { k } => LineFunction::sample(&lengths, nodes, |_, x| c((k * x).sin(), 0.0)),
        InputSpec::PolyBump => LineFunction::sample(&lengths, nodes, |e, x| c(x * (lengths[e] - x), 0.0)),
        InputSpec::GreenAtCenter { .. } => {
            return Err(Error::Unsupported("green_at_center needs a point model".into()).into())
        }
    };
    let r = resolvent_apply(m, p, z, &psi)?;
    let mut rows = Vec::new();
    for (e, edge) in r.state.edges.iter().enumerate() {
        for (j, v) in edge.values.iter().enumerate() {
            let mut row = Vec::with_capacity(4);
            if with_edge {
                row.push(e.to_string());
            }
            row.extend([float(edge.x(j)), float(v.re), float(v.im)]);
            rows.push(row);
        }
    }
    let header: &[&str] = if with_edge {
        &["edge", "x", "re", "im"]
    } else {
        &["x", "re", "im"]
    };
    write_csv(&out.join("resolvent.csv"), header, &rows)?;
    let (rho, tau) = sampled_traces(&r.state)?;
    let meta = ResolventMeta {
        z: complex_to_repr(z),
        sigma_min: r.sigma_min,
        zeta: vector_to_repr(&r.zeta),
        helmholtz_residual: Some(helmholtz_residual(&r.state, z, &psi)),
        boundary: line_boundary_residual(p, &rho, &tau)?,
        samples: nodes,
    };
    write_json(&out.join("resolvent_meta.json"), &meta)?;
    Ok(())
}

/// Default evaluation points: a line parallel to the x axis, off every center
/// placed on the axis.
fn default_points() -> Vec<[f64; 3]> {
    (0..=40).map(|j| [-2.0 + 0.1 * j as f64, 0.25, 0.0]).collect()
}

fn point_resolvent(
    m: &PointModel,
    p: &ExtensionParams,
    z: Complex64,
    input: &InputSpec,
    points: Option<&[[f64; 3]]>,
    out: &Path,
) -> Result<(), CliError> {
    let psi = match input {
        InputSpec::GreenAtCenter { w, xi } => {
            let xi = xi
                .clone()
                .unwrap_or_else(|| CVector::from_element(m.dim(), c(1.0, 0.0)));
            if xi.len() != m.dim() {
                return Err(Error::DimensionMismatch {
                    expected: m.dim(),
                    found: xi.len(),
                }
                .into());
            }
            m.check_admissible(*w)?;
            GreenState::single(*w, xi)
        }
        _ => return Err(Error::Unsupported("point models take only the green_at_center input".into()).into()),
    };
    let r = resolvent_apply(m, p, z, &psi)?;
    let pts = points.map(<[_]>::to_vec).unwrap_or_else(default_points);
    let mut rows = Vec::new();
    for x in &pts {
        for (level, v) in m.evaluate(&r.state, x).iter().enumerate() {
            rows.push(vec![
                float(x[0]),
                float(x[1]),
                float(x[2]),
                level.to_string(),
                float(v.re),
                float(v.im),
            ]);
        }
    }
    write_csv(
        &out.join("resolvent.csv"),
        &["x", "y", "z", "component", "re", "im"],
        &rows,
    )?;
    let (_, zeta_out) = m.split(&r.state);
    let tau0 = m.tau0_of_state(&r.state)?;
    let meta = ResolventMeta {
        z: complex_to_repr(z),
        sigma_min: r.sigma_min,
        zeta: vector_to_repr(&r.zeta),
        helmholtz_residual: None,
        boundary: point_boundary_residual(p, &tau0, &zeta_out)?,
        samples: pts.len(),
    };
    write_json(&out.join("resolvent_meta.json"), &meta)?;
    Ok(())
}

#[derive(Serialize)]
struct RoundTrip {
    /// `||Pi' - Pi||` after params -> pair -> params.
    pi: f64,
    /// `||Theta' - Theta||` after the same round trip.
    theta: f64,
    /// Sine of the largest principal angle between the relation of the
    /// params and that of the pair.
    relation_angle: f64,
}

#[derive(Serialize)]
struct ConvertArtifact {
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ExtensionParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair: Option<BoundaryPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair_conditions: Option<PairConditions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_pair_conditions: Option<PairConditions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relation: Option<SelfAdjointRelation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    von_neumann: Option<VonNeumannBlock>,
    round_trip: RoundTrip,
}

fn convert(model: &Model, ext: &Resolved, target: ConvertTarget, out: &Path) -> Result<(), CliError> {
    let p = &ext.params;
    let pair = pair_from_params(p);
    let back = params_from_pair(&pair)?;
    let source_pair = ext.pair.clone().unwrap_or_else(|| pair.clone());
    let round_trip = RoundTrip {
        pi: (back.pi() - p.pi()).norm(),
        theta: (back.theta() - p.theta()).norm(),
        relation_angle: max_principal_angle_sine(&relation_from_params(p), &relation_from_pair(&source_pair)?)?,
    };
    let all = target == ConvertTarget::All;
    let want = |t: ConvertTarget| all || target == t;
    let artifact = ConvertArtifact {
        params: want(ConvertTarget::Params).then(|| p.clone()),
        pair_conditions: if want(ConvertTarget::Pair) {
            Some(check_pair_conditions(&pair)?)
        } else {
            None
        },
        input_pair_conditions: match &ext.pair {
            Some(bp) => Some(check_pair_conditions(bp)?),
            None => None,
        },
        pair: want(ConvertTarget::Pair).then_some(pair),
        relation: want(ConvertTarget::Relation).then(|| relation_from_params(p)),
        von_neumann: if want(ConvertTarget::VonNeumann) {
            Some(von_neumann_block(model, p)?)
        } else {
            None
        },
        round_trip,
    };
    write_json(&out.join("convert.json"), &artifact)?;
    Ok(())
}

fn verify(model: &Model, p: &ExtensionParams, flip: bool, out: &Path) -> Result<(), CliError> {
    let report: VerifyReport = run_suite(model, p, VerifyOptions { flip_gamma_sign: flip });
    write_json(&out.join("verify.json"), &report)?;
    if report.all_pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        Err(CliError::verification(&failed))
    }
}
