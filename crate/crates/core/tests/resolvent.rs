use std::f64::consts::PI;

use krein_ext::krein::{line_boundary_residual, resolvent_apply, ExtensionParams};
use krein_ext::models::line::{helmholtz_residual, sampled_traces};
use krein_ext::models::{vertex_params, EdgeEnd, Endpoint, GraphModel, IntervalModel, LineFunction, VertexGroup};
use krein_ext::numeric::{c, CMatrix, CVector};
use krein_ext::parametrizations::von_neumann_block;
use krein_ext::sampling::{random_params, random_params_of_rank};
use krein_ext::spectral::{eigenvalue_search, SearchOptions};
use krein_ext::verify::resolvent_identity_line;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 2001;

fn bump(a: f64) -> LineFunction {
    LineFunction::sample(&[a], N, |_, x| c(x * (a - x), 0.0))
}

fn hermitian_theta() -> ExtensionParams {
    let theta = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.2, -0.4), c(0.2, 0.4), c(-1.1, 0.0)]);
    ExtensionParams::full(theta).unwrap()
}

#[test]
fn neumann_output_has_zero_derivatives() {
    let m = IntervalModel::new(PI).unwrap();
    let p = ExtensionParams::scalar(2, 0.0);
    let psi = LineFunction::sample(&[PI], N, |_, x| c(x.sin(), 0.0));
    let out = resolvent_apply(&m, &p, c(1.0, 0.0), &psi).unwrap();
    let (_, tau) = sampled_traces(&out.state).unwrap();
    assert!(tau.norm() < 1e-6, "{tau}");
}

#[test]
fn hermitian_coupling_output_solves_the_equation() {
    let m = IntervalModel::new(PI).unwrap();
    let p = hermitian_theta();
    let z = c(1.0, 1.0);
    let psi = bump(PI);
    let out = resolvent_apply(&m, &p, z, &psi).unwrap();
    assert!(helmholtz_residual(&out.state, z, &psi) < 1e-3);
    let (rho, tau) = sampled_traces(&out.state).unwrap();
    let report = line_boundary_residual(&p, &rho, &tau).unwrap();
    assert!(report.max() < 1e-6, "{report:?}");
}

#[test]
fn random_extensions_honor_their_boundary_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = IntervalModel::new(2.0).unwrap();
    let psi = LineFunction::sample(&[2.0], N, |_, x| c(1.0 + x, -0.5 * x * x));
    for _ in 0..10 {
        let p = random_params(&mut rng, 2);
        let z = c(-0.5, 1.5);
        let out = resolvent_apply(&m, &p, z, &psi).unwrap();
        assert!(helmholtz_residual(&out.state, z, &psi) < 1e-3);
        let (rho, tau) = sampled_traces(&out.state).unwrap();
        let scale = 1.0 + rho.norm() + tau.norm();
        assert!(line_boundary_residual(&p, &rho, &tau).unwrap().max() < 1e-6 * scale);
    }
}

#[test]
fn reference_extension_is_the_free_resolvent() {
    let m = IntervalModel::new(PI).unwrap();
    let p = ExtensionParams::reference(2);
    let psi = bump(PI);
    let out = resolvent_apply(&m, &p, c(2.0, 0.5), &psi).unwrap();
    assert_eq!(out.correction.sup_norm(), 0.0);
    assert_eq!(out.state, out.free);
    let (rho, _) = sampled_traces(&out.state).unwrap();
    assert!(rho.norm() < 1e-14);
}

#[test]
fn resolvent_identity_holds_on_interval_and_graph() {
    let m = IntervalModel::new(PI).unwrap();
    let p = hermitian_theta();
    let r = resolvent_identity_line(&m, &p, c(1.0, 1.0), c(2.0, -1.0), N).unwrap();
    assert!(r < 1e-3, "{r}");
    let g = GraphModel::new(&[1.0, 2f64.sqrt()]).unwrap();
    let groups = vec![
        VertexGroup {
            endpoints: vec![Endpoint {
                edge: 0,
                end: EdgeEnd::Start,
            }],
            coupling: 0.5,
        },
        VertexGroup {
            endpoints: vec![
                Endpoint {
                    edge: 0,
                    end: EdgeEnd::End,
                },
                Endpoint {
                    edge: 1,
                    end: EdgeEnd::Start,
                },
            ],
            coupling: -1.0,
        },
        VertexGroup {
            endpoints: vec![Endpoint {
                edge: 1,
                end: EdgeEnd::End,
            }],
            coupling: 0.0,
        },
    ];
    let gp = vertex_params(&g, &groups).unwrap();
    let r = resolvent_identity_line(&g, &gp, c(1.0, 1.0), c(2.0, -1.0), N).unwrap();
    assert!(r < 1e-3, "{r}");
}

#[test]
fn correction_blows_up_at_eigenvalues() {
    let m = IntervalModel::new(PI).unwrap();
    let p = ExtensionParams::scalar(2, 1.0);
    let report = eigenvalue_search(&m, &p, -10.0, 2.0, &SearchOptions::default()).unwrap();
    assert!(report.eigenvalues.len() >= 3);
    let psi = LineFunction::sample(&[PI], N, |_, x| c(1.0 + x, 0.0));
    for e in &report.eigenvalues {
        let near = resolvent_apply(&m, &p, c(e.lambda, 1e-6), &psi)
            .unwrap()
            .correction
            .sup_norm();
        let far = resolvent_apply(&m, &p, c(e.lambda, 0.1), &psi)
            .unwrap()
            .correction
            .sup_norm();
        assert!(near >= 1e4 * far, "lambda {}: {near} vs {far}", e.lambda);
    }
}

#[test]
fn von_neumann_elements_satisfy_the_boundary_condition() {
    // f + U f with f = G(i) b lies in the extension domain: on the interval
    // its values and outward derivatives obey the (Pi, Theta) condition.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = IntervalModel::new(PI).unwrap();
    let (ip, im) = (c(0.0, 1.0), c(0.0, -1.0));
    for rank in 0..=2 {
        for _ in 0..5 {
            let p = random_params_of_rank(&mut rng, 2, rank);
            let block = von_neumann_block(&m, &p).unwrap();
            for j in 0..2 {
                let b = CVector::from_fn(2, |i, _| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
                let mb = &block.m * &b;
                let (b, mb) = ((b[0], b[1]), (mb[0], mb[1]));
                let value = |x: f64| m.gamma_field_at(ip, b, x) - m.gamma_field_at(im, mb, x);
                let deriv = |x: f64| m.gamma_field_derivative_at(ip, b, x) - m.gamma_field_derivative_at(im, mb, x);
                let rho = CVector::from_vec(vec![value(0.0), value(PI)]);
                let tau = CVector::from_vec(vec![deriv(0.0), -deriv(PI)]);
                let report = line_boundary_residual(&p, &rho, &tau).unwrap();
                assert!(report.max() < 1e-10, "rank {rank}: {report:?}");
            }
        }
    }
}

#[test]
fn resolvent_adjoint_is_resolvent_at_conjugate() {
    // <R(z) f, g> = <f, R(conj z) g> for the extension.
    let m = IntervalModel::new(PI).unwrap();
    let p = hermitian_theta();
    let z = c(0.3, 0.8);
    let f = bump(PI);
    let g = LineFunction::sample(&[PI], N, |_, x| c(x.cos(), x));
    let rf = resolvent_apply(&m, &p, z, &f).unwrap().state;
    let rg = resolvent_apply(&m, &p, z.conj(), &g).unwrap().state;
    let lhs = rf.inner(&g).unwrap();
    let rhs = f.inner(&rg).unwrap();
    assert!((lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
}
