use std::f64::consts::PI;

use krein_ext::krein::{ExtensionParams, WeylSystem};
use krein_ext::models::{vertex_params, EdgeEnd, Endpoint, GraphModel, IntervalModel, VertexGroup};
use krein_ext::oracle::{fd_graph_spectrum, fd_interval_spectrum, FDSpec};
use krein_ext::spectral::{eigenvalue_search, SearchOptions};

fn found(w: &dyn WeylSystem, p: &ExtensionParams, lo: f64, hi: f64, grid: usize) -> Vec<(f64, usize)> {
    let opts = SearchOptions {
        grid,
        ..SearchOptions::default()
    };
    eigenvalue_search(w, p, lo, hi, &opts)
        .unwrap()
        .eigenvalues
        .iter()
        .map(|e| (e.lambda, e.multiplicity))
        .collect()
}

/// Robin eigenvalues in descending order, bracketed on a fine `k` scan of
/// `(k^2 - theta^2) sin(k a) - 2 theta k cos(k a)` (`lambda = -k^2`) and of its
/// continuation to `k = i s` (`lambda = s^2`).
fn robin_roots(a: f64, theta: f64, count: usize) -> Vec<f64> {
    let f = |k: f64| (k * k - theta * theta) * (k * a).sin() - 2.0 * theta * k * (k * a).cos();
    let mut out = Vec::new();
    let g = |s: f64| (s * s + theta * theta) * (s * a).sinh() + 2.0 * theta * s * (s * a).cosh();
    let mut s = 1e-6;
    while s < 50.0 && out.len() < count {
        let t = s + 1e-3;
        if g(s) * g(t) < 0.0 {
            out.push(bisect(&g, s, t));
        }
        s = t;
    }
    let mut pos: Vec<f64> = out.iter().map(|s| s * s).collect();
    let mut k = 1e-6;
    let mut neg = Vec::new();
    while neg.len() + pos.len() < count {
        let t = k + 1e-3;
        if f(k) * f(t) < 0.0 {
            let r = bisect(&f, k, t);
            neg.push(-r * r);
        }
        k = t;
    }
    pos.sort_by(|x, y| y.partial_cmp(x).unwrap());
    pos.extend(neg);
    pos.truncate(count);
    pos
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn robin_search_matches_closed_form_and_fd() {
    let m = IntervalModel::new(PI).unwrap();
    for theta in [1.0, -0.3, 2.7] {
        let p = ExtensionParams::scalar(2, theta);
        let exact = robin_roots(PI, theta, 3);
        let mut roots: Vec<f64> = found(&m, &p, -10.0, 10.0, 4000).iter().map(|r| r.0).collect();
        roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
        roots.truncate(3);
        for (r, e) in roots.iter().zip(&exact) {
            assert!((r - e).abs() < 1e-9 * (1.0 + e.abs()), "theta {theta}: {r} vs {e}");
        }
        let errors: Vec<f64> = [1001, 2001, 4001]
            .iter()
            .map(|&n| {
                let fd = fd_interval_spectrum(&m, &p, &FDSpec::new(n).unwrap(), 3).unwrap();
                fd.iter().zip(&exact).map(|(f, e)| (f - e).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errors[2] < 1e-3 * exact.iter().map(|e| e.abs()).fold(0.0, f64::max));
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "theta {theta}: errors {errors:?}");
        }
    }
}

#[test]
fn robin_search_is_complete() {
    // Every root of the secular function away from the Dirichlet points is
    // found, and nothing else.
    let m = IntervalModel::new(PI).unwrap();
    let p = ExtensionParams::scalar(2, 0.8);
    let exact: Vec<f64> = robin_roots(PI, 0.8, 8).into_iter().filter(|&l| l > -30.0).collect();
    let got: Vec<f64> = found(&m, &p, -30.0, 5.0, 3000).iter().map(|r| r.0).collect();
    let guard = 1e-6;
    let visible: Vec<f64> = exact
        .iter()
        .copied()
        .filter(|&l| m.distance_to_excluded(l) > guard)
        .collect();
    assert_eq!(got.len(), visible.len(), "{got:?} vs {visible:?}");
    let mut sorted = got.clone();
    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
    for (g, e) in sorted.iter().zip(&visible) {
        assert!((g - e).abs() < 1e-6);
    }
}

#[test]
fn multiplicity_is_grid_stable() {
    // Two disjoint equal Robin edges: every eigenvalue is double.
    let g = GraphModel::new(&[PI, PI]).unwrap();
    let p = ExtensionParams::scalar(4, 0.5);
    let coarse = found(&g, &p, -20.0, 2.0, 1000);
    let fine = found(&g, &p, -20.0, 2.0, 2000);
    assert!(!coarse.is_empty());
    assert_eq!(coarse.len(), fine.len());
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a.0 - b.0).abs() < 1e-9);
        assert_eq!(a.1, 2);
        assert_eq!(a.1, b.1);
    }
}

fn glued(lengths: &[f64]) -> (GraphModel, ExtensionParams) {
    let g = GraphModel::new(lengths).unwrap();
    let groups = vec![
        VertexGroup {
            endpoints: vec![Endpoint {
                edge: 0,
                end: EdgeEnd::Start,
            }],
            coupling: 0.0,
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
            coupling: 0.0,
        },
        VertexGroup {
            endpoints: vec![Endpoint {
                edge: 1,
                end: EdgeEnd::End,
            }],
            coupling: 0.0,
        },
    ];
    let p = vertex_params(&g, &groups).unwrap();
    (g, p)
}

#[test]
fn glued_edges_are_one_interval() {
    let (g, p) = glued(&[1.0, 2f64.sqrt()]);
    let total = 1.0 + 2f64.sqrt();
    let exact: Vec<f64> = (0..4).map(|n| -(n as f64 * PI / total).powi(2)).collect();
    let mut got: Vec<f64> = found(&g, &p, -16.0, 0.5, 4000).iter().map(|r| r.0).collect();
    got.sort_by(|x, y| y.partial_cmp(x).unwrap());
    assert_eq!(got.len(), 4, "{got:?}");
    for (x, e) in got.iter().zip(&exact) {
        assert!((x - e).abs() < 1e-6, "{x} vs {e}");
    }
    let fd = fd_graph_spectrum(&g, &p, &FDSpec::new(2001).unwrap(), 4).unwrap();
    for (f, e) in fd.iter().zip(&exact) {
        assert!((f - e).abs() < 1e-3 * (1.0 + e.abs()), "{f} vs {e}");
    }
}

#[test]
fn glued_equal_interval_spectrum_shifted_coupling() {
    // A delta coupling at the middle vertex of two equal edges leaves the odd
    // modes of the full interval untouched.
    let g = GraphModel::new(&[1.0, 1.0]).unwrap();
    let groups = vec![
        VertexGroup {
            endpoints: vec![Endpoint {
                edge: 0,
                end: EdgeEnd::Start,
            }],
            coupling: 0.0,
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
            coupling: 3.0,
        },
        VertexGroup {
            endpoints: vec![Endpoint {
                edge: 1,
                end: EdgeEnd::End,
            }],
            coupling: 0.0,
        },
    ];
    let p = vertex_params(&g, &groups).unwrap();
    let got: Vec<f64> = found(&g, &p, -12.0, 3.0, 3000).iter().map(|r| r.0).collect();
    let odd = -(PI / 2.0).powi(2);
    assert!(got.iter().any(|l| (l - odd).abs() < 1e-8), "{got:?}");
    let fd = fd_graph_spectrum(&g, &p, &FDSpec::new(2001).unwrap(), 3).unwrap();
    let mut sorted = got.clone();
    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
    for (f, s) in fd.iter().zip(&sorted) {
        assert!((f - s).abs() < 1e-3 * (1.0 + s.abs()), "{fd:?} vs {sorted:?}");
    }
}
