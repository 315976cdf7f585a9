//! Bounded metric graphs: a direct sum of intervals with the vertex
//! connectivity carried entirely by `(Pi, Theta)`.
//!
//! Boundary coordinates are ordered edge by edge, `2k` for the start of edge
//! `k` and `2k + 1` for its end.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krein::{ExtensionParams, RealExclusion, ResolventModel, WeylSystem};
use crate::numeric::{block_diag, c, CMatrix, CVector};

use super::interval::IntervalModel;
use super::line::{EdgeSamples, LineFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphModel {
    edges: Vec<IntervalModel>,
}

impl GraphModel {
    pub fn new(lengths: &[f64]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidModel("a graph needs at least one edge".into()));
        }
        let edges = lengths
            .iter()
            .map(|&a| IntervalModel::new(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphModel { edges })
    }

    pub fn from_edges(edges: Vec<IntervalModel>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidModel("a graph needs at least one edge".into()));
        }
        Ok(GraphModel { edges })
    }

    /// Override the Simpson node count on every edge.
    pub fn with_quadrature_nodes(self, nodes: usize) -> Result<Self> {
        let edges = self
            .edges
            .into_iter()
            .map(|e| e.with_quadrature_nodes(nodes))
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphModel { edges })
    }

    pub fn edges(&self) -> &[IntervalModel] {
        &self.edges
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(IntervalModel::length).collect()
    }
}

/// Which end of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeEnd {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub edge: usize,
    pub end: EdgeEnd,
}

impl Endpoint {
    pub fn index(&self) -> usize {
        2 * self.edge
            + match self.end {
                EdgeEnd::Start => 0,
                EdgeEnd::End => 1,
            }
    }
}

/// A vertex: the set of endpoints meeting there and its delta strength.
///
/// The encoded condition is continuity across the group together with
/// `sum of outgoing derivatives = coupling * psi(v)`; zero is Kirchhoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexGroup {
    pub endpoints: Vec<Endpoint>,
    #[serde(default)]
    pub coupling: f64,
}

/// `(Pi, Theta)` for delta-type vertex conditions.
pub fn vertex_params(g: &GraphModel, groups: &[VertexGroup]) -> Result<ExtensionParams> {
    let n = g.dim();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (gi, group) in groups.iter().enumerate() {
        if group.endpoints.is_empty() {
            return Err(Error::InvalidGluing(format!("vertex group {gi} is empty")));
        }
        if !group.coupling.is_finite() {
            return Err(Error::InvalidGluing(format!(
                "vertex group {gi} has a non-finite coupling"
            )));
        }
        for ep in &group.endpoints {
            if ep.edge >= g.edges.len() {
                return Err(Error::InvalidGluing(format!(
                    "vertex group {gi} references edge {} of a {}-edge graph",
                    ep.edge,
                    g.edges.len()
                )));
            }
            let slot = &mut owner[ep.index()];
            if let Some(prev) = *slot {
                return Err(Error::InvalidGluing(format!(
                    "endpoint {:?} of edge {} assigned to groups {prev} and {gi}",
                    ep.end, ep.edge
                )));
            }
            *slot = Some(gi);
        }
    }
    if let Some(free) = owner.iter().position(Option::is_none) {
        return Err(Error::InvalidGluing(format!(
            "endpoint {:?} of edge {} is not assigned to any vertex",
            if free % 2 == 0 { EdgeEnd::Start } else { EdgeEnd::End },
            free / 2
        )));
    }
    let k = groups.len();
    let mut q = CMatrix::zeros(n, k);
    let mut block = CMatrix::zeros(k, k);
    for (gi, group) in groups.iter().enumerate() {
        let m = group.endpoints.len() as f64;
        for ep in &group.endpoints {
            q[(ep.index(), gi)] = c(1.0 / m.sqrt(), 0.0);
        }
        block[(gi, gi)] = c(group.coupling / m, 0.0);
    }
    ExtensionParams::from_range(&q, &block)
}

/// Free endpoints with coupling 0 at every end: Neumann on each edge.
pub fn all_free(g: &GraphModel) -> Vec<VertexGroup> {
    (0..g.edges.len())
        .flat_map(|e| {
            [EdgeEnd::Start, EdgeEnd::End].map(|end| VertexGroup {
                endpoints: vec![Endpoint { edge: e, end }],
                coupling: 0.0,
            })
        })
        .collect()
}

fn check_state(edges: &[IntervalModel], psi: &LineFunction) -> Result<()> {
    if psi.edges.len() != edges.len() {
        return Err(Error::DimensionMismatch {
            expected: edges.len(),
            found: psi.edges.len(),
        });
    }
    Ok(())
}

fn check_zeta(edges: &[IntervalModel], zeta: &CVector) -> Result<()> {
    if zeta.len() != 2 * edges.len() {
        return Err(Error::DimensionMismatch {
            expected: 2 * edges.len(),
            found: zeta.len(),
        });
    }
    Ok(())
}

fn lines_gamma(edges: &[IntervalModel], z: Complex64) -> Result<CMatrix> {
    let blocks = edges.iter().map(|e| e.gamma(z)).collect::<Result<Vec<_>>>()?;
    Ok(block_diag(&blocks))
}

fn lines_gram(edges: &[IntervalModel], z: Complex64, w: Complex64) -> Result<CMatrix> {
    let blocks = edges.iter().map(|e| e.gram(z, w)).collect::<Result<Vec<_>>>()?;
    Ok(block_diag(&blocks))
}

fn lines_exclusions(edges: &[IntervalModel], lo: f64, hi: f64) -> Vec<RealExclusion> {
    let mut all: Vec<RealExclusion> = edges.iter().flat_map(|e| e.real_exclusions(lo, hi)).collect();
    all.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    all
}

fn lines_free_resolvent(edges: &[IntervalModel], z: Complex64, psi: &LineFunction) -> Result<LineFunction> {
    check_state(edges, psi)?;
    let out = edges
        .iter()
        .zip(&psi.edges)
        .map(|(m, e)| m.free_resolvent_edge(z, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(LineFunction { edges: out })
}

fn lines_gamma_field(
    edges: &[IntervalModel],
    z: Complex64,
    zeta: &CVector,
    like: &LineFunction,
) -> Result<LineFunction> {
    check_state(edges, like)?;
    check_zeta(edges, zeta)?;
    let out = edges
        .iter()
        .zip(&like.edges)
        .enumerate()
        .map(|(k, (m, e))| m.gamma_field_edge(z, (zeta[2 * k], zeta[2 * k + 1]), e))
        .collect::<Result<Vec<_>>>()?;
    Ok(LineFunction { edges: out })
}

fn lines_gamma_field_adjoint(edges: &[IntervalModel], z: Complex64, psi: &LineFunction) -> Result<CVector> {
    check_state(edges, psi)?;
    let mut out = CVector::zeros(2 * edges.len());
    for (k, (m, e)) in edges.iter().zip(&psi.edges).enumerate() {
        let (a, b) = m.gamma_field_adjoint_edge(z, e)?;
        out[2 * k] = a;
        out[2 * k + 1] = b;
    }
    Ok(out)
}

fn lines_combine(a: &LineFunction, alpha: Complex64, b: &LineFunction, beta: Complex64) -> Result<LineFunction> {
    if !a.same_grid(b) {
        return Err(Error::DimensionMismatch {
            expected: a.edges.len(),
            found: b.edges.len(),
        });
    }
    let edges = a
        .edges
        .iter()
        .zip(&b.edges)
        .map(|(x, y)| EdgeSamples {
            length: x.length,
            values: x
                .values
                .iter()
                .zip(&y.values)
                .map(|(u, v)| alpha * u + beta * v)
                .collect(),
        })
        .collect();
    Ok(LineFunction { edges })
}

fn lines_distance(edges: &[IntervalModel], lambda: f64) -> f64 {
    edges
        .iter()
        .map(|e| e.distance_to_excluded(lambda))
        .fold(f64::INFINITY, f64::min)
}

/// Models whose states are functions on a list of intervals.
pub trait LineModel: ResolventModel<State = LineFunction> {
    fn edge_list(&self) -> &[IntervalModel];

    fn edge_lengths(&self) -> Vec<f64> {
        self.edge_list().iter().map(IntervalModel::length).collect()
    }
}

impl LineModel for IntervalModel {
    fn edge_list(&self) -> &[IntervalModel] {
        std::slice::from_ref(self)
    }
}

impl LineModel for GraphModel {
    fn edge_list(&self) -> &[IntervalModel] {
        &self.edges
    }
}

macro_rules! line_model_impls {
    ($ty:ty) => {
        impl WeylSystem for $ty {
            fn dim(&self) -> usize {
                2 * self.edge_list().len()
            }

            fn check_admissible(&self, z: Complex64) -> Result<()> {
                self.edge_list().iter().try_for_each(|e| e.check_admissible(z))
            }

            fn gamma(&self, z: Complex64) -> Result<CMatrix> {
                lines_gamma(self.edge_list(), z)
            }

            fn gram(&self, z: Complex64, w: Complex64) -> Result<CMatrix> {
                lines_gram(self.edge_list(), z, w)
            }

            fn real_exclusions(&self, lo: f64, hi: f64) -> Vec<RealExclusion> {
                lines_exclusions(self.edge_list(), lo, hi)
            }

            fn distance_to_excluded(&self, lambda: f64) -> f64 {
                lines_distance(self.edge_list(), lambda)
            }
        }

        impl ResolventModel for $ty {
            type State = LineFunction;

            fn free_resolvent(&self, z: Complex64, psi: &LineFunction) -> Result<LineFunction> {
                lines_free_resolvent(self.edge_list(), z, psi)
            }

            fn gamma_field(&self, z: Complex64, zeta: &CVector, like: &LineFunction) -> Result<LineFunction> {
                lines_gamma_field(self.edge_list(), z, zeta, like)
            }

            fn gamma_field_adjoint(&self, z: Complex64, psi: &LineFunction) -> Result<CVector> {
                lines_gamma_field_adjoint(self.edge_list(), z, psi)
            }

            fn combine(
                &self,
                a: &LineFunction,
                alpha: Complex64,
                b: &LineFunction,
                beta: Complex64,
            ) -> Result<LineFunction> {
                lines_combine(a, alpha, b, beta)
            }

            fn state_norm(&self, s: &LineFunction) -> f64 {
                s.sup_norm()
            }
        }
    };
}

line_model_impls!(IntervalModel);
line_model_impls!(GraphModel);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::max_abs;

    #[test]
    fn one_edge_matches_interval() {
        let g = GraphModel::new(&[1.7]).unwrap();
        let m = IntervalModel::new(1.7).unwrap();
        for z in [c(0.0, 0.0), c(1.0, 2.0), c(-5.0, 0.0)] {
            assert_eq!(g.gamma(z).unwrap(), WeylSystem::gamma(&m, z).unwrap());
        }
    }

    #[test]
    fn equal_edges_equal_blocks() {
        let g = GraphModel::new(&[1.0, 1.0]).unwrap();
        let m = g.gamma(c(0.3, 0.7)).unwrap();
        let b1 = m.view((0, 0), (2, 2)).into_owned();
        let b2 = m.view((2, 2), (2, 2)).into_owned();
        assert_eq!(b1, b2);
        assert_eq!(max_abs(&m.view((0, 2), (2, 2)).into_owned()), 0.0);
    }

    #[test]
    fn excluded_set_is_union() {
        let g = GraphModel::new(&[1.0, 2.0]).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(g.check_admissible(c(-pi2, 0.0)).is_err());
        assert!(g.check_admissible(c(-pi2 / 4.0, 0.0)).is_err());
        assert!(g.check_admissible(c(-pi2 / 2.0, 0.0)).is_ok());
        let ex = g.real_exclusions(-10.0, 0.0);
        assert_eq!(ex.len(), 3);
        assert!(ex.windows(2).all(|w| w[0].lo <= w[1].lo));
    }

    #[test]
    fn free_ends_give_neumann() {
        let m = GraphModel::new(&[2.0]).unwrap();
        let p = vertex_params(&m, &all_free(&m)).unwrap();
        assert!((p.pi() - CMatrix::identity(2, 2)).norm() < 1e-15);
        assert_eq!(max_abs(p.theta()), 0.0);
    }

    #[test]
    fn series_gluing_projector() {
        let g = GraphModel::new(&[1.0, 2.0_f64.sqrt()]).unwrap();
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
        let mut expected = CMatrix::identity(4, 4);
        expected[(1, 1)] = c(0.5, 0.0);
        expected[(2, 2)] = c(0.5, 0.0);
        expected[(1, 2)] = c(0.5, 0.0);
        expected[(2, 1)] = c(0.5, 0.0);
        assert!((p.pi() - expected).norm() < 1e-15);
        assert_eq!(p.rank(), 3);
    }

    #[test]
    fn robin_end_theta() {
        let g = GraphModel::new(&[1.0]).unwrap();
        let mut groups = all_free(&g);
        groups[0].coupling = 2.5;
        let p = vertex_params(&g, &groups).unwrap();
        assert!((p.theta()[(0, 0)] - c(2.5, 0.0)).norm() < 1e-15);
        assert_eq!(p.theta()[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn gluing_errors() {
        let g = GraphModel::new(&[1.0]).unwrap();
        let mut twice = all_free(&g);
        twice.push(VertexGroup {
            endpoints: vec![Endpoint {
                edge: 0,
                end: EdgeEnd::End,
            }],
            coupling: 0.0,
        });
        assert!(matches!(vertex_params(&g, &twice), Err(Error::InvalidGluing(_))));
        let missing = vec![all_free(&g)[0].clone()];
        assert!(matches!(vertex_params(&g, &missing), Err(Error::InvalidGluing(_))));
        assert!(GraphModel::new(&[1.0, -1.0]).is_err());
        assert!(GraphModel::new(&[]).is_err());
    }
}
