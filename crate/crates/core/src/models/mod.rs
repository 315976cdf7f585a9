//! Concrete Weyl systems.

pub mod graph;
pub mod interval;
pub mod line;
pub mod point;

pub use graph::{all_free, vertex_params, EdgeEnd, Endpoint, GraphModel, LineModel, VertexGroup};
pub use interval::IntervalModel;
pub use line::{EdgeSamples, LineFunction};
pub use point::{GreenState, PointModel, SpinPointModel};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::krein::{RealExclusion, WeylSystem};
use crate::numeric::CMatrix;

/// Config-file description of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelDescriptor {
    Interval { a: f64 },
    Graph { lengths: Vec<f64> },
    Points { centers: Vec<[f64; 3]> },
    SpinPoints { centers: Vec<[f64; 3]>, b: Vec<f64> },
}

/// A constructed model of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Interval(IntervalModel),
    Graph(GraphModel),
    Points(PointModel),
}

impl ModelDescriptor {
    pub fn build(&self) -> Result<Model> {
        Ok(match self {
            ModelDescriptor::Interval { a } => Model::Interval(IntervalModel::new(*a)?),
            ModelDescriptor::Graph { lengths } => Model::Graph(GraphModel::new(lengths)?),
            ModelDescriptor::Points { centers } => Model::Points(PointModel::new(centers.clone())?),
            ModelDescriptor::SpinPoints { centers, b } => {
                Model::Points(PointModel::with_levels(centers.clone(), b.clone())?)
            }
        })
    }
}

impl Model {
    pub fn weyl(&self) -> &dyn WeylSystem {
        match self {
            Model::Interval(m) => m,
            Model::Graph(m) => m,
            Model::Points(m) => m,
        }
    }

    pub fn has_trace_maps(&self) -> bool {
        !matches!(self, Model::Points(_))
    }
}

impl WeylSystem for Model {
    fn dim(&self) -> usize {
        self.weyl().dim()
    }

    fn check_admissible(&self, z: Complex64) -> Result<()> {
        self.weyl().check_admissible(z)
    }

    fn gamma(&self, z: Complex64) -> Result<CMatrix> {
        self.weyl().gamma(z)
    }

    fn gram(&self, z: Complex64, w: Complex64) -> Result<CMatrix> {
        self.weyl().gram(z, w)
    }

    fn real_exclusions(&self, lo: f64, hi: f64) -> Vec<RealExclusion> {
        self.weyl().real_exclusions(lo, hi)
    }

    fn distance_to_excluded(&self, lambda: f64) -> f64 {
        self.weyl().distance_to_excluded(lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_json() {
        let d: ModelDescriptor = serde_json::from_str(r#"{"type":"interval","a":2.0}"#).unwrap();
        assert_eq!(d, ModelDescriptor::Interval { a: 2.0 });
        let d: ModelDescriptor =
            serde_json::from_str(r#"{"type":"spin_points","centers":[[0,0,0]],"b":[0,5]}"#).unwrap();
        assert_eq!(d.build().unwrap().dim(), 2);
        assert!(serde_json::from_str::<ModelDescriptor>(r#"{"type":"torus"}"#).is_err());
        let bad = ModelDescriptor::Graph {
            lengths: vec![1.0, 0.0],
        };
        assert!(bad.build().is_err());
    }
}
