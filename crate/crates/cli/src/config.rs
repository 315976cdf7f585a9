//! Job configuration files.

use krein_ext::krein::ExtensionParams;
use krein_ext::models::{vertex_params, Model, ModelDescriptor, VertexGroup};
use krein_ext::numeric::CVector;
use krein_ext::parametrizations::{params_from_pair, BoundaryPair};
use krein_ext::{Error, Result};
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub model: ModelDescriptor,
    pub extension: ExtensionSpec,
    pub task: Task,
}

/// How the extension is given. Every form is reduced to `(Pi, Theta)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtensionSpec {
    Params(ExtensionParams),
    Pair(BoundaryPair),
    /// `Pi = 1`, `Theta = theta * 1`.
    Robin {
        theta: f64,
    },
    /// `Pi = 0`.
    Reference,
    /// Delta-type vertex conditions on a graph model.
    Vertices {
        groups: Vec<VertexGroup>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Spectrum {
        window: [f64; 2],
        #[serde(default)]
        grid: Option<usize>,
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default = "yes")]
        allow_gaps: bool,
    },
    Resolvent {
        #[serde(with = "krein_ext::serde_util::complex")]
        z: Complex64,
        input: InputSpec,
        /// Samples per edge for line models.
        #[serde(default)]
        nodes: Option<usize>,
        /// Evaluation points for point models.
        #[serde(default)]
        points: Option<Vec<[f64; 3]>>,
    },
    Convert {
        #[serde(default)]
        target: ConvertTarget,
    },
    Verify {
        #[serde(default)]
        flip_gamma_sign: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvertTarget {
    #[default]
    All,
    Params,
    Pair,
    Relation,
    VonNeumann,
}

/// Named right-hand sides for the resolvent task.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    /// `sin(k x)` on every edge.
    SinK {
        #[serde(default = "unit")]
        k: f64,
    },
    /// `x (a - x)` on every edge.
    PolyBump,
    /// `G(w) xi` for point models.
    GreenAtCenter {
        #[serde(default = "default_w", with = "krein_ext::serde_util::complex")]
        w: Complex64,
        #[serde(default, with = "optional_vector")]
        xi: Option<CVector>,
    },
}

fn unit() -> f64 {
    1.0
}

fn default_w() -> Complex64 {
    Complex64::new(0.0, 3.0)
}

mod optional_vector {
    use super::*;
    use serde::Deserializer;

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CVector>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "krein_ext::serde_util::vector")] CVector);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// The extension resolved against the model, with the pair kept if given.
pub struct Resolved {
    pub params: ExtensionParams,
    pub pair: Option<BoundaryPair>,
}

impl ExtensionSpec {
    pub fn resolve(&self, model: &Model) -> Result<Resolved> {
        use krein_ext::krein::WeylSystem;
        let n = model.dim();
        let (params, pair) = match self {
            ExtensionSpec::Params(p) => (p.clone(), None),
            ExtensionSpec::Pair(bp) => {
                if bp.b1.shape() != (n, n) || bp.b2.shape() != (n, n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: bp.b1.nrows(),
                    });
                }
                (params_from_pair(bp)?, Some(bp.clone()))
            }
            ExtensionSpec::Robin { theta } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidParams("Robin theta must be finite".into()));
                }
                (ExtensionParams::scalar(n, *theta), None)
            }
            ExtensionSpec::Reference => (ExtensionParams::reference(n), None),
            ExtensionSpec::Vertices { groups } => match model {
                Model::Graph(g) => (vertex_params(g, groups)?, None),
                _ => return Err(Error::Unsupported("vertex conditions need a graph model".into())),
            },
        };
        if params.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: params.dim(),
            });
        }
        Ok(Resolved { params, pair })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_extension_kind() {
        let texts = [
            r#"{"kind":"params","pi":[[[1,0]]],"theta":[[[0.5,0]]]}"#,
            r#"{"kind":"pair","b1":[[[0,0]]],"b2":[[[0,-1]]]}"#,
            r#"{"kind":"robin","theta":2.0}"#,
            r#"{"kind":"reference"}"#,
        ];
        for t in texts {
            serde_json::from_str::<ExtensionSpec>(t).unwrap();
        }
        assert!(
            serde_json::from_str::<ExtensionSpec>(r#"{"kind":"params","pi":[[[2,0]]],"theta":[[[0,0]]]}"#).is_err()
        );
    }

    #[test]
    fn rejects_two_tasks_and_unknown_fields() {
        let base = r#"{"model":{"type":"interval","a":1.0},"extension":{"kind":"reference"},"#;
        let ok = format!(r#"{base}"task":{{"type":"verify"}}}}"#);
        serde_json::from_str::<JobConfig>(&ok).unwrap();
        let extra = format!(r#"{base}"task":{{"type":"verify","window":[0,1]}}}}"#);
        assert!(serde_json::from_str::<JobConfig>(&extra).is_err());
        let missing = r#"{"model":{"type":"interval","a":1.0},"extension":{"kind":"reference"}}"#;
        assert!(serde_json::from_str::<JobConfig>(missing).is_err());
    }
}
