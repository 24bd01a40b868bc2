//! JSON model files: `{"type": "discrete" | "ising" | "symmetric" | "linear",
//! "tree": {...}, ...params}`, plus the corruption-spec schema used by the
//! CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{Channel, CorruptionSpec, DiscreteTreeModel, IsingParams, LinearTreeModel};
use crate::tree::NodeLabel;

use super::tree_json::TreeJson;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelJson {
    Symmetric {
        tree: TreeJson,
        r: usize,
        /// Uniform theta, or per-edge entries; exactly one must be present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thetas: Option<Vec<(NodeLabel, NodeLabel, f64)>>,
    },
    Ising {
        tree: TreeJson,
        field: Vec<(NodeLabel, f64)>,
        couplings: Vec<(NodeLabel, NodeLabel, f64)>,
    },
    Discrete {
        tree: TreeJson,
        root: NodeLabel,
        root_dist: Vec<f64>,
        transitions: Vec<TransitionJson>,
    },
    Linear {
        tree: TreeJson,
        root: NodeLabel,
        root_mean: f64,
        root_var: f64,
        coeffs: Vec<(NodeLabel, NodeLabel, f64)>,
        noise_vars: Vec<(NodeLabel, NodeLabel, f64)>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: NodeLabel,
    pub to: NodeLabel,
    pub matrix: Vec<Vec<f64>>,
}

/// A parsed model file, ready to use.
pub enum ModelFile {
    Discrete(DiscreteTreeModel<f64>),
    Linear(LinearTreeModel<f64>),
}

impl ModelJson {
    pub fn parse(s: &str) -> Result<ModelJson> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn into_model(self) -> Result<ModelFile> {
        match self {
            ModelJson::Symmetric { tree, r, theta, thetas } => {
                let tree = tree.into_tree()?;
                let thetas: BTreeMap<(NodeLabel, NodeLabel), f64> = match (theta, thetas) {
                    (Some(t), None) => tree.edges().map(|e| (e, t)).collect(),
                    (None, Some(list)) => list.into_iter().map(|(u, v, t)| ((u, v), t)).collect(),
                    _ => {
                        return Err(Error::Config(
                            "symmetric model needs exactly one of 'theta' or 'thetas'".into(),
                        ))
                    }
                };
                Ok(ModelFile::Discrete(DiscreteTreeModel::from_symmetric(
                    &tree, r, &thetas,
                )?))
            }
            ModelJson::Ising { tree, field, couplings } => {
                let tree = tree.into_tree()?;
                let params = IsingParams::new(
                    tree,
                    field.into_iter().collect(),
                    couplings.into_iter().map(|(u, v, b)| ((u, v), b)).collect(),
                )?;
                Ok(ModelFile::Discrete(params.to_discrete(None)?))
            }
            ModelJson::Discrete { tree, root, root_dist, transitions } => {
                let tree = tree.into_tree()?;
                let transitions = transitions
                    .into_iter()
                    .map(|t| {
                        let m = Matrix::from_rows(
                            &t.matrix.to_vec(),
                        )?;
                        Ok(((t.from, t.to), m))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                Ok(ModelFile::Discrete(DiscreteTreeModel::new(
                    tree, root, root_dist, transitions,
                )?))
            }
            ModelJson::Linear { tree, root, root_mean, root_var, coeffs, noise_vars } => {
                let tree = tree.into_tree()?;
                Ok(ModelFile::Linear(LinearTreeModel::new(
                    tree,
                    root,
                    root_mean,
                    root_var,
                    coeffs.into_iter().map(|(u, v, l)| ((u, v), l)).collect(),
                    noise_vars.into_iter().map(|(u, v, s)| ((u, v), s)).collect(),
                )?))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelJson {
    UniformFlip { q: f64 },
    Stochastic { matrix: Vec<Vec<f64>> },
    Beta { alpha0: f64, beta0: f64, alpha1: f64, beta1: f64 },
    /// Symmetric discrete channel pinned to a noise edge length.
    SymmetricForLength { r: usize, ell: f64 },
}

impl ChannelJson {
    pub fn into_channel(self) -> Result<Channel<f64>> {
        match self {
            ChannelJson::UniformFlip { q } => Channel::uniform_flip(q),
            ChannelJson::Stochastic { matrix } => {
                Channel::stochastic(Matrix::from_rows(&matrix)?)
            }
            ChannelJson::Beta { alpha0, beta0, alpha1, beta1 } => {
                Channel::beta(alpha0, beta0, alpha1, beta1)
            }
            ChannelJson::SymmetricForLength { r, ell } => Channel::symmetric_for_length(r, ell),
        }
    }
}

/// Corruption spec file: a default channel and/or per-node overrides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorruptionJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<ChannelJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<(NodeLabel, ChannelJson)>,
}

impl CorruptionJson {
    pub fn parse(s: &str) -> Result<CorruptionJson> {
        Ok(serde_json::from_str(s)?)
    }

    /// Resolves against the columns it must cover.
    pub fn into_spec(self, labels: &[NodeLabel]) -> Result<CorruptionSpec<f64>> {
        let overrides: BTreeMap<NodeLabel, ChannelJson> = self.channels.into_iter().collect();
        let mut map = BTreeMap::new();
        for &l in labels {
            let json = overrides.get(&l).cloned().or_else(|| self.default.clone());
            let json = json.ok_or_else(|| {
                Error::SpecMismatch(format!("no channel for column {l} and no default"))
            })?;
            map.insert(l, json.into_channel()?);
        }
        Ok(CorruptionSpec::new(map))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::LabeledTree;

    #[test]
    fn symmetric_model_file_round_trip() {
        let tree = LabeledTree::<f64>::new([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let json = ModelJson::Symmetric {
            tree: TreeJson::from_tree(&tree),
            r: 2,
            theta: Some(0.2),
            thetas: None,
        };
        let s = serde_json::to_string(&json).unwrap();
        let ModelFile::Discrete(model) = ModelJson::parse(&s).unwrap().into_model().unwrap()
        else {
            panic!("expected a discrete model");
        };
        assert_eq!(model.r(), 2);
        assert_eq!(model.root(), 2);
    }

    #[test]
    fn ising_model_file_parses() {
        let s = r#"{
            "type": "ising",
            "tree": {"nodes": [1, 2], "edges": [[1, 2]]},
            "field": [[1, 0.0], [2, 0.0]],
            "couplings": [[1, 2, 1.0]]
        }"#;
        let ModelFile::Discrete(model) = ModelJson::parse(s).unwrap().into_model().unwrap()
        else {
            panic!("expected a discrete model");
        };
        assert_eq!(model.r(), 2);
    }

    #[test]
    fn linear_model_file_parses() {
        let s = r#"{
            "type": "linear",
            "tree": {"nodes": [1, 2, 3], "edges": [[1, 2], [2, 3]]},
            "root": 2,
            "root_mean": 0.0,
            "root_var": 1.0,
            "coeffs": [[2, 1, 0.8], [2, 3, 0.5]],
            "noise_vars": [[2, 1, 0.4], [2, 3, 0.6]]
        }"#;
        let ModelFile::Linear(model) = ModelJson::parse(s).unwrap().into_model().unwrap()
        else {
            panic!("expected a linear model");
        };
        assert!((model.correlation(1, 3).unwrap()
            - model.edge_correlation(1, 2).unwrap() * model.edge_correlation(2, 3).unwrap())
        .abs()
            < 1e-15);
    }

    #[test]
    fn corruption_spec_resolves_defaults_and_overrides() {
        let s = r#"{
            "default": {"kind": "uniform_flip", "q": 0.1},
            "channels": [[2, {"kind": "beta", "alpha0": 1, "beta0": 2, "alpha1": 2, "beta1": 1}]]
        }"#;
        let json = CorruptionJson::parse(s).unwrap();
        let spec = json.into_spec(&[1, 2]).unwrap();
        assert!(matches!(spec.channel(1), Some(Channel::UniformFlip { .. })));
        assert!(matches!(spec.channel(2), Some(Channel::Beta { .. })));
    }
}
