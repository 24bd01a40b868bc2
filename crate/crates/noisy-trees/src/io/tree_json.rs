//! Lossless JSON form of a labeled tree: `{nodes, edges, lengths,
//! noisy_offset}` with `lengths` parallel to `edges` when present.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{LabeledTree, NodeLabel};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeJson {
    pub nodes: Vec<NodeLabel>,
    pub edges: Vec<(NodeLabel, NodeLabel)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noisy_offset: Option<NodeLabel>,
}

impl TreeJson {
    pub fn from_tree(tree: &LabeledTree<f64>) -> Self {
        let edges: Vec<(NodeLabel, NodeLabel)> = tree.edges().collect();
        let lengths = tree.has_lengths().then(|| {
            edges
                .iter()
                .map(|&(u, v)| tree.edge_length(u, v).expect("edge present"))
                .collect()
        });
        TreeJson {
            nodes: tree.nodes().collect(),
            edges,
            lengths,
            noisy_offset: tree.noisy_offset(),
        }
    }

    pub fn into_tree(self) -> Result<LabeledTree<f64>> {
        let mut tree = match self.lengths {
            Some(lengths) => {
                if lengths.len() != self.edges.len() {
                    return Err(Error::Parse(format!(
                        "{} lengths for {} edges",
                        lengths.len(),
                        self.edges.len()
                    )));
                }
                LabeledTree::with_lengths(
                    self.nodes,
                    self.edges
                        .iter()
                        .zip(lengths)
                        .map(|(&(u, v), l)| (u, v, l)),
                )?
            }
            None => LabeledTree::new(self.nodes, self.edges)?,
        };
        tree.set_noisy_offset(self.noisy_offset);
        Ok(tree)
    }
}

pub fn write_tree_json(tree: &LabeledTree<f64>) -> String {
    serde_json::to_string_pretty(&TreeJson::from_tree(tree)).expect("serializable")
}

pub fn parse_tree_json(s: &str) -> Result<LabeledTree<f64>> {
    let json: TreeJson = serde_json::from_str(s)?;
    json.into_tree()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_preserves_everything() {
        let t = LabeledTree::<f64>::with_lengths(1..=4, [(1, 2, 0.5), (2, 3, 1.5), (2, 4, 0.0)])
            .unwrap()
            .augment_with_lengths(&(1..=4).map(|v| (v, 0.1)).collect())
            .unwrap();
        let s = write_tree_json(&t);
        let back = parse_tree_json(&s).unwrap();
        assert!(back.same_topology(&t));
        assert_eq!(back.noisy_offset(), t.noisy_offset());
        for (u, v) in t.edges() {
            assert_eq!(back.edge_length(u, v), t.edge_length(u, v));
        }
    }

    #[test]
    fn invalid_trees_are_rejected() {
        let bad = r#"{"nodes": [1, 2, 3], "edges": [[1, 2]]}"#;
        assert!(parse_tree_json(bad).is_err());
    }
}
