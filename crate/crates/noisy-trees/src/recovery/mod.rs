//! Structure recovery from distance matrices: Chow-Liu and Neighbor-Joining,
//! shrinking of spurious internal edges, extraction of the underlying tree,
//! and an orchestrating [`recover`] pipeline with Robinson-Foulds
//! diagnostics.

mod chow_liu;
mod extract;
mod nj;
mod shrink;

pub use chow_liu::{check_chow_liu_consistency, chow_liu, ConsistencyReport};
pub use extract::{extract_tstar, Extraction};
pub use nj::{neighbor_joining, NjOutcome};
pub use shrink::{shrink_edges, shrink_to_binary_prior, ShrinkOutcome};

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;
use crate::num::Real;
use crate::tree::{robinson_foulds_normalized, LabeledTree, NodeLabel, SemiLabeledTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ChowLiu,
    NeighborJoining,
}

/// What the pipeline should produce: the suppressed augmented tree that
/// represents the identifiable class, or the underlying tree itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryTarget {
    SuppressedNoisyTree,
    UnderlyingTree,
}

/// Deterministic ordering rule used to break ties in edge selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Ascending (weight, label pair) order.
    #[default]
    Lexicographic,
}

#[derive(Clone, Debug)]
pub struct RecoveryConfig<F> {
    pub method: Method,
    /// Internal edges strictly shorter than this are contracted after
    /// Neighbor-Joining.
    pub epsilon: F,
    /// Shrink to a binary core instead of using the tolerance.
    pub binary_prior: bool,
    pub tie_break: TieBreak,
    pub target: RecoveryTarget,
    /// Noisy-label offset of the distance labels, required to extract the
    /// underlying tree.
    pub noisy_offset: Option<NodeLabel>,
}

impl<F: Real> Default for RecoveryConfig<F> {
    fn default() -> Self {
        RecoveryConfig {
            method: Method::NeighborJoining,
            epsilon: F::zero(),
            binary_prior: false,
            tie_break: TieBreak::Lexicographic,
            target: RecoveryTarget::SuppressedNoisyTree,
            noisy_offset: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryDiagnostics<F> {
    /// Normalized Robinson-Foulds distance to the reference tree, when one
    /// was supplied.
    pub rf_to_reference: Option<F>,
    /// Whether the extracted underlying tree matches the reference exactly.
    pub underlying_exact: Option<bool>,
    pub flags: Vec<String>,
}

impl<F> Default for RecoveryDiagnostics<F> {
    fn default() -> Self {
        RecoveryDiagnostics {
            rf_to_reference: None,
            underlying_exact: None,
            flags: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryResult<F> {
    /// The reconstructed tree after the method and any shrinking; inner
    /// labels carry no identity.
    pub tree: SemiLabeledTree<F>,
    /// The extracted underlying tree, when requested.
    pub underlying: Option<LabeledTree<F>>,
    pub shrunk_edges: Vec<(NodeLabel, NodeLabel)>,
    pub diagnostics: RecoveryDiagnostics<F>,
}

impl<F: Real> RecoveryResult<F> {
    /// Attaches Robinson-Foulds and exact-match diagnostics against
    /// reference trees (the suppressed augmented tree, and optionally the
    /// underlying tree).
    pub fn diagnose_against(
        &mut self,
        reference: &LabeledTree<F>,
        reference_underlying: Option<&LabeledTree<F>>,
    ) -> Result<()> {
        let rf = robinson_foulds_normalized(&self.tree, &SemiLabeledTree::new(reference.clone()))?;
        self.diagnostics.rf_to_reference = Some(rf);
        if let (Some(got), Some(want)) = (&self.underlying, reference_underlying) {
            self.diagnostics.underlying_exact = Some(got.same_topology(want));
        }
        Ok(())
    }
}

/// Runs the configured pipeline on a distance matrix:
/// method -> shrinking (Neighbor-Joining only) -> optional extraction.
pub fn recover<F: Real>(
    distances: &DistanceMatrix<F>,
    config: &RecoveryConfig<F>,
) -> Result<RecoveryResult<F>> {
    let TieBreak::Lexicographic = config.tie_break;
    let mut flags: Vec<String> = distances
        .flagged()
        .iter()
        .map(|&(u, v)| format!("degenerate-estimate:({u},{v})"))
        .collect();

    match config.method {
        Method::ChowLiu => {
            let tree = chow_liu(distances);
            let underlying = match config.target {
                RecoveryTarget::SuppressedNoisyTree => None,
                RecoveryTarget::UnderlyingTree => Some(match config.noisy_offset {
                    // The spanning tree is already the estimate of the
                    // underlying tree; strip labels when they are noisy.
                    Some(offset) => strip_labels(&tree, offset)?,
                    None => tree.clone(),
                }),
            };
            Ok(RecoveryResult {
                tree: SemiLabeledTree::new(tree),
                underlying,
                shrunk_edges: Vec::new(),
                diagnostics: RecoveryDiagnostics {
                    flags,
                    ..Default::default()
                },
            })
        }
        Method::NeighborJoining => {
            let nj = neighbor_joining(distances)?;
            for &(u, v) in &nj.clamped_edges {
                flags.push(format!("negative-branch-clamped:({u},{v})"));
            }
            let shrunk = if config.binary_prior {
                shrink_to_binary_prior(&nj.tree)?
            } else {
                shrink_edges(&nj.tree, config.epsilon)?
            };
            let underlying = match config.target {
                RecoveryTarget::SuppressedNoisyTree => None,
                RecoveryTarget::UnderlyingTree => {
                    let offset = config.noisy_offset.ok_or_else(|| {
                        Error::Config(
                            "extracting the underlying tree needs the noisy-label offset".into(),
                        )
                    })?;
                    let extraction = extract_tstar(shrunk.tree.underlying(), offset)?;
                    for &u in &extraction.ambiguous {
                        flags.push(format!("ambiguous-terminal-minimum:{u}"));
                    }
                    Some(extraction.tree)
                }
            };
            Ok(RecoveryResult {
                tree: shrunk.tree,
                underlying,
                shrunk_edges: shrunk.shrunk_edges,
                diagnostics: RecoveryDiagnostics {
                    flags,
                    ..Default::default()
                },
            })
        }
    }
}

/// Maps noisy labels back to clean ones on a tree whose node set is entirely
/// in the noisy namespace.
fn strip_labels<F: Real>(tree: &LabeledTree<F>, offset: NodeLabel) -> Result<LabeledTree<F>> {
    for v in tree.nodes() {
        if v < offset {
            return Err(Error::InvalidParameter(format!(
                "node {v} is below the noisy-label offset {offset}"
            )));
        }
    }
    let nodes: Vec<NodeLabel> = tree.nodes().map(|v| v - offset).collect();
    let edges: Vec<(NodeLabel, NodeLabel)> =
        tree.edges().map(|(u, v)| (u - offset, v - offset)).collect();
    LabeledTree::new(nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{distance_matrix_exact, Provenance};
    use crate::model::{Channel, CorruptionSpec, DiscreteTreeModel};
    use std::collections::BTreeMap;

    type Tree = LabeledTree<f64>;

    fn example_tree() -> Tree {
        Tree::new(1..=5, [(1, 2), (1, 3), (2, 4), (2, 5)]).unwrap()
    }

    #[test]
    fn exact_pipeline_recovers_shape_and_origin() {
        let t = example_tree();
        let model = DiscreteTreeModel::uniform_symmetric(&t, 2, 0.2).unwrap();
        let spec = CorruptionSpec::homogeneous(1..=5, Channel::symmetric_for_length(2, 0.5).unwrap());
        let d = distance_matrix_exact(&model, Some(&spec)).unwrap();
        let config = RecoveryConfig {
            epsilon: 0.5,
            target: RecoveryTarget::UnderlyingTree,
            noisy_offset: Some(1000),
            ..Default::default()
        };
        let mut result = recover(&d, &config).unwrap();
        let reference = t.augment().suppress_degree_two();
        result.diagnose_against(&reference, Some(&t)).unwrap();
        assert_eq!(result.diagnostics.rf_to_reference, Some(0.0));
        assert_eq!(result.diagnostics.underlying_exact, Some(true));
    }

    #[test]
    fn chow_liu_path_strips_noisy_labels() {
        let t = example_tree();
        let model = DiscreteTreeModel::uniform_symmetric(&t, 2, 0.2).unwrap();
        let spec = CorruptionSpec::homogeneous(1..=5, Channel::symmetric_for_length(2, 0.5).unwrap());
        let d = distance_matrix_exact(&model, Some(&spec)).unwrap();
        let config = RecoveryConfig {
            method: Method::ChowLiu,
            target: RecoveryTarget::UnderlyingTree,
            noisy_offset: Some(1000),
            ..Default::default()
        };
        let result = recover(&d, &config).unwrap();
        assert!(result.underlying.unwrap().same_topology(&t));
    }

    #[test]
    fn missing_offset_is_a_config_error() {
        let d = DistanceMatrix::from_fn(vec![1, 2, 3], Provenance::Exact, |u, v| {
            Ok((u as f64 - v as f64).abs())
        })
        .unwrap();
        let config = RecoveryConfig::<f64> {
            target: RecoveryTarget::UnderlyingTree,
            ..Default::default()
        };
        assert!(matches!(recover(&d, &config), Err(Error::Config(_))));
    }

    #[test]
    fn degenerate_estimates_propagate_as_flags() {
        let mut d = DistanceMatrix::from_fn(vec![1, 2, 3], Provenance::Exact, |u, v| {
            Ok((u as f64 - v as f64).abs())
        })
        .unwrap();
        d.set_flagged(vec![(1, 2)]);
        let result = recover(&d, &RecoveryConfig::default()).unwrap();
        assert!(result.diagnostics.flags.iter().any(|f| f.contains("degenerate")));
    }

    #[test]
    fn noise_dominance_failure_yields_class_member_not_origin() {
        // Exact metric with one mother's own-copy edge longer than the
        // path to a leaf copy: extraction lands on the swapped member.
        let t = example_tree();
        let mut lengths = BTreeMap::new();
        for (u, v) in t.edges() {
            lengths.insert((u, v), 1.0f64);
        }
        let with_lengths = Tree::with_lengths(
            t.nodes(),
            t.edges().map(|(u, v)| (u, v, lengths[&(u, v)])),
        )
        .unwrap();
        let ells = BTreeMap::from([(1, 0.1), (2, 2.0), (3, 0.1), (4, 0.5), (5, 0.1)]);
        let tbar_e = with_lengths
            .augment_with_lengths(&ells)
            .unwrap()
            .suppress_degree_two();
        let d = DistanceMatrix::from_fn(
            tbar_e.leaves(),
            Provenance::Exact,
            |u, v| tbar_e.path_length(u, v),
        )
        .unwrap();
        let config = RecoveryConfig {
            epsilon: 0.5,
            target: RecoveryTarget::UnderlyingTree,
            noisy_offset: Some(1000),
            ..Default::default()
        };
        let result = recover(&d, &config).unwrap();
        let got = result.underlying.unwrap();
        assert!(!got.same_topology(&t));
        // Still in the equivalence class.
        let want = SemiLabeledTree::new(t.augment().suppress_degree_two());
        let view = SemiLabeledTree::new(got.augment().suppress_degree_two());
        assert!(view == want);
    }
}
