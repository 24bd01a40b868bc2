//! Contraction of short internal edges: fixed-tolerance shrinking to undo
//! the forced binary resolution of Neighbor-Joining, and shrinking to a
//! binary core when that shape is known in advance.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::tree::{LabeledTree, NodeLabel, SemiLabeledTree};

/// Result of a shrinking pass: the contracted tree (inner labels carry no
/// identity) and the contracted edges in contraction order.
#[derive(Clone, Debug)]
pub struct ShrinkOutcome<F> {
    pub tree: SemiLabeledTree<F>,
    pub shrunk_edges: Vec<(NodeLabel, NodeLabel)>,
}

/// Internal edges (both endpoints non-leaf) with their lengths, sorted by
/// (length, label pair).
fn internal_edges<F: Real>(tree: &LabeledTree<F>) -> Vec<(F, NodeLabel, NodeLabel)> {
    let mut out: Vec<(F, NodeLabel, NodeLabel)> = tree
        .edges()
        .filter(|&(u, v)| !tree.is_leaf(u) && !tree.is_leaf(v))
        .map(|(u, v)| (tree.edge_length(u, v).expect("lengths required"), u, v))
        .collect();
    out.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite lengths")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    out
}

/// Contracts every internal edge shorter than `epsilon` (strictly; equal
/// lengths are kept), in ascending length order with deterministic ties.
/// External edges are never contracted, so the leaf set is preserved.
pub fn shrink_edges<F: Real>(tree: &LabeledTree<F>, epsilon: F) -> Result<ShrinkOutcome<F>> {
    if !tree.has_lengths() {
        return Err(Error::InvalidParameter("shrinking needs edge lengths".into()));
    }
    if epsilon.is_nan() || epsilon < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "shrink tolerance {epsilon} must be nonnegative"
        )));
    }
    let mut current = tree.clone();
    let mut shrunk = Vec::new();
    loop {
        let candidate = internal_edges(&current)
            .into_iter()
            .find(|&(len, _, _)| len < epsilon);
        match candidate {
            None => break,
            Some((_, u, v)) => {
                current = current.contract_edge(u, v);
                shrunk.push((u, v));
            }
        }
    }
    Ok(ShrinkOutcome {
        tree: SemiLabeledTree::new(current),
        shrunk_edges: shrunk,
    })
}

/// Degrees within the core (the subgraph induced on non-leaf nodes).
fn core_degrees<F: Real>(tree: &LabeledTree<F>) -> Vec<usize> {
    tree.inner_nodes()
        .iter()
        .map(|&u| tree.neighbors(u).filter(|&w| !tree.is_leaf(w)).count())
        .collect()
}

/// True when the leaf-stripped core is a binary tree: every core node has
/// core-degree one or three. Cores of at most two nodes count as binary.
fn core_is_binary<F: Real>(tree: &LabeledTree<F>) -> bool {
    let degrees = core_degrees(tree);
    degrees.len() <= 2 || degrees.iter().all(|&d| d == 1 || d == 3)
}

/// Repeatedly contracts the currently shortest internal edge until the core
/// is a binary tree. Used when the underlying tree is known to have a binary
/// core, in place of a fixed tolerance.
pub fn shrink_to_binary_prior<F: Real>(tree: &LabeledTree<F>) -> Result<ShrinkOutcome<F>> {
    if !tree.has_lengths() {
        return Err(Error::InvalidParameter("shrinking needs edge lengths".into()));
    }
    let mut current = tree.clone();
    let mut shrunk = Vec::new();
    while !core_is_binary(&current) {
        let Some(&(_, u, v)) = internal_edges(&current).first() else {
            return Err(Error::NotReducible(
                "no internal edges left but the core is not binary".into(),
            ));
        };
        current = current.contract_edge(u, v);
        shrunk.push((u, v));
    }
    Ok(ShrinkOutcome {
        tree: SemiLabeledTree::new(current),
        shrunk_edges: shrunk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type Tree = LabeledTree<f64>;

    #[test]
    fn zero_tolerance_changes_nothing() {
        let t = Tree::with_lengths(
            [1, 2, 3, 4, 10, 11],
            [
                (1, 10, 1.0),
                (2, 10, 1.0),
                (10, 11, 0.0),
                (3, 11, 1.0),
                (4, 11, 1.0),
            ],
        )
        .unwrap();
        let out = shrink_edges(&t, 0.0).unwrap();
        assert!(out.shrunk_edges.is_empty());
        assert_eq!(out.tree.underlying().node_count(), 6);
    }

    #[test]
    fn short_internal_edge_contracts() {
        let t = Tree::with_lengths(
            [1, 2, 3, 4, 10, 11],
            [
                (1, 10, 1.0),
                (2, 10, 1.0),
                (10, 11, 0.01),
                (3, 11, 1.0),
                (4, 11, 1.0),
            ],
        )
        .unwrap();
        let out = shrink_edges(&t, 0.5).unwrap();
        assert_eq!(out.shrunk_edges, vec![(10, 11)]);
        let star = Tree::new([1, 2, 3, 4, 10], [(1, 10), (2, 10), (3, 10), (4, 10)]).unwrap();
        assert!(out.tree == SemiLabeledTree::new(star));
    }

    #[test]
    fn equality_with_epsilon_keeps_the_edge() {
        let t = Tree::with_lengths(
            [1, 2, 3, 4, 10, 11],
            [
                (1, 10, 1.0),
                (2, 10, 1.0),
                (10, 11, 0.5),
                (3, 11, 1.0),
                (4, 11, 1.0),
            ],
        )
        .unwrap();
        let out = shrink_edges(&t, 0.5).unwrap();
        assert!(out.shrunk_edges.is_empty());
    }

    #[test]
    fn leaf_edges_survive_any_tolerance() {
        let t = Tree::with_lengths([1, 2, 3, 10], [(1, 10, 0.001), (2, 10, 0.001), (3, 10, 0.001)])
            .unwrap();
        let out = shrink_edges(&t, 100.0).unwrap();
        assert!(out.shrunk_edges.is_empty());
        assert_eq!(out.tree.leaf_labels().len(), 3);
    }

    #[test]
    fn large_tolerance_collapses_to_a_star() {
        // Caterpillar with three internal nodes collapses fully.
        let t = Tree::with_lengths(
            [1, 2, 3, 4, 5, 11, 12, 13],
            [
                (1, 11, 1.0),
                (2, 11, 1.0),
                (11, 12, 0.4),
                (3, 12, 1.0),
                (12, 13, 0.3),
                (4, 13, 1.0),
                (5, 13, 1.0),
            ],
        )
        .unwrap();
        let out = shrink_edges(&t, 10.0).unwrap();
        assert_eq!(out.shrunk_edges.len(), 2);
        // Ascending length order: (12,13) then the merged (11,12).
        assert_eq!(out.shrunk_edges[0], (12, 13));
        let star = Tree::new(
            [1, 2, 3, 4, 5, 11],
            [(1, 11), (2, 11), (3, 11), (4, 11), (5, 11)],
        )
        .unwrap();
        assert!(out.tree == SemiLabeledTree::new(star));
    }

    #[test]
    fn binary_prior_leaves_matching_shapes_alone() {
        // Core 10-11: degrees (1, 1) -> already binary.
        let t = Tree::with_lengths(
            [1, 2, 3, 4, 10, 11],
            [
                (1, 10, 1.0),
                (2, 10, 1.0),
                (10, 11, 0.2),
                (3, 11, 1.0),
                (4, 11, 1.0),
            ],
        )
        .unwrap();
        let out = shrink_to_binary_prior(&t).unwrap();
        assert!(out.shrunk_edges.is_empty());
    }

    #[test]
    fn binary_prior_contracts_spurious_short_edge() {
        // A core path of three nodes has a degree-two core node; the
        // shortest internal edge (0.01) goes first and yields a binary core.
        let t = Tree::with_lengths(
            [1, 2, 3, 4, 5, 6, 11, 12, 13],
            [
                (1, 11, 1.0),
                (2, 11, 1.0),
                (11, 12, 0.01),
                (3, 12, 1.0),
                (12, 13, 1.0),
                (4, 13, 1.0),
                (5, 13, 1.0),
                (6, 12, 1.0),
            ],
        )
        .unwrap();
        let out = shrink_to_binary_prior(&t).unwrap();
        assert_eq!(out.shrunk_edges, vec![(11, 12)]);
    }
}
