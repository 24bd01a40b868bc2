//! Extraction of the underlying tree from the suppressed augmented tree.
//!
//! Every inner node of the suppressed augmented tree carries at least one
//! noisy-copy leaf; under the noise-dominance condition the shortest of its
//! terminal edges is the node's own copy. Shrinking exactly that edge per
//! inner node (promoting the leaf's clean label onto the node) and stripping
//! the remaining leaf labels yields the underlying tree.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::num::{real, Real};
use crate::tree::{LabeledTree, NodeLabel};

/// Tie tolerance when comparing terminal edge lengths.
const TIE_TOLERANCE: f64 = 1e-9;

/// Extraction result: the tree over clean labels, plus the inner nodes whose
/// shortest terminal edge was tied within tolerance (resolved toward the
/// node's own copy when the labels pair up, else toward the lowest label).
#[derive(Clone, Debug)]
pub struct Extraction<F> {
    pub tree: LabeledTree<F>,
    pub ambiguous: Vec<NodeLabel>,
}

/// Recovers the underlying tree from a suppressed augmented tree whose
/// leaves live in the noisy namespace `offset + label` and whose terminal
/// edges carry lengths.
pub fn extract_tstar<F: Real>(tree: &LabeledTree<F>, offset: NodeLabel) -> Result<Extraction<F>> {
    if !tree.has_lengths() {
        return Err(Error::InvalidParameter(
            "extraction needs terminal edge lengths".into(),
        ));
    }
    let leaves = tree.leaves();
    for &leaf in &leaves {
        if leaf < offset {
            return Err(Error::InvalidParameter(format!(
                "leaf {leaf} is below the noisy-label offset {offset}"
            )));
        }
    }
    let inner = tree.inner_nodes();
    if inner.is_empty() {
        // A single edge of two noisy leaves strips directly.
        let stripped: Vec<NodeLabel> = leaves.iter().map(|&l| l - offset).collect();
        let tree = LabeledTree::new(stripped.clone(), [(stripped[0], stripped[1])])?;
        return Ok(Extraction {
            tree,
            ambiguous: Vec::new(),
        });
    }

    let tol = real::<F>(TIE_TOLERANCE);
    let mut promoted: BTreeMap<NodeLabel, NodeLabel> = BTreeMap::new();
    let mut ambiguous = Vec::new();
    for &u in &inner {
        let mut terminal: Vec<(F, NodeLabel)> = tree
            .neighbors(u)
            .filter(|&w| tree.is_leaf(w))
            .map(|w| (tree.edge_length(u, w).expect("lengths present"), w))
            .collect();
        if terminal.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "inner node {u} has no attached leaf; not a suppressed augmented tree"
            )));
        }
        terminal.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite lengths")
                .then(a.1.cmp(&b.1))
        });
        let shortest = terminal[0].0;
        let tied: Vec<NodeLabel> = terminal
            .iter()
            .take_while(|&&(len, _)| len - shortest <= tol)
            .map(|&(_, w)| w)
            .collect();
        let choice = if tied.len() == 1 {
            tied[0]
        } else {
            ambiguous.push(u);
            // Prefer the node's own copy when the pairing metadata applies.
            let own_copy = offset.checked_add(u).filter(|c| tied.contains(c));
            own_copy.unwrap_or(tied[0])
        };
        promoted.insert(u, choice);
    }

    // Rebuild on clean labels: inner nodes take their promoted leaf's
    // stripped label, remaining leaves strip in place.
    let chosen: BTreeSet<NodeLabel> = promoted.values().copied().collect();
    let rename = |v: NodeLabel| -> NodeLabel {
        if let Some(&leaf) = promoted.get(&v) {
            leaf - offset
        } else {
            debug_assert!(tree.is_leaf(v));
            v - offset
        }
    };
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for v in tree.nodes() {
        if !chosen.contains(&v) {
            let newv = rename(v);
            if !nodes.insert(newv) {
                return Err(Error::InvalidParameter(format!(
                    "label {newv} appears twice after extraction; malformed input tree"
                )));
            }
        }
    }
    for (a, b) in tree.edges() {
        if chosen.contains(&a) || chosen.contains(&b) {
            continue;
        }
        let (la, lb, len) = (rename(a), rename(b), tree.edge_length(a, b).expect("lengths"));
        edges.push((la, lb, len));
    }
    let tree = LabeledTree::with_lengths(nodes, edges)?;
    Ok(Extraction { tree, ambiguous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    type Tree = LabeledTree<f64>;

    fn example_tree_with_unit_lengths() -> Tree {
        Tree::with_lengths(
            1..=5,
            [(1, 2, 1.0), (1, 3, 1.0), (2, 4, 1.0), (2, 5, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn exact_suppressed_augmentation_extracts_the_origin() {
        let t = example_tree_with_unit_lengths();
        let ells: BTreeMap<u64, f64> = (1..=5).map(|v| (v, 0.5)).collect();
        let tbar_e = t.augment_with_lengths(&ells).unwrap().suppress_degree_two();
        let out = extract_tstar(&tbar_e, 1000).unwrap();
        assert!(out.ambiguous.is_empty());
        assert!(out.tree.same_topology(&t.without_lengths()));
    }

    #[test]
    fn single_leaf_inner_nodes_are_forced() {
        // Node 4 in the suppressed augmentation of a chain keeps only its
        // own copy; extraction must shrink it regardless of length.
        let chain = Tree::with_lengths(1..=4, [(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let ells = BTreeMap::from([(1, 3.0), (2, 0.1), (3, 0.1), (4, 3.0)]);
        let tbar_e = chain.augment_with_lengths(&ells).unwrap().suppress_degree_two();
        let out = extract_tstar(&tbar_e, 1000).unwrap();
        assert!(out.tree.same_topology(&chain.without_lengths()));
    }

    #[test]
    fn noise_dominance_violation_gives_a_swapped_member() {
        // Make the copy of mother 2 longer than the path to leaf 5's copy:
        // ell_2 > d(2,5) + ell_5 swaps 2 with 5 in the output.
        let t = example_tree_with_unit_lengths();
        let ells = BTreeMap::from([(1, 0.1), (2, 2.0), (3, 0.1), (4, 0.5), (5, 0.1)]);
        let tbar_e = t.augment_with_lengths(&ells).unwrap().suppress_degree_two();
        let out = extract_tstar(&tbar_e, 1000).unwrap();
        assert!(!out.tree.same_topology(&t.without_lengths()));
        // The result is the class member with labels 2 and 5 exchanged.
        let swapped = Tree::new(1..=5, [(1, 5), (1, 3), (5, 4), (5, 2)]).unwrap();
        assert!(out.tree.same_topology(&swapped));
        // And it is in the equivalence class of the original.
        use crate::tree::SemiLabeledTree;
        let want = SemiLabeledTree::new(t.augment().suppress_degree_two());
        let got = SemiLabeledTree::new(out.tree.augment().suppress_degree_two());
        assert!(got == want);
    }

    #[test]
    fn ties_resolve_toward_the_own_copy_and_report() {
        // Mother 2's copy and leaf 4's copy tie exactly: prefer 2's copy.
        let t = example_tree_with_unit_lengths();
        let ells = BTreeMap::from([(1, 0.1), (2, 1.2), (3, 0.1), (4, 0.2), (5, 0.3)]);
        // d(2, 4^e) = 1.0 + 0.2 = 1.2 == ell_2.
        let tbar_e = t.augment_with_lengths(&ells).unwrap().suppress_degree_two();
        let out = extract_tstar(&tbar_e, 1000).unwrap();
        assert_eq!(out.ambiguous, vec![2]);
        assert!(out.tree.same_topology(&t.without_lengths()));
    }

    #[test]
    fn two_leaf_input_strips_directly() {
        let edge = Tree::with_lengths([1001, 1002], [(1001, 1002, 2.0)]).unwrap();
        let out = extract_tstar(&edge, 1000).unwrap();
        assert!(out.tree.same_topology(&Tree::new([1, 2], [(1, 2)]).unwrap()));
    }

    #[test]
    fn rejects_inner_nodes_without_leaves() {
        // A caterpillar whose middle inner node has no leaf attached.
        let bad = Tree::with_lengths(
            [1001, 1002, 1003, 1004, 10, 11, 12],
            [
                (1001, 10, 1.0),
                (1002, 10, 1.0),
                (10, 11, 1.0),
                (11, 12, 1.0),
                (1003, 12, 1.0),
                (1004, 12, 1.0),
            ],
        )
        .unwrap();
        assert!(extract_tstar(&bad, 1000).is_err());
    }
}
