//! Binary Ising models on trees with {0,1}-valued spins:
//! `p(x) = exp(sum h_i x_i + sum beta_ij x_i x_j) / Z(h, beta)`.
//!
//! The normalizer and the rooted parameterization come from exact
//! leaf-to-root message passing, capped at [`MAX_EXACT_NODES`] nodes so the
//! unnormalized messages stay in floating-point range.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::num::Real;
use crate::tree::{LabeledTree, NodeLabel};

use super::discrete::{directed_edges, DiscreteTreeModel};

/// Node cap for exact normalizer computation.
pub const MAX_EXACT_NODES: usize = 25;

/// Upward messages indexed by directed edge, one entry per parent state.
type Messages<F> = BTreeMap<(NodeLabel, NodeLabel), [F; 2]>;

/// External fields and pairwise couplings of an Ising model on a tree.
#[derive(Clone, Debug)]
pub struct IsingParams<F> {
    tree: LabeledTree<F>,
    field: BTreeMap<NodeLabel, F>,
    couplings: BTreeMap<(NodeLabel, NodeLabel), F>,
}

impl<F: Real> IsingParams<F> {
    pub fn new(
        tree: LabeledTree<F>,
        field: BTreeMap<NodeLabel, F>,
        couplings: BTreeMap<(NodeLabel, NodeLabel), F>,
    ) -> Result<Self> {
        for v in tree.nodes() {
            let h = field
                .get(&v)
                .ok_or_else(|| Error::InvalidParameter(format!("missing field for node {v}")))?;
            if !h.is_finite() {
                return Err(Error::InvalidParameter(format!("field for node {v} is not finite")));
            }
        }
        for (u, v) in tree.edges() {
            let beta = couplings
                .get(&(u, v))
                .or_else(|| couplings.get(&(v, u)))
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("missing coupling for edge ({u}, {v})"))
                })?;
            if !beta.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "coupling for edge ({u}, {v}) is not finite"
                )));
            }
        }
        Ok(IsingParams {
            tree,
            field,
            couplings,
        })
    }

    /// Same coupling on every edge, zero external field.
    pub fn homogeneous(tree: &LabeledTree<F>, beta: F) -> Result<Self> {
        let field = tree.nodes().map(|v| (v, F::zero())).collect();
        let couplings = tree.edges().map(|e| (e, beta)).collect();
        Self::new(tree.clone(), field, couplings)
    }

    pub fn tree(&self) -> &LabeledTree<F> {
        &self.tree
    }

    pub fn field(&self, v: NodeLabel) -> F {
        self.field[&v]
    }

    pub fn coupling(&self, u: NodeLabel, v: NodeLabel) -> F {
        *self
            .couplings
            .get(&(u, v))
            .or_else(|| self.couplings.get(&(v, u)))
            .expect("coupling present for every edge")
    }

    fn check_size(&self) -> Result<()> {
        let nodes = self.tree.node_count();
        if nodes > MAX_EXACT_NODES {
            return Err(Error::TreeTooLarge {
                nodes,
                max: MAX_EXACT_NODES,
            });
        }
        Ok(())
    }

    /// Upward messages `m_{v -> parent}(x_parent)` for the tree rooted at
    /// `root`, plus the directed edge list used.
    fn messages(&self, root: NodeLabel) -> (Messages<F>, Vec<(NodeLabel, NodeLabel)>) {
        let edges = directed_edges(&self.tree, root);
        let mut messages: Messages<F> = BTreeMap::new();
        // Children come after parents in `edges`, so reverse order is
        // leaf-to-root.
        for &(u, v) in edges.iter().rev() {
            let h_v = self.field[&v];
            let beta = self.coupling(u, v);
            let mut msg = [F::zero(); 2];
            for (xu, slot) in msg.iter_mut().enumerate() {
                let mut total = F::zero();
                for xv in 0..2usize {
                    let xv_f = F::from_usize(xv).expect("0 or 1");
                    let xu_f = F::from_usize(xu).expect("0 or 1");
                    let mut term = (h_v * xv_f + beta * xu_f * xv_f).exp();
                    for w in self.tree.neighbors(v) {
                        if w != u {
                            term *= messages[&(v, w)][xv];
                        }
                    }
                    total += term;
                }
                *slot = total;
            }
            messages.insert((u, v), msg);
        }
        (messages, edges)
    }

    /// Exact normalizer `Z(h, beta)` by leaf-to-root message passing.
    pub fn normalizer(&self) -> Result<F> {
        self.check_size()?;
        let root = self
            .tree
            .inner_nodes()
            .first()
            .copied()
            .unwrap_or_else(|| self.tree.nodes().next().expect("tree is nonempty"));
        let (messages, _) = self.messages(root);
        let h_r = self.field[&root];
        let mut z = F::zero();
        for xr in 0..2usize {
            let mut term = (h_r * F::from_usize(xr).expect("0 or 1")).exp();
            for w in self.tree.neighbors(root) {
                term *= messages[&(root, w)][xr];
            }
            z += term;
        }
        Ok(z)
    }

    /// Converts to the rooted parameterization. The root defaults to the
    /// lowest inner node.
    pub fn to_discrete(&self, root: Option<NodeLabel>) -> Result<DiscreteTreeModel<F>> {
        self.check_size()?;
        let root = match root {
            Some(r) => {
                if !self.tree.contains_node(r) {
                    return Err(Error::UnknownNode(r));
                }
                r
            }
            None => self
                .tree
                .inner_nodes()
                .first()
                .copied()
                .unwrap_or_else(|| self.tree.nodes().next().expect("tree is nonempty")),
        };
        let (messages, edges) = self.messages(root);

        // Root marginal: p(x_root) proportional to exp(h x) times the product
        // of incoming messages.
        let h_r = self.field[&root];
        let mut root_dist = [F::zero(); 2];
        for (xr, slot) in root_dist.iter_mut().enumerate() {
            let mut term = (h_r * F::from_usize(xr).expect("0 or 1")).exp();
            for w in self.tree.neighbors(root) {
                term *= messages[&(root, w)][xr];
            }
            *slot = term;
        }
        let z = root_dist[0] + root_dist[1];
        let root_dist = vec![root_dist[0] / z, root_dist[1] / z];

        // Edge conditionals: p(x_v | x_u) proportional to
        // exp(h_v x_v + beta x_u x_v) times the subtree messages into v.
        let mut transitions = BTreeMap::new();
        for (u, v) in edges {
            let h_v = self.field[&v];
            let beta = self.coupling(u, v);
            let mut m = Matrix::zeros(2, 2);
            for xu in 0..2usize {
                let mut row = [F::zero(); 2];
                for (xv, slot) in row.iter_mut().enumerate() {
                    let xv_f = F::from_usize(xv).expect("0 or 1");
                    let xu_f = F::from_usize(xu).expect("0 or 1");
                    let mut term = (h_v * xv_f + beta * xu_f * xv_f).exp();
                    for w in self.tree.neighbors(v) {
                        if w != u {
                            term *= messages[&(v, w)][xv];
                        }
                    }
                    *slot = term;
                }
                let total = row[0] + row[1];
                m.set(xu, 0, row[0] / total);
                m.set(xu, 1, row[1] / total);
            }
            transitions.insert((u, v), m);
        }
        DiscreteTreeModel::allowing_leaf_root(self.tree.clone(), root, root_dist, transitions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::LabeledTree;

    type Tree = LabeledTree<f64>;

    /// Brute-force oracle: exhaustive 2^d enumeration with explicit Z.
    fn enumerate_joint(params: &IsingParams<f64>) -> Vec<f64> {
        let labels: Vec<u64> = params.tree().nodes().collect();
        let d = labels.len();
        let edges: Vec<(u64, u64)> = params.tree().edges().collect();
        let mut weights = Vec::with_capacity(1 << d);
        for idx in 0..(1usize << d) {
            let bit = |pos: usize| ((idx >> (d - 1 - pos)) & 1) as f64;
            let mut energy = 0.0;
            for (pos, &l) in labels.iter().enumerate() {
                energy += params.field(l) * bit(pos);
            }
            for &(u, v) in &edges {
                let pu = labels.iter().position(|&l| l == u).unwrap();
                let pv = labels.iter().position(|&l| l == v).unwrap();
                energy += params.coupling(u, v) * bit(pu) * bit(pv);
            }
            weights.push(energy.exp());
        }
        let z: f64 = weights.iter().sum();
        weights.iter().map(|w| w / z).collect()
    }

    #[test]
    fn normalizer_matches_enumeration() {
        let tree = Tree::new(1..=5, [(1, 2), (1, 3), (2, 4), (2, 5)]).unwrap();
        let field = BTreeMap::from([(1, 0.3), (2, -0.2), (3, 0.0), (4, 0.5), (5, -0.4)]);
        let couplings =
            BTreeMap::from([((1, 2), 0.8), ((1, 3), -0.5), ((2, 4), 1.1), ((2, 5), 0.3)]);
        let params = IsingParams::new(tree, field, couplings).unwrap();
        let labels: Vec<u64> = params.tree().nodes().collect();
        let d = labels.len();
        let edges: Vec<(u64, u64)> = params.tree().edges().collect();
        let mut z = 0.0;
        for idx in 0..(1usize << d) {
            let bit = |pos: usize| ((idx >> (d - 1 - pos)) & 1) as f64;
            let mut energy = 0.0;
            for (pos, &l) in labels.iter().enumerate() {
                energy += params.field(l) * bit(pos);
            }
            for &(u, v) in &edges {
                let pu = labels.iter().position(|&l| l == u).unwrap();
                let pv = labels.iter().position(|&l| l == v).unwrap();
                energy += params.coupling(u, v) * bit(pu) * bit(pv);
            }
            z += energy.exp();
        }
        assert!((params.normalizer().unwrap() - z).abs() / z < 1e-12);
    }

    #[test]
    fn converted_joint_matches_enumeration() {
        let tree = Tree::new(1..=5, [(1, 2), (1, 3), (2, 4), (2, 5)]).unwrap();
        let field = BTreeMap::from([(1, 0.1), (2, -0.7), (3, 0.4), (4, 0.0), (5, 0.9)]);
        let couplings =
            BTreeMap::from([((1, 2), 0.6), ((1, 3), 1.2), ((2, 4), -0.8), ((2, 5), 0.2)]);
        let params = IsingParams::new(tree, field, couplings).unwrap();
        let model = params.to_discrete(None).unwrap();
        let joint = model.exact_joint().unwrap();
        let oracle = enumerate_joint(&params);
        for (got, want) in joint.probs().iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_coupling_gives_independence() {
        let tree = Tree::new([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let params = IsingParams::homogeneous(&tree, 0.0).unwrap();
        let model = params.to_discrete(None).unwrap();
        let joint = model.exact_joint().unwrap();
        // All probabilities equal 1/8 for h = 0, beta = 0.
        for &p in joint.probs() {
            assert!((p - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge_conditional_row() {
        // For h = 0 and coupling beta on one edge, the conditional of the
        // child given parent state 1 is (1, e^beta)/(1 + e^beta); given
        // parent state 0 it is uniform.
        let beta = 1.3f64;
        let tree = Tree::new([1, 2], [(1, 2)]).unwrap();
        let params = IsingParams::homogeneous(&tree, beta).unwrap();
        let model = params.to_discrete(Some(1)).unwrap();
        let m = model.transition(1, 2).unwrap();
        assert!((m.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((m.get(1, 0) - 1.0 / (1.0 + beta.exp())).abs() < 1e-12);
        assert!((m.get(1, 1) - beta.exp() / (1.0 + beta.exp())).abs() < 1e-12);
    }

    #[test]
    fn size_cap_enforced() {
        let n = 30u64;
        let tree = Tree::new(1..=n, (1..n).map(|i| (i, i + 1))).unwrap();
        let params = IsingParams::homogeneous(&tree, 0.5).unwrap();
        assert!(matches!(
            params.normalizer(),
            Err(Error::TreeTooLarge { nodes: 30, max: 25 })
        ));
    }
}
