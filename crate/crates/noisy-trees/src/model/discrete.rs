//! Discrete tree models in rooted parameterization: a root distribution plus
//! a row-stochastic transition matrix per directed edge. Includes the fully
//! symmetric (Jukes-Cantor style) family, exact joint enumeration for small
//! state spaces, pairwise marginals by message passing along paths, and
//! ancestral sampling.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::num::{real, stochastic_tol, Real};
use crate::seeding::derived_rng;
use crate::tree::{LabeledTree, NodeLabel};

use super::sample::SampleBatch;

/// Default cap on the exact-joint state space size.
pub const DEFAULT_STATE_CAP: u128 = 1 << 22;

/// Transition matrix of the fully symmetric model: diagonal `1-(r-1)theta`,
/// off-diagonal `theta`.
pub fn symmetric_transition<F: Real>(r: usize, theta: F) -> Result<Matrix<F>> {
    check_theta(r, theta)?;
    let mut m = Matrix::zeros(r, r);
    let diag = F::one() - F::from_usize(r - 1).expect("small r") * theta;
    for i in 0..r {
        for j in 0..r {
            m.set(i, j, if i == j { diag } else { theta });
        }
    }
    Ok(m)
}

fn check_theta<F: Real>(r: usize, theta: F) -> Result<()> {
    let upper = F::one() / F::from_usize(r).expect("small r");
    if !(theta > F::zero() && theta < upper) {
        return Err(Error::ThetaOutOfRange {
            theta: theta.to_f64().unwrap_or(f64::NAN),
            r,
        });
    }
    Ok(())
}

/// Off-diagonal probability making a symmetric edge have length `ell`,
/// solving `(1 - r theta)^(r-1) = exp(-ell/2)`.
pub fn theta_for_edge_length<F: Real>(r: usize, ell: F) -> F {
    let r_f = F::from_usize(r).expect("small r");
    let rm1 = F::from_usize(r - 1).expect("small r");
    (F::one() - (-ell / (real::<F>(2.0) * rm1)).exp()) / r_f
}

/// Fully symmetric edge parameters: state count and per-edge off-diagonal
/// probabilities in `(0, 1/r)`.
#[derive(Clone, Debug)]
pub struct FullySymmetricParams<F> {
    pub r: usize,
    pub thetas: BTreeMap<(NodeLabel, NodeLabel), F>,
}

impl<F: Real> FullySymmetricParams<F> {
    /// Same theta on every edge of the tree.
    pub fn uniform(tree: &LabeledTree<F>, r: usize, theta: F) -> Result<Self> {
        check_theta(r, theta)?;
        Ok(FullySymmetricParams {
            r,
            thetas: tree.edges().map(|e| (e, theta)).collect(),
        })
    }

    pub fn into_model(self, tree: &LabeledTree<F>) -> Result<DiscreteTreeModel<F>> {
        DiscreteTreeModel::from_symmetric(tree, self.r, &self.thetas)
    }
}

/// A tree-Markov distribution over `r` states per node, rooted at an inner
/// node, with the joint `p(x) = p_root(x_root) * prod M[x_parent][x_child]`.
#[derive(Clone, Debug)]
pub struct DiscreteTreeModel<F> {
    tree: LabeledTree<F>,
    root: NodeLabel,
    r: usize,
    root_dist: Vec<F>,
    transitions: BTreeMap<(NodeLabel, NodeLabel), Matrix<F>>,
    marginals: BTreeMap<NodeLabel, Vec<F>>,
}

impl<F: Real> DiscreteTreeModel<F> {
    /// Builds and validates a model. The root must be an inner node; use
    /// [`DiscreteTreeModel::allowing_leaf_root`] to lift that restriction.
    pub fn new(
        tree: LabeledTree<F>,
        root: NodeLabel,
        root_dist: Vec<F>,
        transitions: BTreeMap<(NodeLabel, NodeLabel), Matrix<F>>,
    ) -> Result<Self> {
        Self::build(tree, root, root_dist, transitions, false)
    }

    /// Like [`DiscreteTreeModel::new`] but accepts a leaf root. Meant for
    /// experimentation on tiny trees (a two-node tree has no inner node).
    pub fn allowing_leaf_root(
        tree: LabeledTree<F>,
        root: NodeLabel,
        root_dist: Vec<F>,
        transitions: BTreeMap<(NodeLabel, NodeLabel), Matrix<F>>,
    ) -> Result<Self> {
        Self::build(tree, root, root_dist, transitions, true)
    }

    fn build(
        tree: LabeledTree<F>,
        root: NodeLabel,
        root_dist: Vec<F>,
        transitions: BTreeMap<(NodeLabel, NodeLabel), Matrix<F>>,
        allow_leaf_root: bool,
    ) -> Result<Self> {
        if !tree.contains_node(root) {
            return Err(Error::UnknownNode(root));
        }
        if !allow_leaf_root && tree.is_leaf(root) && tree.node_count() > 1 {
            return Err(Error::InvalidParameter(format!(
                "root {root} is a leaf; pick an inner node or use allowing_leaf_root"
            )));
        }
        let r = root_dist.len();
        if r < 2 {
            return Err(Error::InvalidParameter("need at least two states".into()));
        }
        let tol = stochastic_tol::<F>();
        if root_dist.iter().any(|&p| p <= F::zero()) {
            return Err(Error::AssumptionViolated {
                condition: "positivity of the root distribution",
                detail: "every root probability must be strictly positive".into(),
            });
        }
        let total: F = root_dist.iter().copied().sum();
        if (total - F::one()).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "root distribution sums to {total}, not 1"
            )));
        }
        // Every directed edge away from the root needs a stochastic r-by-r
        // transition matrix.
        for (u, v) in directed_edges(&tree, root) {
            let m = transitions.get(&(u, v)).ok_or_else(|| {
                Error::InvalidParameter(format!("missing transition matrix for edge {u} -> {v}"))
            })?;
            if m.rows() != r || m.cols() != r {
                return Err(Error::InvalidParameter(format!(
                    "transition for edge {u} -> {v} is {}x{}, expected {r}x{r}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_row_stochastic() {
                return Err(Error::InvalidParameter(format!(
                    "transition for edge {u} -> {v} is not row-stochastic"
                )));
            }
        }
        let marginals = compute_marginals(&tree, root, &root_dist, &transitions);
        Ok(DiscreteTreeModel {
            tree,
            root,
            r,
            root_dist,
            transitions,
            marginals,
        })
    }

    /// Fully symmetric model: uniform root distribution and symmetric
    /// transitions (the same matrix in both directions of every edge).
    /// The root is the lowest inner node, or the lowest node when the tree
    /// is a single edge.
    pub fn from_symmetric(
        tree: &LabeledTree<F>,
        r: usize,
        thetas: &BTreeMap<(NodeLabel, NodeLabel), F>,
    ) -> Result<Self> {
        let uniform = vec![F::one() / F::from_usize(r).expect("small r"); r];
        let mut transitions = BTreeMap::new();
        for (u, v) in tree.edges() {
            let theta = *thetas.get(&(u, v)).or_else(|| thetas.get(&(v, u))).ok_or_else(|| {
                Error::InvalidParameter(format!("missing theta for edge ({u}, {v})"))
            })?;
            let m = symmetric_transition(r, theta)?;
            transitions.insert((u, v), m.clone());
            transitions.insert((v, u), m);
        }
        let root = tree.inner_nodes().first().copied().unwrap_or_else(|| {
            tree.nodes().next().expect("tree is nonempty")
        });
        Self::build(tree.clone(), root, uniform, transitions, tree.inner_nodes().is_empty())
    }

    /// Fully symmetric model with the same theta on every edge.
    pub fn uniform_symmetric(tree: &LabeledTree<F>, r: usize, theta: F) -> Result<Self> {
        let params = FullySymmetricParams::uniform(tree, r, theta)?;
        params.into_model(tree)
    }

    pub fn tree(&self) -> &LabeledTree<F> {
        &self.tree
    }

    pub fn root(&self) -> NodeLabel {
        self.root
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn root_dist(&self) -> &[F] {
        &self.root_dist
    }

    /// Stored transition for a directed edge, if present.
    pub fn transition(&self, from: NodeLabel, to: NodeLabel) -> Option<&Matrix<F>> {
        self.transitions.get(&(from, to))
    }

    /// Marginal distribution of one node.
    pub fn node_marginal(&self, v: NodeLabel) -> Result<&[F]> {
        self.marginals
            .get(&v)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownNode(v))
    }

    /// Conditional of `to` given `from` for adjacent nodes, reversing a
    /// stored matrix through Bayes' rule when only the opposite direction
    /// is parameterized.
    pub fn directed_transition(&self, from: NodeLabel, to: NodeLabel) -> Result<Matrix<F>> {
        if !self.tree.contains_edge(from, to) {
            return Err(Error::InvalidParameter(format!(
                "({from}, {to}) is not an edge of the model tree"
            )));
        }
        if let Some(m) = self.transitions.get(&(from, to)) {
            return Ok(m.clone());
        }
        let forward = self
            .transitions
            .get(&(to, from))
            .expect("one direction of every edge is parameterized");
        let m_to = &self.marginals[&to];
        let m_from = &self.marginals[&from];
        let mut rev = Matrix::zeros(self.r, self.r);
        for a in 0..self.r {
            for b in 0..self.r {
                // P(to = b | from = a) = P(to = b) M[b][a] / P(from = a)
                rev.set(a, b, m_to[b] * forward.get(b, a) / m_from[a]);
            }
        }
        Ok(rev)
    }

    /// Joint distribution of `(X_i, X_j)` computed by multiplying the step
    /// conditionals along the tree path, without forming the full joint.
    pub fn pair_marginal(&self, i: NodeLabel, j: NodeLabel) -> Result<Matrix<F>> {
        if i == j {
            return Err(Error::InvalidParameter("pair marginal needs two distinct nodes".into()));
        }
        let path = self.tree.path(i, j)?;
        let mut conditional = Matrix::identity(self.r);
        for w in path.windows(2) {
            conditional = conditional.matmul(&self.directed_transition(w[0], w[1])?);
        }
        Ok(conditional.scale_rows(&self.marginals[&i]))
    }

    /// Checks (A1) positivity of the root distribution and (A2) that every
    /// edge transition is invertible and not a permutation.
    pub fn check_assumptions(&self) -> Result<()> {
        if self.root_dist.iter().any(|&p| p <= F::zero()) {
            return Err(Error::AssumptionViolated {
                condition: "positivity of the root distribution",
                detail: "a root state has probability zero".into(),
            });
        }
        for (u, v) in directed_edges(&self.tree, self.root) {
            let m = &self.transitions[&(u, v)];
            let det = m.determinant().abs();
            if det <= stochastic_tol::<F>() {
                return Err(Error::AssumptionViolated {
                    condition: "invertible transitions",
                    detail: format!("edge {u} -> {v} has |det| = {det}"),
                });
            }
            if m.is_permutation() {
                return Err(Error::AssumptionViolated {
                    condition: "non-permutation transitions",
                    detail: format!("edge {u} -> {v} is a permutation matrix"),
                });
            }
        }
        Ok(())
    }

    /// Sufficient condition for reconstructibility from rows: in every
    /// transition matrix, each diagonal entry dominates the other entries of
    /// its column.
    pub fn satisfies_diagonal_dominance(&self) -> bool {
        directed_edges(&self.tree, self.root).into_iter().all(|(u, v)| {
            let m = &self.transitions[&(u, v)];
            (0..self.r).all(|j| (0..self.r).all(|i| i == j || m.get(j, j) > m.get(i, j)))
        })
    }

    /// Full joint probability table; errors when `r^d` exceeds the cap.
    pub fn exact_joint(&self) -> Result<JointTable<F>> {
        self.exact_joint_with_cap(DEFAULT_STATE_CAP)
    }

    pub fn exact_joint_with_cap(&self, cap: u128) -> Result<JointTable<F>> {
        let labels: Vec<NodeLabel> = self.tree.nodes().collect();
        let d = labels.len();
        let states = (self.r as u128)
            .checked_pow(d as u32)
            .ok_or(Error::StateSpaceTooLarge { states: u128::MAX, cap })?;
        if states > cap {
            return Err(Error::StateSpaceTooLarge { states, cap });
        }
        let index: BTreeMap<NodeLabel, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let edges = directed_edges(&self.tree, self.root);
        let root_idx = index[&self.root];
        let n_states = states as usize;
        let mut probs = Vec::with_capacity(n_states);
        let mut state = vec![0usize; d];
        for _ in 0..n_states {
            let mut p = self.root_dist[state[root_idx]];
            for &(u, v) in &edges {
                p *= self.transitions[&(u, v)].get(state[index[&u]], state[index[&v]]);
            }
            probs.push(p);
            // Odometer over states, last label fastest.
            for pos in (0..d).rev() {
                state[pos] += 1;
                if state[pos] < self.r {
                    break;
                }
                state[pos] = 0;
            }
        }
        Ok(JointTable {
            labels,
            r: self.r,
            probs,
        })
    }

    /// Draws `n` i.i.d. rows by ancestral sampling. Columns follow the
    /// sorted node order; each row uses its own derived RNG stream, so the
    /// result is deterministic in `(model, n, seed)` and safe to replicate
    /// in parallel.
    pub fn sample(&self, n: usize, seed: u64) -> SampleBatch<F> {
        let labels: Vec<NodeLabel> = self.tree.nodes().collect();
        let index: BTreeMap<NodeLabel, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let order = ancestral_order(&self.tree, self.root);
        let root_cdf = cdf_f64(&self.root_dist);
        let row_cdfs: BTreeMap<(NodeLabel, NodeLabel), Vec<Vec<f64>>> = order
            .iter()
            .filter(|(_, v)| *v != self.root)
            .map(|&(u, v)| {
                let m = &self.transitions[&(u, v)];
                let rows = (0..self.r).map(|a| cdf_f64(m.row(a))).collect();
                ((u, v), rows)
            })
            .collect();

        let d = labels.len();
        let mut states = vec![0u16; n * d];
        let mut row_states = vec![0usize; d];
        for row in 0..n {
            let mut rng = derived_rng(&[seed, 0x5a_4d50, row as u64]);
            row_states[index[&self.root]] = draw(&root_cdf, rng.random::<f64>());
            for &(u, v) in &order {
                if v == self.root {
                    continue;
                }
                let parent_state = row_states[index[&u]];
                let cdf = &row_cdfs[&(u, v)][parent_state];
                row_states[index[&v]] = draw(cdf, rng.random::<f64>());
            }
            for (col, &s) in row_states.iter().enumerate() {
                states[row * d + col] = s as u16;
            }
        }
        SampleBatch::discrete(labels, n, self.r, states, seed).expect("consistent dimensions")
    }
}

/// Full joint probability table over `r^d` states, indexed by the sorted
/// node labels with the last label varying fastest. Serves as the
/// brute-force oracle for marginal computations.
#[derive(Clone, Debug)]
pub struct JointTable<F> {
    labels: Vec<NodeLabel>,
    r: usize,
    probs: Vec<F>,
}

impl<F: Real> JointTable<F> {
    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn total(&self) -> F {
        self.probs.iter().copied().sum()
    }

    /// Probability of a full state assignment (in label order).
    pub fn prob(&self, state: &[usize]) -> F {
        assert_eq!(state.len(), self.labels.len());
        let mut idx = 0usize;
        for &s in state {
            idx = idx * self.r + s;
        }
        self.probs[idx]
    }

    fn position(&self, label: NodeLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownNode(label))
    }

    /// Marginal distribution of one node, by summation.
    pub fn node_marginal(&self, label: NodeLabel) -> Result<Vec<F>> {
        let pos = self.position(label)?;
        let mut out = vec![F::zero(); self.r];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[digit(idx, pos, self.labels.len(), self.r)] += p;
        }
        Ok(out)
    }

    /// Pairwise marginal table of `(X_i, X_j)`, by summation.
    pub fn pair_marginal(&self, i: NodeLabel, j: NodeLabel) -> Result<Matrix<F>> {
        let (pi, pj) = (self.position(i)?, self.position(j)?);
        let mut out = Matrix::zeros(self.r, self.r);
        for (idx, &p) in self.probs.iter().enumerate() {
            let a = digit(idx, pi, self.labels.len(), self.r);
            let b = digit(idx, pj, self.labels.len(), self.r);
            out.set(a, b, out.get(a, b) + p);
        }
        Ok(out)
    }
}

/// The `pos`-th digit of `idx` in base `r` with `d` digits, most significant
/// digit first.
fn digit(idx: usize, pos: usize, d: usize, r: usize) -> usize {
    let shift = d - 1 - pos;
    (idx / r.pow(shift as u32)) % r
}

/// Edges directed away from the root, parents before children.
pub(crate) fn directed_edges<F: Real>(
    tree: &LabeledTree<F>,
    root: NodeLabel,
) -> Vec<(NodeLabel, NodeLabel)> {
    ancestral_order(tree, root)
        .into_iter()
        .filter(|&(u, v)| u != v)
        .collect()
}

/// (parent, node) pairs in BFS order from the root; the root appears as
/// `(root, root)` first.
fn ancestral_order<F: Real>(tree: &LabeledTree<F>, root: NodeLabel) -> Vec<(NodeLabel, NodeLabel)> {
    let mut order = vec![(root, root)];
    let mut queue = std::collections::VecDeque::from([root]);
    let mut seen = std::collections::BTreeSet::from([root]);
    while let Some(u) = queue.pop_front() {
        for v in tree.neighbors(u) {
            if seen.insert(v) {
                order.push((u, v));
                queue.push_back(v);
            }
        }
    }
    order
}

fn compute_marginals<F: Real>(
    tree: &LabeledTree<F>,
    root: NodeLabel,
    root_dist: &[F],
    transitions: &BTreeMap<(NodeLabel, NodeLabel), Matrix<F>>,
) -> BTreeMap<NodeLabel, Vec<F>> {
    let r = root_dist.len();
    let mut marginals = BTreeMap::from([(root, root_dist.to_vec())]);
    for (u, v) in directed_edges(tree, root) {
        let parent = marginals[&u].clone();
        let m = &transitions[&(u, v)];
        let mut child = vec![F::zero(); r];
        for a in 0..r {
            for b in 0..r {
                child[b] += parent[a] * m.get(a, b);
            }
        }
        marginals.insert(v, child);
    }
    marginals
}

fn cdf_f64<F: Real>(probs: &[F]) -> Vec<f64> {
    let mut acc = 0.0f64;
    let mut cdf: Vec<f64> = probs
        .iter()
        .map(|&p| {
            acc += p.to_f64().expect("probability fits in f64");
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::LabeledTree;

    type Tree = LabeledTree<f64>;

    fn single_edge_model(theta: f64) -> DiscreteTreeModel<f64> {
        let tree = Tree::new([1, 2], [(1, 2)]).unwrap();
        DiscreteTreeModel::uniform_symmetric(&tree, 2, theta).unwrap()
    }

    fn example_tree() -> Tree {
        Tree::new(1..=5, [(1, 2), (1, 3), (2, 4), (2, 5)]).unwrap()
    }

    #[test]
    fn symmetric_transition_entries() {
        let m = symmetric_transition(2, 0.2f64).unwrap();
        assert_eq!(m.row(0), &[0.8, 0.2]);
        assert_eq!(m.row(1), &[0.2, 0.8]);
        let m4 = symmetric_transition(4, 0.07f64).unwrap();
        assert!((m4.get(0, 0) - 0.79).abs() < 1e-15);
        assert!((m4.get(0, 1) - 0.07).abs() < 1e-15);
    }

    #[test]
    fn theta_boundaries_rejected() {
        assert!(matches!(
            symmetric_transition(2, 0.0f64),
            Err(Error::ThetaOutOfRange { .. })
        ));
        assert!(matches!(
            symmetric_transition(2, 0.5f64),
            Err(Error::ThetaOutOfRange { .. })
        ));
        assert!(symmetric_transition(2, 0.499f64).is_ok());
    }

    #[test]
    fn theta_for_edge_length_round_trips() {
        for (r, ell) in [(2usize, 0.5f64), (2, 1.0), (4, 2.0), (3, 0.25)] {
            let theta = theta_for_edge_length(r, ell);
            let det = (1.0 - r as f64 * theta).powi(r as i32 - 1);
            let recovered = -2.0 * det.ln();
            assert!((recovered - ell).abs() < 1e-12, "r={r} ell={ell}");
        }
    }

    #[test]
    fn exact_joint_of_single_edge() {
        let joint = single_edge_model(0.2).exact_joint().unwrap();
        assert_eq!(joint.probs(), &[0.4, 0.1, 0.1, 0.4]);
        assert!((joint.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_marginal_adjacent_and_distance_two() {
        let tree = Tree::new([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let model = DiscreteTreeModel::uniform_symmetric(&tree, 2, 0.2).unwrap();
        let adj = model.pair_marginal(1, 2).unwrap();
        for (idx, want) in [(0, 0.4), (1, 0.1), (2, 0.1), (3, 0.4)] {
            assert!((adj.data()[idx] - want).abs() < 1e-12);
        }
        // Two steps: flip probability 2 * 0.2 * 0.8 = 0.32.
        let two = model.pair_marginal(1, 3).unwrap();
        for (idx, want) in [(0, 0.34), (1, 0.16), (2, 0.16), (3, 0.34)] {
            assert!((two.data()[idx] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_marginal_matches_exact_joint() {
        let model = DiscreteTreeModel::uniform_symmetric(&example_tree(), 2, 0.2).unwrap();
        let joint = model.exact_joint().unwrap();
        for &i in &[1u64, 3, 4] {
            for &j in &[2u64, 5] {
                let fast = model.pair_marginal(i, j).unwrap();
                let slow = joint.pair_marginal(i, j).unwrap();
                for idx in 0..4 {
                    assert!((fast.data()[idx] - slow.data()[idx]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetric_model_marginals_are_uniform() {
        let model = DiscreteTreeModel::uniform_symmetric(&example_tree(), 2, 0.2).unwrap();
        let joint = model.exact_joint().unwrap();
        for v in 1..=5u64 {
            let marg = joint.node_marginal(v).unwrap();
            assert!((marg[0] - 0.5).abs() < 1e-12);
            assert!((marg[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_transition_matches_bayes() {
        // Asymmetric model on one edge rooted at 1; reversing through the
        // joint must agree with directed_transition(2, 1).
        let tree = Tree::new([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let m = Matrix::from_rows(&[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let transitions = BTreeMap::from([((2u64, 1u64), m.clone()), ((2u64, 3u64), m)]);
        let model =
            DiscreteTreeModel::new(tree, 2, vec![0.6, 0.4], transitions).unwrap();
        let rev = model.directed_transition(1, 2).unwrap();
        let joint = model.exact_joint().unwrap().pair_marginal(1, 2).unwrap();
        let marg1 = joint.row_sums();
        for a in 0..2 {
            for b in 0..2 {
                assert!((rev.get(a, b) - joint.get(a, b) / marg1[a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn state_space_cap_enforced() {
        let model = DiscreteTreeModel::uniform_symmetric(&example_tree(), 2, 0.2).unwrap();
        let err = model.exact_joint_with_cap(16).unwrap_err();
        assert!(matches!(err, Error::StateSpaceTooLarge { states: 32, cap: 16 }));
    }

    #[test]
    fn leaf_root_rejected_without_override() {
        let tree = Tree::new([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let m = symmetric_transition(2, 0.2f64).unwrap();
        let transitions = BTreeMap::from([
            ((1u64, 2u64), m.clone()),
            ((2u64, 3u64), m.clone()),
        ]);
        let err =
            DiscreteTreeModel::new(tree.clone(), 1, vec![0.5, 0.5], transitions.clone());
        assert!(err.is_err());
        assert!(
            DiscreteTreeModel::allowing_leaf_root(tree, 1, vec![0.5, 0.5], transitions).is_ok()
        );
    }

    #[test]
    fn sampling_hits_expected_flip_rate() {
        let model = single_edge_model(0.2);
        let n = 200_000;
        let batch = model.sample(n, 42);
        let flips = (0..n)
            .filter(|&row| batch.state(row, 0) != batch.state(row, 1))
            .count();
        let rate = flips as f64 / n as f64;
        assert!((rate - 0.2).abs() < 0.005, "flip rate {rate}");
    }

    #[test]
    fn sampling_marginals_are_uniform() {
        let model = DiscreteTreeModel::uniform_symmetric(&example_tree(), 2, 0.2).unwrap();
        let n = 200_000;
        let batch = model.sample(n, 7);
        for col in 0..5 {
            let ones = (0..n).filter(|&row| batch.state(row, col) == 1).count();
            let freq = ones as f64 / n as f64;
            assert!((freq - 0.5).abs() < 0.01, "column {col} frequency {freq}");
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let model = DiscreteTreeModel::uniform_symmetric(&example_tree(), 2, 0.2).unwrap();
        let a = model.sample(64, 3);
        let b = model.sample(64, 3);
        for row in 0..64 {
            for col in 0..5 {
                assert_eq!(a.state(row, col), b.state(row, col));
            }
        }
    }

    #[test]
    fn assumption_checks_flag_permutation_edges() {
        let tree = Tree::new([1, 2], [(1, 2)]).unwrap();
        let perm = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let transitions = BTreeMap::from([((1u64, 2u64), perm)]);
        let model =
            DiscreteTreeModel::allowing_leaf_root(tree, 1, vec![0.5, 0.5], transitions).unwrap();
        let err = model.check_assumptions().unwrap_err();
        assert!(matches!(err, Error::AssumptionViolated { .. }));
    }

    #[test]
    fn diagonal_dominance_detected() {
        let model = single_edge_model(0.2);
        assert!(model.satisfies_diagonal_dominance());
        // Column 0 of [[0.3, 0.7], [0.4, 0.6]] is dominated off-diagonal.
        let tree = Tree::new([1, 2], [(1, 2)]).unwrap();
        let m = Matrix::from_rows(&[vec![0.3, 0.7], vec![0.4, 0.6]]).unwrap();
        let transitions = BTreeMap::from([((1u64, 2u64), m)]);
        let model =
            DiscreteTreeModel::allowing_leaf_root(tree, 1, vec![0.5, 0.5], transitions).unwrap();
        assert!(!model.satisfies_diagonal_dominance());
    }
}
