//! Undirected labeled trees and the combinatorial operations on them:
//! validation, suppression of degree-two nodes, augmentation with noisy-copy
//! leaves, mother enumeration, label-swap equivalence classes, and
//! Robinson-Foulds comparison of semi-labeled trees.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::num::Real;

/// Node labels are arbitrary unsigned integers.
pub type NodeLabel = u64;

/// Smallest offset used for the noisy-copy label namespace.
pub const MIN_NOISY_OFFSET: NodeLabel = 1000;

/// Offset for the noisy-copy namespace: the smallest power of ten that is
/// at least [`MIN_NOISY_OFFSET`] and strictly larger than `max_label`.
pub fn noisy_offset_for(max_label: NodeLabel) -> NodeLabel {
    let mut off = MIN_NOISY_OFFSET;
    while off <= max_label {
        off = off
            .checked_mul(10)
            .expect("noisy offset overflows u64; relabel the tree with smaller labels");
    }
    off
}

fn ordered(u: NodeLabel, v: NodeLabel) -> (NodeLabel, NodeLabel) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// An undirected tree with integer node labels and optional edge lengths.
///
/// Invariants established at construction: connected, acyclic, no self-loops,
/// no parallel edges; when lengths are present every edge has a finite
/// nonnegative length.
#[derive(Clone, Debug)]
pub struct LabeledTree<F = f64> {
    adjacency: BTreeMap<NodeLabel, BTreeSet<NodeLabel>>,
    lengths: Option<BTreeMap<(NodeLabel, NodeLabel), F>>,
    noisy_offset: Option<NodeLabel>,
}

impl<F: Real> LabeledTree<F> {
    /// Validates and builds a tree from nodes and undirected edges.
    pub fn new(
        nodes: impl IntoIterator<Item = NodeLabel>,
        edges: impl IntoIterator<Item = (NodeLabel, NodeLabel)>,
    ) -> Result<Self> {
        Self::build(nodes, edges, None)
    }

    /// Validates and builds a tree whose edges carry lengths.
    pub fn with_lengths(
        nodes: impl IntoIterator<Item = NodeLabel>,
        edges: impl IntoIterator<Item = (NodeLabel, NodeLabel, F)>,
    ) -> Result<Self> {
        let mut plain = Vec::new();
        let mut lengths = BTreeMap::new();
        for (u, v, len) in edges {
            if !len.is_finite() || len < F::zero() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) has invalid length {len}"
                )));
            }
            plain.push((u, v));
            lengths.insert(ordered(u, v), len);
        }
        Self::build(nodes, plain, Some(lengths))
    }

    fn build(
        nodes: impl IntoIterator<Item = NodeLabel>,
        edges: impl IntoIterator<Item = (NodeLabel, NodeLabel)>,
        lengths: Option<BTreeMap<(NodeLabel, NodeLabel), F>>,
    ) -> Result<Self> {
        let mut adjacency: BTreeMap<NodeLabel, BTreeSet<NodeLabel>> = BTreeMap::new();
        for n in nodes {
            adjacency.entry(n).or_default();
        }
        if adjacency.is_empty() {
            return Err(Error::InvalidParameter("tree needs at least one node".into()));
        }

        // Union-find over the node labels catches cycles as they form.
        let index: BTreeMap<NodeLabel, usize> =
            adjacency.keys().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut parent: Vec<usize> = (0..index.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }

        let mut n_edges = 0usize;
        for (u, v) in edges {
            if u == v {
                return Err(Error::CycleDetected(u, v));
            }
            let (&iu, &iv) = match (index.get(&u), index.get(&v)) {
                (Some(a), Some(b)) => (a, b),
                (None, _) => return Err(Error::UnknownNode(u)),
                (_, None) => return Err(Error::UnknownNode(v)),
            };
            if adjacency[&u].contains(&v) {
                return Err(Error::DuplicateEdge(ordered(u, v).0, ordered(u, v).1));
            }
            let (ru, rv) = (find(&mut parent, iu), find(&mut parent, iv));
            if ru == rv {
                return Err(Error::CycleDetected(u, v));
            }
            parent[ru] = rv;
            adjacency.get_mut(&u).expect("u present").insert(v);
            adjacency.get_mut(&v).expect("v present").insert(u);
            n_edges += 1;
        }

        let n_nodes = adjacency.len();
        if n_edges + 1 != n_nodes {
            return Err(Error::Disconnected {
                reached: n_edges + 1,
                total: n_nodes,
            });
        }
        if let Some(lens) = &lengths {
            debug_assert_eq!(lens.len(), n_edges);
        }
        Ok(LabeledTree {
            adjacency,
            lengths,
            noisy_offset: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len().saturating_sub(1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeLabel> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn contains_node(&self, v: NodeLabel) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn contains_edge(&self, u: NodeLabel, v: NodeLabel) -> bool {
        self.adjacency.get(&u).is_some_and(|adj| adj.contains(&v))
    }

    /// Edges with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeLabel, NodeLabel)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(&u, adj)| adj.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn neighbors(&self, v: NodeLabel) -> impl Iterator<Item = NodeLabel> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: NodeLabel) -> usize {
        self.adjacency.get(&v).map_or(0, |adj| adj.len())
    }

    pub fn is_leaf(&self, v: NodeLabel) -> bool {
        self.degree(v) == 1
    }

    /// Degree-one nodes, sorted.
    pub fn leaves(&self) -> Vec<NodeLabel> {
        self.nodes().filter(|&v| self.is_leaf(v)).collect()
    }

    /// Nodes of degree at least two, sorted.
    pub fn inner_nodes(&self) -> Vec<NodeLabel> {
        self.nodes().filter(|&v| self.degree(v) >= 2).collect()
    }

    pub fn max_label(&self) -> NodeLabel {
        *self.adjacency.keys().next_back().expect("tree is nonempty")
    }

    pub fn has_lengths(&self) -> bool {
        self.lengths.is_some()
    }

    pub fn edge_length(&self, u: NodeLabel, v: NodeLabel) -> Option<F> {
        self.lengths.as_ref()?.get(&ordered(u, v)).copied()
    }

    /// Drops edge lengths, keeping topology and metadata.
    pub fn without_lengths(&self) -> LabeledTree<F> {
        LabeledTree {
            adjacency: self.adjacency.clone(),
            lengths: None,
            noisy_offset: self.noisy_offset,
        }
    }

    /// The noisy-label offset recorded by [`LabeledTree::augment`], if any.
    pub fn noisy_offset(&self) -> Option<NodeLabel> {
        self.noisy_offset
    }

    pub fn set_noisy_offset(&mut self, offset: Option<NodeLabel>) {
        self.noisy_offset = offset;
    }

    /// Same node set and edge set (lengths and metadata ignored).
    pub fn same_topology(&self, other: &LabeledTree<F>) -> bool {
        self.adjacency.keys().eq(other.adjacency.keys())
            && self.edges().eq(other.edges())
    }

    /// The unique path from `u` to `v`, inclusive.
    pub fn path(&self, u: NodeLabel, v: NodeLabel) -> Result<Vec<NodeLabel>> {
        if !self.contains_node(u) {
            return Err(Error::UnknownNode(u));
        }
        if !self.contains_node(v) {
            return Err(Error::UnknownNode(v));
        }
        let mut pred: BTreeMap<NodeLabel, NodeLabel> = BTreeMap::new();
        let mut queue = VecDeque::from([u]);
        let mut seen = BTreeSet::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == v {
                break;
            }
            for y in self.neighbors(x) {
                if seen.insert(y) {
                    pred.insert(y, x);
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            cur = *pred.get(&cur).expect("tree is connected");
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// Sum of edge lengths along the `u`-`v` path.
    pub fn path_length(&self, u: NodeLabel, v: NodeLabel) -> Result<F> {
        if !self.has_lengths() {
            return Err(Error::InvalidParameter("tree has no edge lengths".into()));
        }
        let path = self.path(u, v)?;
        Ok(path
            .windows(2)
            .map(|w| self.edge_length(w[0], w[1]).expect("path edges exist"))
            .sum())
    }

    /// Removes every degree-two node, replacing each maximal path through
    /// them with a single edge. When lengths are present, the new edge gets
    /// the sum of the replaced lengths. Idempotent; a two-node tree is
    /// returned unchanged.
    pub fn suppress_degree_two(&self) -> LabeledTree<F> {
        let anchors: BTreeSet<NodeLabel> =
            self.nodes().filter(|&v| self.degree(v) != 2).collect();
        if anchors.len() == self.node_count() {
            return self.clone();
        }
        debug_assert!(!anchors.is_empty(), "a tree always has degree-one nodes");

        let mut adjacency: BTreeMap<NodeLabel, BTreeSet<NodeLabel>> =
            anchors.iter().map(|&a| (a, BTreeSet::new())).collect();
        let mut lengths: Option<BTreeMap<(NodeLabel, NodeLabel), F>> =
            self.lengths.as_ref().map(|_| BTreeMap::new());

        // Walk from each anchor through degree-two interiors to the next anchor.
        for &a in &anchors {
            for first in self.neighbors(a) {
                let mut prev = a;
                let mut cur = first;
                let mut total = self.edge_length(prev, cur).unwrap_or_else(F::zero);
                while !anchors.contains(&cur) {
                    let next = self
                        .neighbors(cur)
                        .find(|&n| n != prev)
                        .expect("degree-two interior has a second neighbor");
                    total += self.edge_length(cur, next).unwrap_or_else(F::zero);
                    prev = cur;
                    cur = next;
                }
                if a < cur {
                    adjacency.get_mut(&a).expect("anchor").insert(cur);
                    adjacency.get_mut(&cur).expect("anchor").insert(a);
                    if let Some(lens) = lengths.as_mut() {
                        lens.insert((a, cur), total);
                    }
                }
            }
        }
        // The a < cur guard above fills each suppressed edge from its lower
        // endpoint; mirror adjacency is symmetric because both anchors walk.
        LabeledTree {
            adjacency,
            lengths,
            noisy_offset: self.noisy_offset,
        }
    }

    /// Attaches a noisy-copy leaf `i^e` to every node `i`. The copy of `i`
    /// is labeled `offset + i` with the offset chosen by [`noisy_offset_for`]
    /// and recorded in the result's metadata. Edge lengths are dropped; use
    /// [`LabeledTree::augment_with_lengths`] to keep a metric.
    pub fn augment(&self) -> LabeledTree<F> {
        let offset = noisy_offset_for(self.max_label());
        let mut adjacency = self.adjacency.clone();
        for v in self.nodes().collect::<Vec<_>>() {
            let copy = offset + v;
            adjacency.get_mut(&v).expect("node present").insert(copy);
            adjacency.insert(copy, BTreeSet::from([v]));
        }
        LabeledTree {
            adjacency,
            lengths: None,
            noisy_offset: Some(offset),
        }
    }

    /// Augments a tree that carries edge lengths, giving each terminal edge
    /// `(i, i^e)` the length `ells[i]`.
    pub fn augment_with_lengths(&self, ells: &BTreeMap<NodeLabel, F>) -> Result<LabeledTree<F>> {
        if !self.has_lengths() {
            return Err(Error::InvalidParameter(
                "augment_with_lengths needs edge lengths on the input tree".into(),
            ));
        }
        let offset = noisy_offset_for(self.max_label());
        let mut adjacency = self.adjacency.clone();
        let mut lengths = self.lengths.clone().expect("lengths checked above");
        for v in self.nodes().collect::<Vec<_>>() {
            let ell = *ells
                .get(&v)
                .ok_or_else(|| Error::InvalidParameter(format!("missing noise length for node {v}")))?;
            if !ell.is_finite() || ell < F::zero() {
                return Err(Error::InvalidParameter(format!(
                    "noise length for node {v} must be finite and nonnegative"
                )));
            }
            let copy = offset + v;
            adjacency.get_mut(&v).expect("node present").insert(copy);
            adjacency.insert(copy, BTreeSet::from([v]));
            lengths.insert(ordered(v, copy), ell);
        }
        Ok(LabeledTree {
            adjacency,
            lengths: Some(lengths),
            noisy_offset: Some(offset),
        })
    }

    /// Inner nodes adjacent to at least one leaf.
    pub fn mothers(&self) -> BTreeSet<NodeLabel> {
        self.inner_nodes()
            .into_iter()
            .filter(|&u| self.neighbors(u).any(|v| self.is_leaf(v)))
            .collect()
    }

    /// Number of trees in the label-swap equivalence class:
    /// the product over mothers of (adjacent leaf count + 1).
    pub fn equivalence_class_size(&self) -> u128 {
        self.mothers()
            .iter()
            .map(|&u| self.neighbors(u).filter(|&v| self.is_leaf(v)).count() as u128 + 1)
            .product()
    }

    /// All trees obtained by independently swapping, at each mother, the
    /// mother's label with one of its adjacent leaves (or leaving it alone).
    /// The input is always the first element. Edge lengths are dropped.
    ///
    /// A two-node tree has no inner nodes and so no mothers; the class is
    /// just the tree itself.
    pub fn equivalence_class(&self) -> Vec<LabeledTree<F>> {
        let mothers: Vec<NodeLabel> = self.mothers().into_iter().collect();
        // Per mother: None = keep, Some(leaf) = swap labels with that leaf.
        let options: Vec<Vec<Option<NodeLabel>>> = mothers
            .iter()
            .map(|&u| {
                let mut opts = vec![None];
                opts.extend(self.neighbors(u).filter(|&v| self.is_leaf(v)).map(Some));
                opts
            })
            .collect();

        let mut class = Vec::new();
        let mut choice = vec![0usize; mothers.len()];
        loop {
            let swaps: BTreeMap<NodeLabel, NodeLabel> = mothers
                .iter()
                .enumerate()
                .filter_map(|(idx, &u)| options[idx][choice[idx]].map(|leaf| (u, leaf)))
                .collect();
            class.push(self.relabeled_by_swaps(&swaps));
            // Odometer increment over the per-mother choice vector.
            let mut i = 0;
            loop {
                if i == mothers.len() {
                    return class;
                }
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    fn relabeled_by_swaps(&self, swaps: &BTreeMap<NodeLabel, NodeLabel>) -> LabeledTree<F> {
        // Each swap exchanges a mother label with one adjacent leaf label.
        let mut map = BTreeMap::new();
        for (&u, &leaf) in swaps {
            map.insert(u, leaf);
            map.insert(leaf, u);
        }
        let rename = |v: NodeLabel| *map.get(&v).unwrap_or(&v);
        let mut adjacency: BTreeMap<NodeLabel, BTreeSet<NodeLabel>> = BTreeMap::new();
        for (&u, adj) in &self.adjacency {
            adjacency.insert(rename(u), adj.iter().map(|&v| rename(v)).collect());
        }
        LabeledTree {
            adjacency,
            lengths: None,
            noisy_offset: self.noisy_offset,
        }
    }

    /// Contracts the edge `(u, v)`, merging `v` into `u`. Lengths of the
    /// surviving edges are unchanged.
    pub(crate) fn contract_edge(&self, u: NodeLabel, v: NodeLabel) -> LabeledTree<F> {
        debug_assert!(self.contains_edge(u, v));
        let mut adjacency = self.adjacency.clone();
        let v_adj = adjacency.remove(&v).expect("v present");
        adjacency.get_mut(&u).expect("u present").remove(&v);
        let mut lengths = self.lengths.clone();
        if let Some(lens) = lengths.as_mut() {
            lens.remove(&ordered(u, v));
        }
        for w in v_adj {
            if w == u {
                continue;
            }
            adjacency.get_mut(&w).expect("w present").remove(&v);
            adjacency.get_mut(&w).expect("w present").insert(u);
            adjacency.get_mut(&u).expect("u present").insert(w);
            if let Some(lens) = lengths.as_mut() {
                if let Some(len) = lens.remove(&ordered(v, w)) {
                    lens.insert(ordered(u, w), len);
                }
            }
        }
        LabeledTree {
            adjacency,
            lengths,
            noisy_offset: self.noisy_offset,
        }
    }

    /// Canonical encoding of the unlabeled topology (AHU encoding rooted at
    /// the centroid). Two trees have the same encoding iff they are isomorphic
    /// as unlabeled trees.
    pub fn unlabeled_canonical_form(&self) -> String {
        fn encode<F: Real>(tree: &LabeledTree<F>, v: NodeLabel, parent: Option<NodeLabel>) -> String {
            let mut child_codes: Vec<String> = tree
                .neighbors(v)
                .filter(|&w| Some(w) != parent)
                .map(|w| encode(tree, w, Some(v)))
                .collect();
            child_codes.sort();
            format!("({})", child_codes.concat())
        }
        self.centroids()
            .into_iter()
            .map(|c| encode(self, c, None))
            .min()
            .expect("tree is nonempty")
    }

    /// One or two centroids (nodes minimizing the largest remaining component
    /// after removal).
    fn centroids(&self) -> Vec<NodeLabel> {
        let n = self.node_count();
        if n == 1 {
            return self.nodes().collect();
        }
        // Subtree sizes from a DFS rooted at an arbitrary node.
        let root = self.nodes().next().expect("nonempty");
        let mut order = Vec::with_capacity(n);
        let mut parent: BTreeMap<NodeLabel, NodeLabel> = BTreeMap::new();
        let mut stack = vec![root];
        let mut seen = BTreeSet::from([root]);
        while let Some(v) = stack.pop() {
            order.push(v);
            for w in self.neighbors(v) {
                if seen.insert(w) {
                    parent.insert(w, v);
                    stack.push(w);
                }
            }
        }
        let mut size: BTreeMap<NodeLabel, usize> = self.nodes().map(|v| (v, 1)).collect();
        for &v in order.iter().rev() {
            if let Some(&p) = parent.get(&v) {
                *size.get_mut(&p).expect("parent present") += size[&v];
            }
        }
        let mut best = usize::MAX;
        let mut centroids = Vec::new();
        for v in self.nodes() {
            let mut largest = n - size[&v];
            for w in self.neighbors(v) {
                if parent.get(&w) == Some(&v) {
                    largest = largest.max(size[&w]);
                }
            }
            match largest.cmp(&best) {
                std::cmp::Ordering::Less => {
                    best = largest;
                    centroids = vec![v];
                }
                std::cmp::Ordering::Equal => centroids.push(v),
                std::cmp::Ordering::Greater => {}
            }
        }
        centroids
    }
}

/// A leaf bipartition induced by removing one edge. Canonical form: the side
/// containing the smallest leaf label is stored first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreeSplit {
    first: BTreeSet<NodeLabel>,
    second: BTreeSet<NodeLabel>,
}

impl TreeSplit {
    /// Builds a split from one side and the full leaf set.
    pub fn new(side: BTreeSet<NodeLabel>, leaves: &BTreeSet<NodeLabel>) -> Self {
        let complement: BTreeSet<NodeLabel> = leaves.difference(&side).copied().collect();
        debug_assert!(!side.is_empty() && !complement.is_empty());
        let min_leaf = *leaves.iter().next().expect("nonempty leaf set");
        if side.contains(&min_leaf) {
            TreeSplit { first: side, second: complement }
        } else {
            TreeSplit { first: complement, second: side }
        }
    }

    pub fn sides(&self) -> (&BTreeSet<NodeLabel>, &BTreeSet<NodeLabel>) {
        (&self.first, &self.second)
    }

    /// Trivial splits cut off a single leaf.
    pub fn is_trivial(&self) -> bool {
        self.first.len() == 1 || self.second.len() == 1
    }
}

/// A tree whose leaf labels carry identity while inner labels do not.
///
/// Equality compares the suppressed topology together with the leaf labeling;
/// inner labels are ignored.
#[derive(Clone, Debug)]
pub struct SemiLabeledTree<F = f64> {
    tree: LabeledTree<F>,
}

impl<F: Real> SemiLabeledTree<F> {
    pub fn new(tree: LabeledTree<F>) -> Self {
        SemiLabeledTree { tree }
    }

    pub fn underlying(&self) -> &LabeledTree<F> {
        &self.tree
    }

    pub fn into_underlying(self) -> LabeledTree<F> {
        self.tree
    }

    pub fn leaf_labels(&self) -> BTreeSet<NodeLabel> {
        self.tree.leaves().into_iter().collect()
    }

    /// Splits induced by the internal edges of the suppressed tree.
    pub fn internal_splits(&self) -> BTreeSet<TreeSplit> {
        let suppressed = self.tree.suppress_degree_two();
        let leaves: BTreeSet<NodeLabel> = suppressed.leaves().into_iter().collect();
        if suppressed.node_count() < 2 {
            return BTreeSet::new();
        }
        // Leaf sets of the "far" side of each edge, bottom-up from a leaf root.
        let root = *leaves.iter().next().expect("nonempty");
        let mut splits = BTreeSet::new();
        let mut subtree: BTreeMap<NodeLabel, BTreeSet<NodeLabel>> = BTreeMap::new();
        let mut order = Vec::new();
        let mut parent: BTreeMap<NodeLabel, NodeLabel> = BTreeMap::new();
        let mut stack = vec![root];
        let mut seen = BTreeSet::from([root]);
        while let Some(v) = stack.pop() {
            order.push(v);
            for w in suppressed.neighbors(v) {
                if seen.insert(w) {
                    parent.insert(w, v);
                    stack.push(w);
                }
            }
        }
        for &v in order.iter().rev() {
            let mut set = BTreeSet::new();
            if suppressed.is_leaf(v) {
                set.insert(v);
            }
            for w in suppressed.neighbors(v) {
                if parent.get(&w) == Some(&v) {
                    set.extend(subtree[&w].iter().copied());
                }
            }
            if let Some(&p) = parent.get(&v) {
                // Internal edge: neither endpoint is a leaf.
                if !suppressed.is_leaf(v) && !suppressed.is_leaf(p) {
                    splits.insert(TreeSplit::new(set.clone(), &leaves));
                }
            }
            subtree.insert(v, set);
        }
        splits
    }
}

impl<F: Real> PartialEq for SemiLabeledTree<F> {
    fn eq(&self, other: &Self) -> bool {
        self.leaf_labels() == other.leaf_labels()
            && self.internal_splits() == other.internal_splits()
    }
}

impl<F: Real> Eq for SemiLabeledTree<F> {}

impl<F: Real> From<LabeledTree<F>> for SemiLabeledTree<F> {
    fn from(tree: LabeledTree<F>) -> Self {
        SemiLabeledTree::new(tree)
    }
}

/// Normalized Robinson-Foulds distance between two semi-labeled trees:
/// the number of internal splits present in exactly one tree divided by the
/// total internal split count of both. Zero iff the trees are equal as
/// semi-labeled trees; by convention zero when neither tree has internal
/// splits. Trees with degree-two nodes are suppressed before comparison.
pub fn robinson_foulds_normalized<F: Real>(
    a: &SemiLabeledTree<F>,
    b: &SemiLabeledTree<F>,
) -> Result<F> {
    let la = a.leaf_labels();
    let lb = b.leaf_labels();
    if la != lb {
        return Err(Error::LeafSetMismatch {
            only_a: la.difference(&lb).copied().collect(),
            only_b: lb.difference(&la).copied().collect(),
        });
    }
    let sa = a.internal_splits();
    let sb = b.internal_splits();
    let total = sa.len() + sb.len();
    if total == 0 {
        return Ok(F::zero());
    }
    let shared = sa.intersection(&sb).count();
    let unique = total - 2 * shared;
    Ok(F::from_usize(unique).expect("small count") / F::from_usize(total).expect("small count"))
}

/// Uniform random tree on labels `1..=n` via a random Prüfer sequence.
/// Deterministic given the seed.
pub fn random_tree<F: Real>(n: usize, seed: u64) -> LabeledTree<F> {
    assert!(n >= 2, "random tree needs at least two nodes");
    if n == 2 {
        return LabeledTree::new([1, 2], [(1, 2)]).expect("valid two-node tree");
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let prufer: Vec<u64> = (0..n - 2).map(|_| rng.random_range(1..=n as u64)).collect();
    let mut degree: BTreeMap<u64, usize> = (1..=n as u64).map(|v| (v, 1)).collect();
    for &v in &prufer {
        *degree.get_mut(&v).expect("in range") += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut leaves: BTreeSet<u64> = degree
        .iter()
        .filter(|&(_, &d)| d == 1)
        .map(|(&v, _)| v)
        .collect();
    for &v in &prufer {
        let leaf = *leaves.iter().next().expect("leaf available");
        leaves.remove(&leaf);
        edges.push((leaf, v));
        let d = degree.get_mut(&v).expect("in range");
        *d -= 1;
        if *d == 1 {
            leaves.insert(v);
        }
    }
    let mut last = leaves.into_iter();
    let (a, b) = (last.next().expect("two left"), last.next().expect("two left"));
    edges.push((a, b));
    LabeledTree::new(1..=n as u64, edges).expect("Prüfer decode yields a tree")
}
