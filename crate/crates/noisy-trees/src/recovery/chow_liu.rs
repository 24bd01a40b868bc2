//! Chow-Liu reconstruction: the minimum-weight spanning tree of the
//! complete graph weighted by pairwise distances (equivalently the
//! maximum-mutual-information tree when MI is decreasing in distance),
//! plus the noisy-data consistency check on the noise lengths.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::metrics::DistanceMatrix;
use crate::num::Real;
use crate::tree::{LabeledTree, NodeLabel};

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Minimum-weight spanning tree over the distance matrix by Kruskal's
/// algorithm with a total order on `(weight, label pair)`, so ties resolve
/// deterministically toward the lexicographically smallest pair.
pub fn chow_liu<F: Real>(distances: &DistanceMatrix<F>) -> LabeledTree<F> {
    let labels = distances.labels();
    let n = labels.len();
    if n == 1 {
        return LabeledTree::new([labels[0]], []).expect("single node tree");
    }
    let mut edges: Vec<(F, NodeLabel, NodeLabel, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let (u, v) = (labels[i], labels[j]);
            let (u, v, i2, j2) = if u <= v { (u, v, i, j) } else { (v, u, j, i) };
            edges.push((distances.get(i, j), u, v, i2, j2));
        }
    }
    edges.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite distances")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut uf = UnionFind::new(n);
    let mut chosen = Vec::with_capacity(n - 1);
    for (_, u, v, i, j) in edges {
        if uf.union(i, j) {
            chosen.push((u, v));
            if chosen.len() == n - 1 {
                break;
            }
        }
    }
    LabeledTree::new(labels.iter().copied(), chosen).expect("spanning tree of a complete graph")
}

/// Verdict of the noisy-data Chow-Liu consistency condition
/// `d_uv >= ell_u - ell_v` over all directed tree edges whose tail is not a
/// leaf. All-strict inequalities are sufficient for exact recovery, while a
/// weak failure rules it out; equality cases are indeterminate and listed in
/// `boundary`.
#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub consistent_weak: bool,
    pub consistent_strict: bool,
    /// Directed edges `(u, v)` with `d_uv < ell_u - ell_v`.
    pub violations: Vec<(NodeLabel, NodeLabel)>,
    /// Directed edges meeting the condition with equality.
    pub boundary: Vec<(NodeLabel, NodeLabel)>,
}

/// Checks the consistency condition on a tree with edge lengths and
/// per-node noise lengths.
pub fn check_chow_liu_consistency<F: Real>(
    tstar: &LabeledTree<F>,
    ells: &BTreeMap<NodeLabel, F>,
) -> Result<ConsistencyReport> {
    use crate::error::Error;
    if !tstar.has_lengths() {
        return Err(Error::InvalidParameter(
            "consistency check needs edge lengths on the tree".into(),
        ));
    }
    for v in tstar.nodes() {
        let ell = ells
            .get(&v)
            .ok_or_else(|| Error::InvalidParameter(format!("missing noise length for node {v}")))?;
        if !ell.is_finite() || *ell < F::zero() {
            return Err(Error::InvalidParameter(format!(
                "noise length for node {v} must be finite and nonnegative"
            )));
        }
    }
    let mut violations = Vec::new();
    let mut boundary = Vec::new();
    for (a, b) in tstar.edges() {
        let d = tstar.edge_length(a, b).expect("tree has lengths");
        for (u, v) in [(a, b), (b, a)] {
            if tstar.is_leaf(u) {
                continue;
            }
            let gap = ells[&u] - ells[&v];
            if d < gap {
                violations.push((u, v));
            } else if d == gap {
                boundary.push((u, v));
            }
        }
    }
    Ok(ConsistencyReport {
        consistent_weak: violations.is_empty(),
        consistent_strict: violations.is_empty() && boundary.is_empty(),
        violations,
        boundary,
    })
}
