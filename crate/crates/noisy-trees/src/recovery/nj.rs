//! Neighbor-Joining (Saitou-Nei) with the classical Q criterion,
//! deterministic lowest-label tie-breaking, and clamping of negative branch
//! lengths to zero. Consistent on additive metrics: it returns the
//! generating topology with exact edge lengths.

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;
use crate::num::{real, Real};
use crate::tree::{LabeledTree, NodeLabel};

/// Neighbor-Joining output: an unrooted tree, binary over the input labels
/// as leaves, plus the edges whose estimated length came out negative and
/// was clamped to zero.
#[derive(Clone, Debug)]
pub struct NjOutcome<F> {
    pub tree: LabeledTree<F>,
    pub clamped_edges: Vec<(NodeLabel, NodeLabel)>,
}

pub fn neighbor_joining<F: Real>(distances: &DistanceMatrix<F>) -> Result<NjOutcome<F>> {
    let labels = distances.labels();
    let m = labels.len();
    if m < 3 {
        return Err(Error::TooFewTaxa { got: m, need: 3 });
    }

    // Working copy; cluster i is identified by its current representative
    // label (a leaf at first, an internal label after a join).
    let mut dist: Vec<Vec<F>> = (0..m)
        .map(|i| (0..m).map(|j| distances.get(i, j)).collect())
        .collect();
    let mut cluster: Vec<NodeLabel> = labels.to_vec();
    let mut active: Vec<usize> = (0..m).collect();
    let mut next_label = labels.iter().copied().max().expect("nonempty") + 1;

    let mut edges: Vec<(NodeLabel, NodeLabel, F)> = Vec::with_capacity(2 * m);
    let mut clamped = Vec::new();
    let clamp = |len: F, a: NodeLabel, b: NodeLabel, clamped: &mut Vec<(NodeLabel, NodeLabel)>| {
        if len < F::zero() {
            clamped.push(if a < b { (a, b) } else { (b, a) });
            F::zero()
        } else {
            len
        }
    };

    while active.len() > 3 {
        let k = active.len();
        let row_sum = |i: usize, dist: &Vec<Vec<F>>, active: &Vec<usize>| -> F {
            active.iter().map(|&x| dist[i][x]).sum()
        };
        let sums: Vec<(usize, F)> = active
            .iter()
            .map(|&i| (i, row_sum(i, &dist, &active)))
            .collect();
        let sum_of = |i: usize| sums.iter().find(|&&(x, _)| x == i).expect("active").1;

        // Minimize Q; ties resolve toward the smallest label pair.
        let mut best: Option<(F, NodeLabel, NodeLabel, usize, usize)> = None;
        let k_f = F::from_usize(k - 2).expect("small count");
        for (ai, &i) in active.iter().enumerate() {
            for &j in active.iter().skip(ai + 1) {
                let q = k_f * dist[i][j] - sum_of(i) - sum_of(j);
                let (la, lb) = if cluster[i] <= cluster[j] {
                    (cluster[i], cluster[j])
                } else {
                    (cluster[j], cluster[i])
                };
                let candidate = (q, la, lb, i, j);
                best = match best {
                    None => Some(candidate),
                    Some(cur) => {
                        let better = q < cur.0
                            || (q == cur.0 && (la, lb) < (cur.1, cur.2));
                        Some(if better { candidate } else { cur })
                    }
                };
            }
        }
        let (_, _, _, i, j) = best.expect("at least one pair");

        let two = real::<F>(2.0);
        let d_ij = dist[i][j];
        let delta_i = d_ij / two + (sum_of(i) - sum_of(j)) / (two * k_f);
        let delta_j = d_ij - delta_i;
        let (li, lj) = (cluster[i], cluster[j]);
        let len_i = clamp(delta_i, li, next_label, &mut clamped);
        let len_j = clamp(delta_j, lj, next_label, &mut clamped);
        edges.push((li, next_label, len_i));
        edges.push((lj, next_label, len_j));

        // Reuse slot i for the joined cluster; retire slot j.
        for &x in &active {
            if x == i || x == j {
                continue;
            }
            let d_new = (dist[i][x] + dist[j][x] - d_ij) / two;
            dist[i][x] = d_new;
            dist[x][i] = d_new;
        }
        cluster[i] = next_label;
        next_label += 1;
        active.retain(|&x| x != j);
    }

    // Solve the final three branch lengths around one internal node.
    let (a, b, c) = (active[0], active[1], active[2]);
    let two = real::<F>(2.0);
    let da = (dist[a][b] + dist[a][c] - dist[b][c]) / two;
    let db = (dist[a][b] + dist[b][c] - dist[a][c]) / two;
    let dc = (dist[a][c] + dist[b][c] - dist[a][b]) / two;
    let center = next_label;
    for (slot, len) in [(a, da), (b, db), (c, dc)] {
        let l = cluster[slot];
        let len = clamp(len, l, center, &mut clamped);
        edges.push((l, center, len));
    }

    let nodes: Vec<NodeLabel> = edges
        .iter()
        .flat_map(|&(u, v, _)| [u, v])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let tree = LabeledTree::with_lengths(nodes, edges)?;
    Ok(NjOutcome {
        tree,
        clamped_edges: clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Provenance;
    use std::collections::BTreeMap;

    fn matrix(labels: Vec<u64>, entries: &[(u64, u64, f64)]) -> DistanceMatrix<f64> {
        let map: BTreeMap<(u64, u64), f64> = entries
            .iter()
            .flat_map(|&(u, v, d)| [((u, v), d), ((v, u), d)])
            .collect();
        DistanceMatrix::from_fn(labels, Provenance::Exact, |u, v| Ok(map[&(u, v)])).unwrap()
    }

    #[test]
    fn quartet_metric_recovers_split_and_internal_length() {
        let d = matrix(
            vec![1, 2, 3, 4],
            &[
                (1, 2, 2.0),
                (3, 4, 2.0),
                (1, 3, 3.0),
                (1, 4, 3.0),
                (2, 3, 3.0),
                (2, 4, 3.0),
            ],
        );
        let out = neighbor_joining(&d).unwrap();
        let t = &out.tree;
        assert_eq!(t.node_count(), 6);
        assert!(out.clamped_edges.is_empty());
        // Pairs (1,2) and (3,4) share an internal node each.
        let n12 = t.neighbors(1).next().unwrap();
        assert_eq!(t.neighbors(2).next().unwrap(), n12);
        let n34 = t.neighbors(3).next().unwrap();
        assert_eq!(t.neighbors(4).next().unwrap(), n34);
        assert!(t.contains_edge(n12, n34));
        assert!((t.edge_length(n12, n34).unwrap() - 1.0).abs() < 1e-9);
        // Leaf branches all have length 1.
        for leaf in 1..=4u64 {
            let inner = t.neighbors(leaf).next().unwrap();
            assert!((t.edge_length(leaf, inner).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn three_taxa_star_solved_directly() {
        let d = matrix(vec![1, 2, 3], &[(1, 2, 3.0), (1, 3, 4.0), (2, 3, 5.0)]);
        let out = neighbor_joining(&d).unwrap();
        let t = &out.tree;
        assert_eq!(t.node_count(), 4);
        let center = t.neighbors(1).next().unwrap();
        assert!((t.edge_length(1, center).unwrap() - 1.0).abs() < 1e-12);
        assert!((t.edge_length(2, center).unwrap() - 2.0).abs() < 1e-12);
        assert!((t.edge_length(3, center).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_taxa_rejected() {
        let d = matrix(vec![1, 2], &[(1, 2, 1.0)]);
        assert!(matches!(
            neighbor_joining(&d),
            Err(Error::TooFewTaxa { got: 2, need: 3 })
        ));
    }

    #[test]
    fn additive_metric_from_a_tree_is_recovered_exactly() {
        // Caterpillar on five leaves with distinct branch lengths.
        let source = LabeledTree::<f64>::with_lengths(
            [1, 2, 3, 4, 5, 11, 12, 13],
            [
                (1, 11, 0.4),
                (2, 11, 0.7),
                (11, 12, 0.3),
                (3, 12, 0.5),
                (12, 13, 0.6),
                (4, 13, 0.2),
                (5, 13, 0.9),
            ],
        )
        .unwrap();
        let d = DistanceMatrix::from_fn(vec![1, 2, 3, 4, 5], Provenance::Exact, |u, v| {
            source.path_length(u, v)
        })
        .unwrap();
        let out = neighbor_joining(&d).unwrap();
        // Same leaf distances, i.e., the same additive metric.
        for u in 1..=5u64 {
            for v in (u + 1)..=5 {
                let want = source.path_length(u, v).unwrap();
                let got = out.tree.path_length(u, v).unwrap();
                assert!((got - want).abs() < 1e-9, "pair ({u}, {v}): {got} vs {want}");
            }
        }
        // And the same semi-labeled topology.
        use crate::tree::{robinson_foulds_normalized, SemiLabeledTree};
        let rf = robinson_foulds_normalized(
            &SemiLabeledTree::new(source),
            &SemiLabeledTree::new(out.tree),
        )
        .unwrap();
        assert_eq!(rf, 0.0);
    }
}
