#![allow(dead_code)] // each integration suite uses a subset of these helpers

//! Shared generators for the integration suites: random trees with random
//! valid model parameters, built independently of the code paths they are
//! used to check.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use noisy_trees::linalg::Matrix;
use noisy_trees::model::{DiscreteTreeModel, LinearTreeModel};
use noisy_trees::seeding::derive_seed;
use noisy_trees::tree::{random_tree, LabeledTree, NodeLabel};

/// The five-node tree used as the running example: 1 joined to 2 and 3,
/// 2 joined to 4 and 5.
pub fn example_tree() -> LabeledTree<f64> {
    LabeledTree::new(1..=5, [(1, 2), (1, 3), (2, 4), (2, 5)]).unwrap()
}

/// Dirichlet(1, ..., 1) draw via normalized exponentials, floored away from
/// zero by mixing with the uniform distribution.
fn random_distribution(r: usize, rng: &mut StdRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..r).map(|_| -rng.random::<f64>().ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter()
        .map(|x| 0.5 * x / total + 0.5 / r as f64)
        .collect()
}

/// Row-stochastic matrix with dominant diagonal: a convex mix of the
/// identity and random rows, which keeps it invertible, non-permutation,
/// and reconstructible from rows.
fn random_diag_dominant(r: usize, rng: &mut StdRng) -> Matrix<f64> {
    let alpha = 0.55 + 0.35 * rng.random::<f64>();
    let mut rows = Vec::with_capacity(r);
    for i in 0..r {
        let noise = random_distribution(r, rng);
        let mut row: Vec<f64> = noise.iter().map(|&p| (1.0 - alpha) * p).collect();
        row[i] += alpha;
        rows.push(row);
    }
    Matrix::from_rows(&rows).unwrap()
}

/// Random discrete model on a random tree: random positive root
/// distribution, random diagonally dominant transitions. Satisfies the
/// identifiability assumptions by construction (verified, resampling in the
/// measure-zero failure case).
pub fn random_model(d: usize, r: usize, seed: u64) -> DiscreteTreeModel<f64> {
    for attempt in 0..16 {
        let tree = random_tree::<f64>(d, derive_seed(&[seed, attempt, 1]));
        let mut rng = StdRng::seed_from_u64(derive_seed(&[seed, attempt, 2]));
        let root = tree
            .inner_nodes()
            .first()
            .copied()
            .unwrap_or_else(|| tree.nodes().next().unwrap());
        let root_dist = random_distribution(r, &mut rng);
        let mut transitions = BTreeMap::new();
        for (u, v) in directed_away_from(&tree, root) {
            transitions.insert((u, v), random_diag_dominant(r, &mut rng));
        }
        let model = if tree.inner_nodes().is_empty() {
            DiscreteTreeModel::allowing_leaf_root(tree, root, root_dist, transitions)
        } else {
            DiscreteTreeModel::new(tree, root, root_dist, transitions)
        }
        .unwrap();
        if model.check_assumptions().is_ok() {
            return model;
        }
    }
    panic!("could not draw a valid random model");
}

/// Random symmetric model: random tree plus a random theta per edge drawn
/// from (0.05, 0.45)/r scaled into the valid open interval.
pub fn random_symmetric_model(d: usize, r: usize, seed: u64) -> DiscreteTreeModel<f64> {
    let tree = random_tree::<f64>(d, derive_seed(&[seed, 3]));
    let mut rng = StdRng::seed_from_u64(derive_seed(&[seed, 4]));
    let thetas: BTreeMap<(NodeLabel, NodeLabel), f64> = tree
        .edges()
        .map(|e| (e, (0.05 + 0.40 * rng.random::<f64>()) / r as f64))
        .collect();
    DiscreteTreeModel::from_symmetric(&tree, r, &thetas).unwrap()
}

/// Random scalar linear model with unit-order variances and coefficients
/// bounded away from zero.
pub fn random_linear_model(d: usize, seed: u64) -> LinearTreeModel<f64> {
    let tree = random_tree::<f64>(d, derive_seed(&[seed, 5]));
    let mut rng = StdRng::seed_from_u64(derive_seed(&[seed, 6]));
    let root = tree
        .inner_nodes()
        .first()
        .copied()
        .unwrap_or_else(|| tree.nodes().next().unwrap());
    let mut coeffs = BTreeMap::new();
    let mut noise_vars = BTreeMap::new();
    for (u, v) in directed_away_from(&tree, root) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        coeffs.insert((u, v), sign * (0.3 + 0.6 * rng.random::<f64>()));
        noise_vars.insert((u, v), 0.2 + 0.8 * rng.random::<f64>());
    }
    let model = if tree.inner_nodes().is_empty() {
        LinearTreeModel::allowing_leaf_root(tree, root, 0.0, 1.0, coeffs, noise_vars)
    } else {
        LinearTreeModel::new(tree, root, 0.0, 1.0, coeffs, noise_vars)
    }
    .unwrap();
    model.check_assumptions().unwrap();
    model
}

/// Directed edges away from `root` in BFS order.
pub fn directed_away_from(
    tree: &LabeledTree<f64>,
    root: NodeLabel,
) -> Vec<(NodeLabel, NodeLabel)> {
    let mut order = Vec::new();
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

/// Decodes one Pruefer sequence into a tree on labels 1..=d.
pub fn tree_from_pruefer(seq: &[u64], d: usize) -> LabeledTree<f64> {
    assert_eq!(seq.len(), d.saturating_sub(2));
    if d == 2 {
        return LabeledTree::new([1, 2], [(1, 2)]).unwrap();
    }
    let mut degree: BTreeMap<u64, usize> = (1..=d as u64).map(|v| (v, 1)).collect();
    for &v in seq {
        *degree.get_mut(&v).unwrap() += 1;
    }
    let mut leaves: std::collections::BTreeSet<u64> = degree
        .iter()
        .filter(|&(_, &deg)| deg == 1)
        .map(|(&v, _)| v)
        .collect();
    let mut edges = Vec::with_capacity(d - 1);
    for &v in seq {
        let leaf = *leaves.iter().next().unwrap();
        leaves.remove(&leaf);
        edges.push((leaf, v));
        let deg = degree.get_mut(&v).unwrap();
        *deg -= 1;
        if *deg == 1 {
            leaves.insert(v);
        }
    }
    let mut rest = leaves.into_iter();
    let (a, b) = (rest.next().unwrap(), rest.next().unwrap());
    edges.push((a, b));
    LabeledTree::new(1..=d as u64, edges).unwrap()
}

/// Calls `f` with every labeled tree on `d` nodes (all Pruefer sequences).
pub fn for_all_trees(d: usize, mut f: impl FnMut(&LabeledTree<f64>)) {
    if d == 2 {
        f(&tree_from_pruefer(&[], 2));
        return;
    }
    let len = d - 2;
    let mut seq = vec![1u64; len];
    loop {
        f(&tree_from_pruefer(&seq, d));
        let mut pos = 0;
        loop {
            if pos == len {
                return;
            }
            seq[pos] += 1;
            if seq[pos] <= d as u64 {
                break;
            }
            seq[pos] = 1;
            pos += 1;
        }
    }
}
