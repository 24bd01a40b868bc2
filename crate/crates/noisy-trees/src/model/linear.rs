//! Scalar linear tree models: `X_v = lambda_uv X_u + eps_v` along the rooted
//! edges, with independent zero-mean Gaussian noise. The Gaussian tree model
//! is the canonical instance.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::num::Real;
use crate::seeding::derived_rng;
use crate::tree::{LabeledTree, NodeLabel};

use super::discrete::directed_edges;
use super::sample::SampleBatch;

/// Scalar linear model on a tree: root mean/variance plus per-edge
/// regression coefficients and noise variances.
#[derive(Clone, Debug)]
pub struct LinearTreeModel<F> {
    tree: LabeledTree<F>,
    root: NodeLabel,
    root_mean: F,
    root_var: F,
    coeffs: BTreeMap<(NodeLabel, NodeLabel), F>,
    noise_vars: BTreeMap<(NodeLabel, NodeLabel), F>,
    variances: BTreeMap<NodeLabel, F>,
}

impl<F: Real> LinearTreeModel<F> {
    /// Builds and validates a model; `coeffs` and `noise_vars` are keyed by
    /// the directed edges away from `root`. The root must be an inner node;
    /// use [`LinearTreeModel::allowing_leaf_root`] to lift that restriction.
    pub fn new(
        tree: LabeledTree<F>,
        root: NodeLabel,
        root_mean: F,
        root_var: F,
        coeffs: BTreeMap<(NodeLabel, NodeLabel), F>,
        noise_vars: BTreeMap<(NodeLabel, NodeLabel), F>,
    ) -> Result<Self> {
        Self::build(tree, root, root_mean, root_var, coeffs, noise_vars, false)
    }

    pub fn allowing_leaf_root(
        tree: LabeledTree<F>,
        root: NodeLabel,
        root_mean: F,
        root_var: F,
        coeffs: BTreeMap<(NodeLabel, NodeLabel), F>,
        noise_vars: BTreeMap<(NodeLabel, NodeLabel), F>,
    ) -> Result<Self> {
        Self::build(tree, root, root_mean, root_var, coeffs, noise_vars, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        tree: LabeledTree<F>,
        root: NodeLabel,
        root_mean: F,
        root_var: F,
        coeffs: BTreeMap<(NodeLabel, NodeLabel), F>,
        noise_vars: BTreeMap<(NodeLabel, NodeLabel), F>,
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
        if !root_var.is_finite() || root_var <= F::zero() {
            return Err(Error::InvalidParameter("root variance must be positive".into()));
        }
        let mut variances = BTreeMap::from([(root, root_var)]);
        for (u, v) in directed_edges(&tree, root) {
            let lambda = coeffs.get(&(u, v)).ok_or_else(|| {
                Error::InvalidParameter(format!("missing coefficient for edge {u} -> {v}"))
            })?;
            let sigma2 = noise_vars.get(&(u, v)).ok_or_else(|| {
                Error::InvalidParameter(format!("missing noise variance for edge {u} -> {v}"))
            })?;
            if !lambda.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "coefficient for edge {u} -> {v} is not finite"
                )));
            }
            if !sigma2.is_finite() || *sigma2 <= F::zero() {
                return Err(Error::InvalidParameter(format!(
                    "noise variance for edge {u} -> {v} must be positive"
                )));
            }
            let var_v = *lambda * *lambda * variances[&u] + *sigma2;
            variances.insert(v, var_v);
        }
        Ok(LinearTreeModel {
            tree,
            root,
            root_mean,
            root_var,
            coeffs,
            noise_vars,
            variances,
        })
    }

    pub fn tree(&self) -> &LabeledTree<F> {
        &self.tree
    }

    pub fn root(&self) -> NodeLabel {
        self.root
    }

    pub fn node_variance(&self, v: NodeLabel) -> Result<F> {
        self.variances.get(&v).copied().ok_or(Error::UnknownNode(v))
    }

    /// Correlation across one edge: `lambda * sd(parent) / sd(child)`.
    pub fn edge_correlation(&self, u: NodeLabel, v: NodeLabel) -> Result<F> {
        let (parent, child, lambda) = if let Some(&l) = self.coeffs.get(&(u, v)) {
            (u, v, l)
        } else if let Some(&l) = self.coeffs.get(&(v, u)) {
            (v, u, l)
        } else {
            return Err(Error::InvalidParameter(format!(
                "({u}, {v}) is not an edge of the model tree"
            )));
        };
        let sd_p = self.variances[&parent].sqrt();
        let sd_c = self.variances[&child].sqrt();
        Ok(lambda * sd_p / sd_c)
    }

    /// Model-implied correlation between any two nodes: the product of edge
    /// correlations along the path.
    pub fn correlation(&self, i: NodeLabel, j: NodeLabel) -> Result<F> {
        if i == j {
            return Ok(F::one());
        }
        let path = self.tree.path(i, j)?;
        let mut rho = F::one();
        for w in path.windows(2) {
            rho *= self.edge_correlation(w[0], w[1])?;
        }
        Ok(rho)
    }

    /// Full implied covariance matrix over the sorted node labels, by
    /// propagating covariances down the rooted tree.
    pub fn implied_covariance(&self) -> (Vec<NodeLabel>, Matrix<F>) {
        let labels: Vec<NodeLabel> = self.tree.nodes().collect();
        let index: BTreeMap<NodeLabel, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let n = labels.len();
        let mut cov = Matrix::zeros(n, n);
        let root_idx = index[&self.root];
        cov.set(root_idx, root_idx, self.root_var);
        let mut placed = vec![self.root];
        for (u, v) in directed_edges(&self.tree, self.root) {
            let lambda = self.coeffs[&(u, v)];
            let (ui, vi) = (index[&u], index[&v]);
            for &w in &placed {
                let wi = index[&w];
                let c = lambda * cov.get(ui, wi);
                cov.set(vi, wi, c);
                cov.set(wi, vi, c);
            }
            cov.set(vi, vi, self.variances[&v]);
            placed.push(v);
        }
        (labels, cov)
    }

    /// Checks (AL1) positive definiteness of the implied covariance and
    /// (AL2) nonzero, non-degenerate cross-covariance on every edge.
    pub fn check_assumptions(&self) -> Result<()> {
        let (_, cov) = self.implied_covariance();
        if cov.cholesky().is_none() {
            return Err(Error::AssumptionViolated {
                condition: "positive definite covariance",
                detail: "implied covariance has no Cholesky factor".into(),
            });
        }
        for (u, v) in directed_edges(&self.tree, self.root) {
            let lambda = self.coeffs[&(u, v)];
            if lambda == F::zero() {
                return Err(Error::AssumptionViolated {
                    condition: "invertible cross-covariance",
                    detail: format!("edge {u} -> {v} has coefficient zero"),
                });
            }
            let rho = self.edge_correlation(u, v)?;
            if (rho * rho - F::one()).abs() <= F::epsilon() {
                return Err(Error::AssumptionViolated {
                    condition: "non-degenerate edges",
                    detail: format!("edge {u} -> {v} is functionally deterministic"),
                });
            }
        }
        Ok(())
    }

    /// Draws `n` i.i.d. rows by ancestral sampling, one derived RNG stream
    /// per row.
    pub fn sample(&self, n: usize, seed: u64) -> SampleBatch<F>
    where
        StandardNormal: Distribution<F>,
    {
        let labels: Vec<NodeLabel> = self.tree.nodes().collect();
        let index: BTreeMap<NodeLabel, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let edges = directed_edges(&self.tree, self.root);
        let d = labels.len();
        let mut values = vec![F::zero(); n * d];
        let mut row_vals = vec![F::zero(); d];
        let root_sd = self.root_var.sqrt();
        for row in 0..n {
            let mut rng = derived_rng(&[seed, 0x11_4EA2, row as u64]);
            let z: F = StandardNormal.sample(&mut rng);
            row_vals[index[&self.root]] = self.root_mean + root_sd * z;
            for &(u, v) in &edges {
                let z: F = StandardNormal.sample(&mut rng);
                let noise_sd = self.noise_vars[&(u, v)].sqrt();
                row_vals[index[&v]] = self.coeffs[&(u, v)] * row_vals[index[&u]] + noise_sd * z;
            }
            values[row * d..(row + 1) * d].copy_from_slice(&row_vals);
        }
        SampleBatch::continuous(labels, n, values, seed).expect("consistent dimensions")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::LabeledTree;

    type Tree = LabeledTree<f64>;

    fn chain_model(lambdas: &[f64]) -> LinearTreeModel<f64> {
        let n = lambdas.len() as u64 + 1;
        let tree = Tree::new(1..=n, (1..n).map(|i| (i, i + 1))).unwrap();
        let coeffs: BTreeMap<(u64, u64), f64> = lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| ((i as u64 + 1, i as u64 + 2), l))
            .collect();
        let noise: BTreeMap<(u64, u64), f64> =
            coeffs.keys().map(|&e| (e, 0.5)).collect();
        LinearTreeModel::allowing_leaf_root(tree, 1, 0.0, 1.0, coeffs, noise).unwrap()
    }

    #[test]
    fn correlation_is_product_of_edge_correlations() {
        let model = chain_model(&[0.8, -0.6, 0.9]);
        let direct = model.correlation(1, 4).unwrap();
        let product = model.edge_correlation(1, 2).unwrap()
            * model.edge_correlation(2, 3).unwrap()
            * model.edge_correlation(3, 4).unwrap();
        assert!((direct - product).abs() < 1e-15);
    }

    #[test]
    fn implied_covariance_matches_correlations() {
        let model = chain_model(&[0.7, 0.5]);
        let (labels, cov) = model.implied_covariance();
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                let rho = cov.get(i, j) / (cov.get(i, i) * cov.get(j, j)).sqrt();
                assert!((rho - model.correlation(li, lj).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn assumptions_flag_zero_coefficient() {
        let model = chain_model(&[0.7, 0.0]);
        assert!(matches!(
            model.check_assumptions(),
            Err(Error::AssumptionViolated { .. })
        ));
        assert!(chain_model(&[0.7, 0.5]).check_assumptions().is_ok());
    }

    #[test]
    fn independent_sampling_has_vanishing_correlation() {
        let model = chain_model(&[0.0, 0.0]);
        // lambda = 0 trips the assumption checker but sampling still works.
        let n = 200_000;
        let batch = model.sample(n, 11);
        for (a, b) in [(0usize, 1usize), (1, 2), (0, 2)] {
            let mut sx = 0.0;
            let mut sy = 0.0;
            let mut sxx = 0.0;
            let mut syy = 0.0;
            let mut sxy = 0.0;
            for row in 0..n {
                let x = batch.value(row, a);
                let y = batch.value(row, b);
                sx += x;
                sy += y;
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
            }
            let nf = n as f64;
            let corr = (sxy / nf - sx * sy / (nf * nf))
                / ((sxx / nf - (sx / nf).powi(2)).sqrt() * (syy / nf - (sy / nf).powi(2)).sqrt());
            assert!(corr.abs() < 0.01, "columns {a},{b} correlate at {corr}");
        }
    }

    #[test]
    fn sampled_correlation_matches_model() {
        let model = chain_model(&[0.8]);
        let n = 200_000;
        let batch = model.sample(n, 5);
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        let mut sxy = 0.0;
        for row in 0..n {
            let x = batch.value(row, 0);
            let y = batch.value(row, 1);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let nf = n as f64;
        let corr = (sxy / nf - sx * sy / (nf * nf))
            / ((sxx / nf - (sx / nf).powi(2)).sqrt() * (syy / nf - (sy / nf).powi(2)).sqrt());
        let want = model.correlation(1, 2).unwrap();
        assert!((corr - want).abs() < 0.01, "sampled {corr} vs model {want}");
    }
}
