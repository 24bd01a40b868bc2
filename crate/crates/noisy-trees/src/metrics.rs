//! Determinant-based similarities and the induced tree metric.
//!
//! For a pairwise joint P over r states, `tau = det(P) / sqrt(det(P_u P_v))`
//! where `P_u`, `P_v` are the diagonal marginal matrices; `d = -log tau^2`
//! is additive along tree paths and so forms a tree metric. Natural
//! logarithms throughout. The same construction covers linear models through
//! normalized cross-covariance determinants, which reduce to Pearson
//! correlations in the scalar case.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{CorruptionSpec, DiscreteTreeModel, LinearTreeModel, SampleBatch};
use crate::num::{real, stochastic_tol, Real};
use crate::tree::{noisy_offset_for, NodeLabel};

/// Where a matrix's entries came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Empirical { n: usize, estimator: Estimator },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// Plug-in contingency tables for discrete data.
    DiscretePlugin,
    /// Sample Pearson correlations for continuous data.
    Correlation,
}

/// Options for the empirical estimators.
#[derive(Clone, Debug)]
pub struct EstimatorOptions<F> {
    /// Distance assigned when the estimated tau is exactly zero.
    pub d_max: F,
    /// Optional add-lambda smoothing for discrete contingency tables.
    pub smoothing: Option<F>,
}

impl<F: Real> Default for EstimatorOptions<F> {
    fn default() -> Self {
        EstimatorOptions {
            d_max: real::<F>(50.0),
            smoothing: None,
        }
    }
}

/// Symmetric nonnegative distances with zero diagonal over labeled nodes.
#[derive(Clone, Debug)]
pub struct DistanceMatrix<F> {
    labels: Vec<NodeLabel>,
    values: Vec<F>,
    provenance: Provenance,
    flagged: Vec<(NodeLabel, NodeLabel)>,
}

impl<F: Real> DistanceMatrix<F> {
    /// Validates symmetry (within 1e-12 for f64), zero diagonal, and
    /// nonnegative finite entries.
    pub fn new(labels: Vec<NodeLabel>, values: Vec<F>, provenance: Provenance) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for {} labels, got {}",
                n * n,
                n,
                values.len()
            )));
        }
        let tol = stochastic_tol::<F>();
        for i in 0..n {
            if values[i * n + i] != F::zero() {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry for label {} is not zero",
                    labels[i]
                )));
            }
            for j in 0..i {
                let a = values[i * n + j];
                let b = values[j * n + i];
                if !a.is_finite() || a < F::zero() {
                    return Err(Error::InvalidParameter(format!(
                        "distance ({}, {}) is {a}",
                        labels[i], labels[j]
                    )));
                }
                if (a - b).abs() > tol {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric entries at ({}, {}): {a} vs {b}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(DistanceMatrix {
            labels,
            values,
            provenance,
            flagged: Vec::new(),
        })
    }

    /// Builds from a function over label pairs (symmetrized by construction).
    pub fn from_fn(
        labels: Vec<NodeLabel>,
        provenance: Provenance,
        mut f: impl FnMut(NodeLabel, NodeLabel) -> Result<F>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut values = vec![F::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = f(labels[i], labels[j])?;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        DistanceMatrix::new(labels, values, provenance)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Entries clamped or defaulted by the empirical estimator.
    pub fn flagged(&self) -> &[(NodeLabel, NodeLabel)] {
        &self.flagged
    }

    pub(crate) fn set_flagged(&mut self, flagged: Vec<(NodeLabel, NodeLabel)>) {
        self.flagged = flagged;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[i * self.labels.len() + j]
    }

    pub fn index_of(&self, label: NodeLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn by_label(&self, u: NodeLabel, v: NodeLabel) -> Result<F> {
        let i = self.index_of(u).ok_or(Error::UnknownNode(u))?;
        let j = self.index_of(v).ok_or(Error::UnknownNode(v))?;
        Ok(self.get(i, j))
    }

    /// Adds node noise lengths: `d_bar(u, v) = d(u, v) + ell_u + ell_v`, and
    /// moves the labels into the noisy-copy namespace.
    pub fn with_noise_lengths(&self, ells: &BTreeMap<NodeLabel, F>) -> Result<DistanceMatrix<F>> {
        let n = self.labels.len();
        let offset = noisy_offset_for(self.labels.iter().copied().max().unwrap_or(0));
        let per_label: Vec<F> = self
            .labels
            .iter()
            .map(|l| {
                ells.get(l)
                    .copied()
                    .ok_or_else(|| Error::InvalidParameter(format!("missing noise length for node {l}")))
            })
            .collect::<Result<_>>()?;
        let mut values = self.values.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    values[i * n + j] = values[i * n + j] + per_label[i] + per_label[j];
                }
            }
        }
        DistanceMatrix::new(
            self.labels.iter().map(|&l| offset + l).collect(),
            values,
            self.provenance.clone(),
        )
    }

    /// The submatrix over the given labels (order preserved).
    pub fn restrict(&self, labels: &[NodeLabel]) -> Result<DistanceMatrix<F>> {
        let indices: Vec<usize> = labels
            .iter()
            .map(|&l| self.index_of(l).ok_or(Error::UnknownNode(l)))
            .collect::<Result<_>>()?;
        let n = labels.len();
        let mut values = vec![F::zero(); n * n];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                values[a * n + b] = self.get(i, j);
            }
        }
        let mut out = DistanceMatrix::new(labels.to_vec(), values, self.provenance.clone())?;
        out.set_flagged(
            self.flagged
                .iter()
                .filter(|(u, v)| labels.contains(u) && labels.contains(v))
                .copied()
                .collect(),
        );
        Ok(out)
    }

    /// Largest four-point violation over all label quadruples: for each
    /// quadruple the two largest of the three pairwise sums must agree on a
    /// tree metric, so this is zero (up to tolerance) exactly when the
    /// matrix is additive.
    pub fn max_four_point_violation(&self) -> F {
        let n = self.labels.len();
        let mut worst = F::zero();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        let s1 = self.get(a, b) + self.get(c, d);
                        let s2 = self.get(a, c) + self.get(b, d);
                        let s3 = self.get(a, d) + self.get(b, c);
                        let mut sums = [s1, s2, s3];
                        sums.sort_by(|x, y| x.partial_cmp(y).expect("finite distances"));
                        let gap = sums[2] - sums[1];
                        if gap > worst {
                            worst = gap;
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Signed similarities `tau` with unit diagonal.
#[derive(Clone, Debug)]
pub struct SimilarityMatrix<F> {
    labels: Vec<NodeLabel>,
    values: Vec<F>,
    provenance: Provenance,
}

impl<F: Real> SimilarityMatrix<F> {
    pub fn new(labels: Vec<NodeLabel>, values: Vec<F>, provenance: Provenance) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for {} labels, got {}",
                n * n,
                n,
                values.len()
            )));
        }
        for i in 0..n {
            if (values[i * n + i] - F::one()).abs() > stochastic_tol::<F>() {
                return Err(Error::InvalidParameter("similarity diagonal must be one".into()));
            }
        }
        Ok(SimilarityMatrix {
            labels,
            values,
            provenance,
        })
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[i * self.labels.len() + j]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Converts to distances `d = -log tau^2`; off-diagonal taus must lie
    /// strictly between -1 and 1 and away from 0.
    pub fn to_distances(&self) -> Result<DistanceMatrix<F>> {
        let n = self.labels.len();
        let mut values = vec![F::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let tau2 = self.get(i, j) * self.get(i, j);
                if tau2 <= F::zero() || tau2 >= F::one() {
                    return Err(Error::DegenerateChannel(format!(
                        "tau({}, {}) = {} does not map to a finite distance",
                        self.labels[i],
                        self.labels[j],
                        self.get(i, j)
                    )));
                }
                values[i * n + j] = -tau2.ln();
            }
        }
        DistanceMatrix::new(self.labels.clone(), values, self.provenance.clone())
    }
}

/// Determinant-based similarity of a pairwise joint table.
///
/// For binary variables this equals the Pearson correlation.
pub fn tau_from_joint<F: Real>(joint: &Matrix<F>) -> Result<F> {
    assert!(joint.is_square(), "pair joints are square");
    let row_marginal = joint.row_sums();
    let col_marginal = joint.col_sums();
    for (idx, &p) in row_marginal.iter().enumerate() {
        if p <= F::zero() {
            return Err(Error::SingularMarginal { index: idx });
        }
    }
    for (idx, &p) in col_marginal.iter().enumerate() {
        if p <= F::zero() {
            return Err(Error::SingularMarginal { index: idx });
        }
    }
    let det_u: F = row_marginal.iter().copied().product();
    let det_v: F = col_marginal.iter().copied().product();
    Ok(joint.determinant() / (det_u * det_v).sqrt())
}

/// Similarity of a linear pair: `det(S_uu^{-1/2} S_uv S_vv^{-1/2})`, which
/// equals `det S_uv / sqrt(det S_uu det S_vv)`. Scalar blocks reduce to the
/// Pearson correlation.
pub fn tau_linear<F: Real>(
    sigma_uv: &Matrix<F>,
    sigma_uu: &Matrix<F>,
    sigma_vv: &Matrix<F>,
) -> Result<F> {
    if sigma_uu.cholesky().is_none() || sigma_vv.cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let det_u = sigma_uu.determinant();
    let det_v = sigma_vv.determinant();
    Ok(sigma_uv.determinant() / (det_u * det_v).sqrt())
}

/// Scalar convenience form of [`tau_linear`].
pub fn tau_scalar<F: Real>(cov_uv: F, var_u: F, var_v: F) -> Result<F> {
    if var_u.is_nan() || var_v.is_nan() || var_u <= F::zero() || var_v <= F::zero() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(cov_uv / (var_u * var_v).sqrt())
}

/// Mutual information of a joint table, in nats, with the `0 log 0 = 0`
/// convention. Zero iff the joint is an outer product of its marginals.
pub fn mutual_information<F: Real>(joint: &Matrix<F>) -> F {
    let row_marginal = joint.row_sums();
    let col_marginal = joint.col_sums();
    let mut mi = F::zero();
    for i in 0..joint.rows() {
        for j in 0..joint.cols() {
            let p = joint.get(i, j);
            if p > F::zero() {
                mi += p * (p / (row_marginal[i] * col_marginal[j])).ln();
            }
        }
    }
    if mi < F::zero() {
        F::zero()
    } else {
        mi
    }
}

/// Exact pairwise distances implied by a discrete model, as the sum of
/// per-edge lengths along tree paths. With a corruption spec, distances are
/// between the noisy copies: `d_bar(i, j) = d(i, j) + ell_i + ell_j`, and
/// the labels move to the noisy namespace.
pub fn distance_matrix_exact<F: Real>(
    model: &DiscreteTreeModel<F>,
    noise: Option<&CorruptionSpec<F>>,
) -> Result<DistanceMatrix<F>> {
    model.check_assumptions()?;
    let tree = model.tree();
    let labels: Vec<NodeLabel> = tree.nodes().collect();

    // Per-edge lengths from the edge taus; path additivity does the rest.
    let mut edge_len: BTreeMap<(NodeLabel, NodeLabel), F> = BTreeMap::new();
    for (u, v) in tree.edges() {
        let tau = tau_from_joint(&model.pair_marginal(u, v)?)?;
        let tau2 = tau * tau;
        if tau2 <= F::zero() || tau2 >= F::one() {
            return Err(Error::AssumptionViolated {
                condition: "invertible non-permutation transitions",
                detail: format!("edge ({u}, {v}) has tau^2 = {tau2}"),
            });
        }
        edge_len.insert((u, v), -tau2.ln());
    }
    let dist = |i: NodeLabel, j: NodeLabel| -> Result<F> {
        let path = tree.path(i, j)?;
        Ok(path
            .windows(2)
            .map(|w| {
                let key = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
                edge_len[&key]
            })
            .sum())
    };
    let clean = DistanceMatrix::from_fn(labels.clone(), Provenance::Exact, dist)?;
    match noise {
        None => Ok(clean),
        Some(spec) => {
            let marginals: BTreeMap<NodeLabel, Vec<F>> = labels
                .iter()
                .map(|&l| Ok((l, model.node_marginal(l)?.to_vec())))
                .collect::<Result<_>>()?;
            let ells = spec.edge_lengths(&marginals)?;
            clean.with_noise_lengths(&ells)
        }
    }
}

/// Exact pairwise distances implied by a scalar linear model:
/// `d = -log rho^2` for the model correlations.
pub fn distance_matrix_exact_linear<F: Real>(
    model: &LinearTreeModel<F>,
) -> Result<DistanceMatrix<F>> {
    model.check_assumptions()?;
    let labels: Vec<NodeLabel> = model.tree().nodes().collect();
    DistanceMatrix::from_fn(labels, Provenance::Exact, |i, j| {
        let rho = model.correlation(i, j)?;
        let rho2 = rho * rho;
        if rho2 <= F::zero() || rho2 >= F::one() {
            return Err(Error::AssumptionViolated {
                condition: "non-degenerate correlations",
                detail: format!("rho({i}, {j})^2 = {rho2}"),
            });
        }
        Ok(-rho2.ln())
    })
}

/// Estimator kind for [`distance_matrix_empirical`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmpiricalKind {
    Discrete,
    Continuous,
}

/// Plug-in distance estimates from a sample batch.
///
/// Discrete: empirical pairwise contingency tables into [`tau_from_joint`].
/// Continuous: sample Pearson correlations. Estimates with `tau_hat^2 >= 1`
/// are clamped to `1 - 1e-12` and flagged; `tau_hat = 0` entries get
/// `opts.d_max` and are flagged.
pub fn distance_matrix_empirical<F: Real>(
    batch: &SampleBatch<F>,
    kind: EmpiricalKind,
    opts: &EstimatorOptions<F>,
) -> Result<DistanceMatrix<F>> {
    if batch.n() == 0 {
        return Err(Error::EmptyBatch);
    }
    let labels = batch.labels().to_vec();
    let n_cols = labels.len();
    let mut flagged = Vec::new();
    let estimator = match kind {
        EmpiricalKind::Discrete => Estimator::DiscretePlugin,
        EmpiricalKind::Continuous => Estimator::Correlation,
    };

    // Degenerate (constant) columns cannot produce a similarity.
    for (col, &label) in labels.iter().enumerate() {
        let first = batch.value(0, col);
        if (1..batch.n()).all(|row| batch.value(row, col) == first) {
            return Err(Error::DegenerateColumn { label });
        }
    }

    let n_f = F::from_usize(batch.n()).expect("batch size fits");
    let tau_hat = |i: usize, j: usize| -> Result<F> {
        match kind {
            EmpiricalKind::Discrete => {
                let r = batch.r().ok_or_else(|| {
                    Error::SpecMismatch("discrete estimator on a continuous batch".into())
                })?;
                let mut counts = Matrix::zeros(r, r);
                for row in 0..batch.n() {
                    let (a, b) = (batch.state(row, i), batch.state(row, j));
                    counts.set(a, b, counts.get(a, b) + F::one());
                }
                let joint = match opts.smoothing {
                    None => counts.scaled(F::one() / n_f),
                    Some(lambda) => {
                        let total = n_f + lambda * F::from_usize(r * r).expect("small r");
                        let mut m = counts;
                        for a in 0..r {
                            for b in 0..r {
                                m.set(a, b, (m.get(a, b) + lambda) / total);
                            }
                        }
                        m
                    }
                };
                tau_from_joint(&joint)
            }
            EmpiricalKind::Continuous => {
                let mut sx = F::zero();
                let mut sy = F::zero();
                let mut sxx = F::zero();
                let mut syy = F::zero();
                let mut sxy = F::zero();
                for row in 0..batch.n() {
                    let x = batch.value(row, i);
                    let y = batch.value(row, j);
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
                let var_x = sxx / n_f - (sx / n_f) * (sx / n_f);
                let var_y = syy / n_f - (sy / n_f) * (sy / n_f);
                let cov = sxy / n_f - (sx / n_f) * (sy / n_f);
                tau_scalar(cov, var_x, var_y)
            }
        }
    };

    let n = n_cols;
    let mut values = vec![F::zero(); n * n];
    let clamp_tau2 = F::one() - real::<F>(1e-12);
    for i in 0..n {
        for j in (i + 1)..n {
            let tau = tau_hat(i, j)?;
            let mut tau2 = tau * tau;
            let d = if tau2 == F::zero() {
                flagged.push((labels[i], labels[j]));
                opts.d_max
            } else {
                if tau2 >= F::one() {
                    flagged.push((labels[i], labels[j]));
                    tau2 = clamp_tau2;
                }
                -tau2.ln()
            };
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let mut dm = DistanceMatrix::new(
        labels,
        values,
        Provenance::Empirical {
            n: batch.n(),
            estimator,
        },
    )?;
    dm.set_flagged(flagged);
    Ok(dm)
}
