//! Per-node corruption channels: arbitrary stochastic matrices, the uniform
//! flip special case, and Beta channels that blur binary states into [0, 1].
//!
//! Corruption is cell-wise independent given the clean value. Every cell
//! draws from its own RNG stream derived from (seed, row, column), so
//! corrupted batches are reproducible under any evaluation order.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::num::{real, Real};
use crate::seeding::derived_rng;
use crate::tree::{noisy_offset_for, NodeLabel};

use super::sample::{BatchData, SampleBatch};

/// A single node's noise channel.
#[derive(Clone, Debug)]
pub enum Channel<F> {
    /// Arbitrary row-stochastic transition from clean to observed state.
    Stochastic(Matrix<F>),
    /// Keeps the state with probability `1 - q`, otherwise uniform over the
    /// remaining `r - 1` states.
    UniformFlip { q: F },
    /// Observed value is Beta-distributed given the binary clean state:
    /// `Beta(alpha0, beta0)` under 0 and `Beta(alpha1, beta1)` under 1.
    Beta { alpha0: F, beta0: F, alpha1: F, beta1: F },
}

impl<F: Real> Channel<F> {
    pub fn stochastic(m: Matrix<F>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter("channel matrix must be square".into()));
        }
        if !m.is_row_stochastic() {
            return Err(Error::InvalidParameter("channel matrix must be row-stochastic".into()));
        }
        Ok(Channel::Stochastic(m))
    }

    pub fn uniform_flip(q: F) -> Result<Self> {
        if q.is_nan() || q < F::zero() || q > F::one() {
            return Err(Error::InvalidParameter(format!("flip probability {q} outside [0, 1]")));
        }
        Ok(Channel::UniformFlip { q })
    }

    /// Beta channel enforcing the identifiability ratio condition
    /// `alpha0/beta0 < 1 < alpha1/beta1`.
    pub fn beta(alpha0: F, beta0: F, alpha1: F, beta1: F) -> Result<Self> {
        let ch = Self::beta_unchecked(alpha0, beta0, alpha1, beta1)?;
        if !(alpha0 / beta0 < F::one() && F::one() < alpha1 / beta1) {
            return Err(Error::InvalidParameter(
                "Beta channel violates the ratio condition alpha0/beta0 < 1 < alpha1/beta1"
                    .into(),
            ));
        }
        Ok(ch)
    }

    /// Beta channel without the ratio condition, for negative testing.
    pub fn beta_unchecked(alpha0: F, beta0: F, alpha1: F, beta1: F) -> Result<Self> {
        for (name, v) in [("alpha0", alpha0), ("beta0", beta0), ("alpha1", alpha1), ("beta1", beta1)] {
            if !v.is_finite() || v <= F::zero() {
                return Err(Error::InvalidParameter(format!(
                    "Beta parameter {name} = {v} must be positive and finite"
                )));
            }
        }
        Ok(Channel::Beta { alpha0, beta0, alpha1, beta1 })
    }

    /// Symmetric discrete channel whose noise edge has length `ell`.
    pub fn symmetric_for_length(r: usize, ell: F) -> Result<Self> {
        if !ell.is_finite() || ell <= F::zero() {
            return Err(Error::InvalidParameter(format!("noise length {ell} must be positive")));
        }
        let theta = super::discrete::theta_for_edge_length(r, ell);
        let rm1 = F::from_usize(r - 1).expect("small r");
        Self::uniform_flip(rm1 * theta)
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Channel::Beta { .. })
    }

    /// Transition matrix of a discrete channel for `r` clean states.
    pub fn flip_matrix(&self, r: usize) -> Result<Matrix<F>> {
        match self {
            Channel::Stochastic(m) => {
                if m.rows() != r {
                    return Err(Error::SpecMismatch(format!(
                        "channel matrix is {}x{}, data has r = {r}",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(m.clone())
            }
            Channel::UniformFlip { q } => {
                let mut m = Matrix::zeros(r, r);
                let off = *q / F::from_usize(r - 1).expect("small r");
                for i in 0..r {
                    for j in 0..r {
                        m.set(i, j, if i == j { F::one() - *q } else { off });
                    }
                }
                Ok(m)
            }
            Channel::Beta { .. } => Err(Error::SpecMismatch(
                "Beta channel has no discrete transition matrix".into(),
            )),
        }
    }

    /// Conditional mean and variance of the observed value given each clean
    /// binary state (Beta channels only).
    fn beta_moments(&self) -> Option<[(F, F); 2]> {
        let Channel::Beta { alpha0, beta0, alpha1, beta1 } = *self else {
            return None;
        };
        let mv = |a: F, b: F| {
            let mean = a / (a + b);
            let var = a * b / ((a + b) * (a + b) * (a + b + F::one()));
            (mean, var)
        };
        Some([mv(alpha0, beta0), mv(alpha1, beta1)])
    }

    /// Similarity between a node and its corrupted copy, given the clean
    /// marginal distribution.
    ///
    /// Discrete channels: `tau^2 = det(P)^2 / (det P_clean * det P_noisy)`
    /// for the joint `P = diag(marginal) * M`. Beta channels (binary clean
    /// state): the correlation computed from Beta moments.
    pub fn tau(&self, clean_marginal: &[F]) -> Result<F> {
        if clean_marginal.iter().any(|&p| p <= F::zero()) {
            return Err(Error::DegenerateChannel(
                "clean marginal has a zero entry".into(),
            ));
        }
        match self {
            Channel::Stochastic(_) | Channel::UniformFlip { .. } => {
                let r = clean_marginal.len();
                let m = self.flip_matrix(r)?;
                let joint = m.scale_rows(clean_marginal);
                let noisy_marginal = joint.col_sums();
                if noisy_marginal.iter().any(|&p| p <= F::zero()) {
                    return Err(Error::DegenerateChannel(
                        "noisy marginal has a zero entry".into(),
                    ));
                }
                let det_clean: F = clean_marginal.iter().copied().product();
                let det_noisy: F = noisy_marginal.iter().copied().product();
                Ok(joint.determinant() / (det_clean * det_noisy).sqrt())
            }
            Channel::Beta { .. } => {
                if clean_marginal.len() != 2 {
                    return Err(Error::SpecMismatch(
                        "Beta channel applies to binary clean variables".into(),
                    ));
                }
                let p = clean_marginal[1];
                let [(m0, v0), (m1, v1)] = self.beta_moments().expect("beta channel");
                let q = F::one() - p;
                let var_clean = p * q;
                let var_noisy = q * v0 + p * v1 + var_clean * (m1 - m0) * (m1 - m0);
                let cov = var_clean * (m1 - m0);
                Ok(cov / (var_clean * var_noisy).sqrt())
            }
        }
    }

    /// Length of the noise edge, `ell = -log(tau^2)`.
    pub fn edge_length(&self, clean_marginal: &[F]) -> Result<F> {
        let tau = self.tau(clean_marginal)?;
        let tau2 = tau * tau;
        if tau2 <= F::zero() {
            return Err(Error::DegenerateChannel("tau is zero".into()));
        }
        if tau2 >= F::one() {
            return Err(Error::DegenerateChannel("|tau| is one (permutation channel)".into()));
        }
        Ok(-tau2.ln())
    }

    /// Ratio of extreme singular values of the discrete channel matrix.
    pub fn condition_number(&self, r: usize) -> Result<F> {
        let m = self.flip_matrix(r)?;
        m.condition_number()
            .ok_or_else(|| Error::DegenerateChannel("channel matrix is singular".into()))
    }
}

/// Per-node channels covering every column of a batch.
#[derive(Clone, Debug)]
pub struct CorruptionSpec<F> {
    channels: BTreeMap<NodeLabel, Channel<F>>,
}

impl<F: Real> CorruptionSpec<F> {
    pub fn new(channels: BTreeMap<NodeLabel, Channel<F>>) -> Self {
        CorruptionSpec { channels }
    }

    /// The same channel at every listed node.
    pub fn homogeneous(labels: impl IntoIterator<Item = NodeLabel>, channel: Channel<F>) -> Self {
        CorruptionSpec {
            channels: labels.into_iter().map(|l| (l, channel.clone())).collect(),
        }
    }

    pub fn channel(&self, label: NodeLabel) -> Option<&Channel<F>> {
        self.channels.get(&label)
    }

    pub fn labels(&self) -> impl Iterator<Item = NodeLabel> + '_ {
        self.channels.keys().copied()
    }

    /// Noise edge length per node, given each node's clean marginal.
    pub fn edge_lengths(
        &self,
        marginals: &BTreeMap<NodeLabel, Vec<F>>,
    ) -> Result<BTreeMap<NodeLabel, F>> {
        self.channels
            .iter()
            .map(|(&label, ch)| {
                let marg = marginals.get(&label).ok_or(Error::UnknownNode(label))?;
                Ok((label, ch.edge_length(marg)?))
            })
            .collect()
    }
}

/// Applies the corruption spec cell-wise. Discrete channels need matching
/// state counts; Beta channels need binary data and produce a continuous
/// batch. Mixing Beta and discrete channels in one spec is rejected.
///
/// Output columns are relabeled into the noisy-copy namespace
/// (`offset + label`, offset from [`noisy_offset_for`]).
pub fn corrupt<F: Real>(
    batch: &SampleBatch<F>,
    spec: &CorruptionSpec<F>,
    seed: u64,
) -> Result<SampleBatch<F>> {
    let BatchData::Discrete { r, states } = batch.data() else {
        return Err(Error::SpecMismatch("can only corrupt discrete batches".into()));
    };
    let r = *r;
    let labels = batch.labels();
    let channels: Vec<&Channel<F>> = labels
        .iter()
        .map(|&l| {
            spec.channel(l)
                .ok_or_else(|| Error::SpecMismatch(format!("no channel for column {l}")))
        })
        .collect::<Result<_>>()?;
    let any_beta = channels.iter().any(|c| c.is_continuous());
    if any_beta && !channels.iter().all(|c| c.is_continuous()) {
        return Err(Error::SpecMismatch(
            "cannot mix Beta and discrete channels in one spec".into(),
        ));
    }

    let offset = noisy_offset_for(labels.iter().copied().max().unwrap_or(0));
    let noisy_labels: Vec<NodeLabel> = labels.iter().map(|&l| offset + l).collect();
    let n = batch.n();
    let d = labels.len();

    if any_beta {
        if r != 2 {
            return Err(Error::SpecMismatch(format!(
                "Beta channels need binary data, got r = {r}"
            )));
        }
        let mut values = vec![F::zero(); n * d];
        for (col, ch) in channels.iter().enumerate() {
            let Channel::Beta { alpha0, beta0, alpha1, beta1 } = ch else {
                unreachable!("all channels are Beta here");
            };
            let params = [
                (alpha0.to_f64().expect("finite"), beta0.to_f64().expect("finite")),
                (alpha1.to_f64().expect("finite"), beta1.to_f64().expect("finite")),
            ];
            for row in 0..n {
                let clean = usize::from(states[row * d + col]);
                let (a, b) = params[clean];
                let mut rng = derived_rng(&[seed, 0xC0_44B7, row as u64, col as u64]);
                values[row * d + col] = real::<F>(sample_beta(a, b, &mut rng));
            }
        }
        return SampleBatch::continuous(noisy_labels, n, values, seed);
    }

    let mut cdfs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(d);
    for ch in &channels {
        let m = ch.flip_matrix(r)?;
        cdfs.push((0..r).map(|a| cdf_f64(m.row(a))).collect());
    }
    let mut out = vec![0u16; n * d];
    for row in 0..n {
        for col in 0..d {
            let clean = usize::from(states[row * d + col]);
            let mut rng = derived_rng(&[seed, 0xC0_44B7, row as u64, col as u64]);
            let u: f64 = rng.random();
            out[row * d + col] = draw(&cdfs[col][clean], u) as u16;
        }
    }
    SampleBatch::discrete(noisy_labels, n, r, out, seed)
}

/// Beta(a, b) draw by the two-Gamma construction.
fn sample_beta(a: f64, b: f64, rng: &mut impl Rng) -> f64 {
    let ga = Gamma::new(a, 1.0).expect("valid shape").sample(rng);
    let gb = Gamma::new(b, 1.0).expect("valid shape").sample(rng);
    ga / (ga + gb)
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
    use crate::model::discrete::DiscreteTreeModel;
    use crate::tree::LabeledTree;

    fn two_column_batch(n: usize, seed: u64) -> SampleBatch<f64> {
        let tree = LabeledTree::<f64>::new([1, 2], [(1, 2)]).unwrap();
        let model = DiscreteTreeModel::uniform_symmetric(&tree, 2, 0.2).unwrap();
        model.sample(n, seed)
    }

    #[test]
    fn identity_channel_is_a_no_op_on_cells() {
        let batch = two_column_batch(500, 1);
        let spec = CorruptionSpec::homogeneous([1, 2], Channel::uniform_flip(0.0).unwrap());
        let noisy = corrupt(&batch, &spec, 99).unwrap();
        assert_eq!(noisy.labels(), &[1001, 1002]);
        for row in 0..500 {
            for col in 0..2 {
                assert_eq!(batch.state(row, col), noisy.state(row, col));
            }
        }
    }

    #[test]
    fn flip_rate_matches_q() {
        let n = 200_000;
        let batch = two_column_batch(n, 2);
        let spec = CorruptionSpec::homogeneous([1, 2], Channel::uniform_flip(0.3).unwrap());
        let noisy = corrupt(&batch, &spec, 7).unwrap();
        for col in 0..2 {
            let flips = (0..n)
                .filter(|&row| batch.state(row, col) != noisy.state(row, col))
                .count();
            let rate = flips as f64 / n as f64;
            assert!((rate - 0.3).abs() < 0.005, "column {col} rate {rate}");
        }
    }

    #[test]
    fn beta_channel_conditional_means() {
        let n = 200_000;
        let batch = two_column_batch(n, 3);
        let spec = CorruptionSpec::homogeneous(
            [1, 2],
            Channel::beta(1.0, 3.0, 3.0, 1.0).unwrap(),
        );
        let noisy = corrupt(&batch, &spec, 13).unwrap();
        assert!(!noisy.is_discrete());
        for col in 0..2 {
            let mut sums = [0.0f64; 2];
            let mut counts = [0usize; 2];
            for row in 0..n {
                let clean = batch.state(row, col);
                sums[clean] += noisy.value(row, col);
                counts[clean] += 1;
            }
            let mean0 = sums[0] / counts[0] as f64;
            let mean1 = sums[1] / counts[1] as f64;
            assert!((mean0 - 0.25).abs() < 0.01, "mean given 0: {mean0}");
            assert!((mean1 - 0.75).abs() < 0.01, "mean given 1: {mean1}");
            for row in 0..n {
                let v = noisy.value(row, col);
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn beta_ratio_condition_enforced_and_overridable() {
        assert!(Channel::beta(3.0, 1.0, 1.0, 3.0).is_err());
        assert!(Channel::beta_unchecked(3.0, 1.0, 1.0, 3.0).is_ok());
        assert!(Channel::beta(1.0, 2.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn edge_length_of_symmetric_channel_hits_two() {
        // 1 - 2q = e^{-1} makes the noise edge length exactly 2 and the
        // condition number e.
        let q = (1.0 - (-1.0f64).exp()) / 2.0;
        let ch = Channel::uniform_flip(q).unwrap();
        let ell = ch.edge_length(&[0.5, 0.5]).unwrap();
        assert!((ell - 2.0).abs() < 1e-12, "ell = {ell}");
        let cond = ch.condition_number(2).unwrap();
        assert!((cond - 1.0f64.exp()).abs() < 1e-9, "cond = {cond}");
    }

    #[test]
    fn edge_length_of_beta_channel_matches_moments() {
        // Beta(1,5 | 5,1) under a uniform binary marginal: tau^2 = 28/33.
        let ch = Channel::<f64>::beta(1.0, 5.0, 5.0, 1.0).unwrap();
        let tau = ch.tau(&[0.5, 0.5]).unwrap();
        assert!((tau * tau - 28.0 / 33.0).abs() < 1e-12);
        let ell = ch.edge_length(&[0.5, 0.5]).unwrap();
        assert!((ell - 0.164303).abs() < 1e-5, "ell = {ell}");
    }

    #[test]
    fn symmetric_for_length_round_trips() {
        for (r, ell) in [(2usize, 0.5f64), (2, 2.0), (4, 1.0), (4, 3.0)] {
            let ch = Channel::symmetric_for_length(r, ell).unwrap();
            let uniform = vec![1.0 / r as f64; r];
            let got = ch.edge_length(&uniform).unwrap();
            assert!((got - ell).abs() < 1e-10, "r={r} ell={ell} got {got}");
        }
    }

    #[test]
    fn permutation_channel_is_degenerate() {
        let ch = Channel::uniform_flip(0.0f64).unwrap();
        assert!(matches!(
            ch.edge_length(&[0.5, 0.5]),
            Err(Error::DegenerateChannel(_))
        ));
        let half = Channel::uniform_flip(0.5f64).unwrap();
        assert!(matches!(
            half.edge_length(&[0.5, 0.5]),
            Err(Error::DegenerateChannel(_))
        ));
    }

    #[test]
    fn spec_must_cover_every_column() {
        let batch = two_column_batch(10, 4);
        let spec = CorruptionSpec::homogeneous([1], Channel::uniform_flip(0.1).unwrap());
        assert!(matches!(
            corrupt(&batch, &spec, 0),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn corruption_is_deterministic_given_seed() {
        let batch = two_column_batch(100, 5);
        let spec = CorruptionSpec::homogeneous([1, 2], Channel::uniform_flip(0.25).unwrap());
        let a = corrupt(&batch, &spec, 17).unwrap();
        let b = corrupt(&batch, &spec, 17).unwrap();
        for row in 0..100 {
            for col in 0..2 {
                assert_eq!(a.state(row, col), b.state(row, col));
            }
        }
    }
}
