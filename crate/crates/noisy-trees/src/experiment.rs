//! Simulation harness: sweeps noise strength and shrink tolerance over a
//! preset (or file-loaded) tree, runs sample -> corrupt -> estimate ->
//! recover -> score per replicate, and emits long-format and aggregated
//! CSV plus a JSON manifest.
//!
//! Replicates draw their seeds from (base seed, noise index, replicate
//! index), so reruns reproduce byte-identical output regardless of thread
//! count. `NOISY_TREE_THREADS` caps the worker pool.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    distance_matrix_exact, distance_matrix_exact_linear, distance_matrix_empirical, DistanceMatrix,
    EmpiricalKind,
};
use crate::model::{
    corrupt, Channel, CorruptionSpec, DiscreteTreeModel, LinearTreeModel,
};
use crate::recovery::{recover, Method, RecoveryConfig, RecoveryTarget};
use crate::seeding::derive_seed;
use crate::tree::{
    noisy_offset_for, robinson_foulds_normalized, LabeledTree, NodeLabel, SemiLabeledTree,
};

/// Environment variable capping harness concurrency.
pub const THREADS_ENV: &str = "NOISY_TREE_THREADS";

/// The three benchmark topologies: an eight-node chain, a ten-node tree
/// whose core is binary, and an eight-node star.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreePreset {
    Chain8,
    Binary10,
    Star8,
}

impl TreePreset {
    pub fn name(&self) -> &'static str {
        match self {
            TreePreset::Chain8 => "chain8",
            TreePreset::Binary10 => "binary10",
            TreePreset::Star8 => "star8",
        }
    }

    pub fn tree(&self) -> LabeledTree<f64> {
        match self {
            TreePreset::Chain8 => {
                LabeledTree::new(1..=8, (1..8).map(|i| (i, i + 1))).expect("valid chain")
            }
            TreePreset::Binary10 => LabeledTree::new(
                1..=10,
                [
                    (1, 2),
                    (1, 3),
                    (1, 4),
                    (4, 5),
                    (4, 8),
                    (5, 6),
                    (5, 7),
                    (8, 9),
                    (8, 10),
                ],
            )
            .expect("valid binary tree"),
            TreePreset::Star8 => {
                LabeledTree::new(1..=8, (2..=8).map(|i| (1, i))).expect("valid star")
            }
        }
    }
}

impl std::str::FromStr for TreePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain8" => Ok(TreePreset::Chain8),
            "binary10" => Ok(TreePreset::Binary10),
            "star8" => Ok(TreePreset::Star8),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected chain8 | binary10 | star8)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeSource {
    Preset(TreePreset),
    File(PathBuf),
}

impl TreeSource {
    pub fn resolve(&self) -> Result<(String, LabeledTree<f64>)> {
        match self {
            TreeSource::Preset(p) => Ok((p.name().to_string(), p.tree())),
            TreeSource::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let tree = if path.extension().is_some_and(|e| e == "json") {
                    crate::io::parse_tree_json(&text)?
                } else {
                    crate::io::parse_newick(&text)?
                };
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "file".into());
                Ok((name, tree.without_lengths()))
            }
        }
    }
}

/// Clean-model family for an experiment. The noise sweep is interpreted per
/// family: noise edge lengths for `Symmetric`, `Ising`, and `Gaussian`;
/// the Beta strength `a` (channels `Beta(1, a | a, 1)`) for `Beta`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentModel {
    Symmetric { r: usize, theta: f64 },
    Ising { coupling: f64 },
    Gaussian { edge_corr: f64 },
    Beta { theta: f64 },
}

impl ExperimentModel {
    fn tag(&self) -> String {
        match self {
            ExperimentModel::Symmetric { r, theta } => format!("symmetric_r{r}_theta{theta}"),
            ExperimentModel::Ising { coupling } => format!("ising_beta{coupling}"),
            ExperimentModel::Gaussian { edge_corr } => format!("gaussian_rho{edge_corr}"),
            ExperimentModel::Beta { theta } => format!("beta_theta{theta}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Targets {
    /// Score against the suppressed augmented tree.
    pub suppressed: bool,
    /// Extract and score the underlying tree.
    pub underlying: bool,
}

impl Default for Targets {
    fn default() -> Self {
        Targets {
            suppressed: true,
            underlying: true,
        }
    }
}

fn default_method() -> String {
    "nj".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub tree: TreeSource,
    pub model: ExperimentModel,
    /// Sweep values: noise lengths, or Beta strengths for Beta models.
    pub noise: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub replicates: usize,
    pub sample_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub targets: Targets,
    #[serde(default)]
    pub binary_prior: bool,
    /// Replace sampling with exact model distances.
    #[serde(default)]
    pub exact: bool,
    /// "nj" or "chow_liu".
    #[serde(default = "default_method")]
    pub method: String,
}

impl ExperimentSpec {
    pub fn parse(s: &str) -> Result<ExperimentSpec> {
        let spec: ExperimentSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn method(&self) -> Result<Method> {
        match self.method.as_str() {
            "nj" => Ok(Method::NeighborJoining),
            "chow_liu" => Ok(Method::ChowLiu),
            other => Err(Error::Config(format!(
                "method: unknown value '{other}' (expected nj | chow_liu)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::Config("replicates: must be at least 1".into()));
        }
        if !self.exact && self.sample_size < 1 {
            return Err(Error::Config("sample_size: must be at least 1".into()));
        }
        if self.noise.is_empty() {
            return Err(Error::Config("noise: sweep must be nonempty".into()));
        }
        if self.noise.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::Config("noise: sweep values must be positive".into()));
        }
        if !self.binary_prior && self.epsilons.is_empty() {
            return Err(Error::Config(
                "epsilons: must be nonempty unless binary_prior is set".into(),
            ));
        }
        if self.epsilons.iter().any(|&e| e < 0.0 || !e.is_finite()) {
            return Err(Error::Config("epsilons: values must be nonnegative".into()));
        }
        if let ExperimentModel::Symmetric { r, .. } = &self.model {
            if *r < 2 {
                return Err(Error::Config("model.r: must be at least 2".into()));
            }
        }
        self.method()?;
        Ok(())
    }
}

/// One replicate's outcome at one sweep cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub tree: String,
    pub model: String,
    pub noise_value: f64,
    /// Shrink tolerance; `None` in binary-prior mode.
    pub epsilon: Option<f64>,
    pub replicate: usize,
    pub rf_normalized: f64,
    pub tstar_exact: Option<bool>,
    /// Displaced-leaf count when the underlying tree is wrong.
    pub leaf_errors: Option<usize>,
    pub degenerate_flags: Vec<String>,
}

/// Per-cell aggregation of the replicate rows.
#[derive(Clone, Debug, Serialize)]
pub struct AggregateRow {
    pub tree: String,
    pub model: String,
    pub noise_value: f64,
    pub epsilon: Option<f64>,
    pub replicates: usize,
    pub mean_rf: f64,
    pub std_rf: f64,
    pub tstar_success_rate: Option<f64>,
    /// Success rate among the replicates whose reconstructed shape matched
    /// the reference exactly (zero RF), the conditioning used when a run
    /// reports how often the origin tree is found once the class is right.
    pub tstar_success_given_shape: Option<f64>,
    pub degenerate_count: usize,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentManifest<'a> {
    pub spec: &'a ExperimentSpec,
    pub version: &'static str,
    pub threads: Option<usize>,
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
}

/// Runs the full sweep. Row order is (noise, epsilon, replicate),
/// deterministic in the base seed and independent of the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    let (tree_name, tree) = spec.tree.resolve()?;
    let run = PreparedRun::new(spec, tree_name, tree)?;

    let cells: Vec<(usize, usize)> = (0..spec.noise.len())
        .flat_map(|ni| (0..spec.replicates).map(move |rep| (ni, rep)))
        .collect();

    let execute = || -> Result<Vec<Vec<ExperimentRow>>> {
        cells
            .par_iter()
            .map(|&(ni, rep)| run.replicate_rows(ni, rep))
            .collect()
    };
    let nested = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(execute),
        None => execute(),
    }?;

    let mut rows: Vec<ExperimentRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        let ka = (noise_index(spec, a.noise_value), eps_index(spec, a.epsilon), a.replicate);
        let kb = (noise_index(spec, b.noise_value), eps_index(spec, b.epsilon), b.replicate);
        ka.cmp(&kb)
    });
    Ok(rows)
}

fn noise_index(spec: &ExperimentSpec, value: f64) -> usize {
    spec.noise.iter().position(|&v| v == value).unwrap_or(usize::MAX)
}

fn eps_index(spec: &ExperimentSpec, value: Option<f64>) -> usize {
    match value {
        None => 0,
        Some(e) => spec.epsilons.iter().position(|&v| v == e).unwrap_or(usize::MAX),
    }
}

/// State shared across replicates.
struct PreparedRun<'a> {
    spec: &'a ExperimentSpec,
    tree_name: String,
    tree: LabeledTree<f64>,
    reference: SemiLabeledTree<f64>,
    offset: NodeLabel,
    method: Method,
}

impl<'a> PreparedRun<'a> {
    fn new(spec: &'a ExperimentSpec, tree_name: String, tree: LabeledTree<f64>) -> Result<Self> {
        let reference = SemiLabeledTree::new(tree.augment().suppress_degree_two());
        let offset = noisy_offset_for(tree.max_label());
        let method = spec.method()?;
        Ok(PreparedRun {
            spec,
            tree_name,
            tree,
            reference,
            offset,
            method,
        })
    }

    /// Distance matrix over the noisy leaves for one replicate.
    fn distances(&self, noise_value: f64, rep_seed: u64) -> Result<DistanceMatrix<f64>> {
        let spec = self.spec;
        match &spec.model {
            ExperimentModel::Symmetric { r, theta } => {
                let model = DiscreteTreeModel::uniform_symmetric(&self.tree, *r, *theta)?;
                let noise = CorruptionSpec::homogeneous(
                    self.tree.nodes(),
                    Channel::symmetric_for_length(*r, noise_value)?,
                );
                if spec.exact {
                    distance_matrix_exact(&model, Some(&noise))
                } else {
                    let clean = model.sample(spec.sample_size, rep_seed);
                    let noisy = corrupt(&clean, &noise, rep_seed)?;
                    distance_matrix_empirical(&noisy, EmpiricalKind::Discrete, &Default::default())
                }
            }
            ExperimentModel::Ising { coupling } => {
                let params = crate::model::IsingParams::homogeneous(&self.tree, *coupling)?;
                let model = params.to_discrete(None)?;
                let noise = CorruptionSpec::homogeneous(
                    self.tree.nodes(),
                    Channel::symmetric_for_length(2, noise_value)?,
                );
                if spec.exact {
                    distance_matrix_exact(&model, Some(&noise))
                } else {
                    let clean = model.sample(spec.sample_size, rep_seed);
                    let noisy = corrupt(&clean, &noise, rep_seed)?;
                    distance_matrix_empirical(&noisy, EmpiricalKind::Discrete, &Default::default())
                }
            }
            ExperimentModel::Beta { theta } => {
                let model = DiscreteTreeModel::uniform_symmetric(&self.tree, 2, *theta)?;
                let a = noise_value;
                let noise =
                    CorruptionSpec::homogeneous(self.tree.nodes(), Channel::beta(1.0, a, a, 1.0)?);
                if spec.exact {
                    distance_matrix_exact(&model, Some(&noise))
                } else {
                    let clean = model.sample(spec.sample_size, rep_seed);
                    let noisy = corrupt(&clean, &noise, rep_seed)?;
                    distance_matrix_empirical(
                        &noisy,
                        EmpiricalKind::Continuous,
                        &Default::default(),
                    )
                }
            }
            ExperimentModel::Gaussian { edge_corr } => {
                let augmented = self.augmented_linear_model(*edge_corr, noise_value)?;
                let noisy_labels: Vec<NodeLabel> =
                    self.tree.nodes().map(|v| self.offset + v).collect();
                if spec.exact {
                    distance_matrix_exact_linear(&augmented)?.restrict(&noisy_labels)
                } else {
                    let batch = augmented.sample(spec.sample_size, rep_seed);
                    let noisy = batch.select_columns(&noisy_labels)?;
                    distance_matrix_empirical(
                        &noisy,
                        EmpiricalKind::Continuous,
                        &Default::default(),
                    )
                }
            }
        }
    }

    /// Unit-variance linear model on the augmented tree: clean edges carry
    /// the model correlation, terminal edges the noise correlation
    /// `exp(-ell/2)`.
    fn augmented_linear_model(
        &self,
        edge_corr: f64,
        ell: f64,
    ) -> Result<LinearTreeModel<f64>> {
        let augmented = self.tree.augment();
        let root = self
            .tree
            .inner_nodes()
            .first()
            .copied()
            .unwrap_or_else(|| self.tree.nodes().next().expect("nonempty"));
        let c = (-ell / 2.0).exp();
        let mut coeffs = BTreeMap::new();
        let mut noise_vars = BTreeMap::new();
        for (u, v) in augmented.edges() {
            let rho = if u >= self.offset || v >= self.offset { c } else { edge_corr };
            // Direct the edge away from the root along the tree structure.
            let path = augmented.path(root, u)?;
            let (from, to) = if path.contains(&v) { (v, u) } else { (u, v) };
            coeffs.insert((from, to), rho);
            noise_vars.insert((from, to), 1.0 - rho * rho);
        }
        LinearTreeModel::new(augmented, root, 0.0, 1.0, coeffs, noise_vars)
    }

    fn replicate_rows(&self, noise_idx: usize, rep: usize) -> Result<Vec<ExperimentRow>> {
        let spec = self.spec;
        let noise_value = spec.noise[noise_idx];
        let rep_seed = derive_seed(&[spec.seed, noise_idx as u64, rep as u64]);
        let distances = self.distances(noise_value, rep_seed)?;

        let shrink_cells: Vec<Option<f64>> = if spec.binary_prior {
            vec![None]
        } else {
            spec.epsilons.iter().copied().map(Some).collect()
        };
        let mut rows = Vec::with_capacity(shrink_cells.len());
        for eps in shrink_cells {
            let config = RecoveryConfig {
                method: self.method,
                epsilon: eps.unwrap_or(0.0),
                binary_prior: eps.is_none(),
                target: RecoveryTarget::SuppressedNoisyTree,
                noisy_offset: Some(self.offset),
                ..Default::default()
            };
            let result = recover(&distances, &config)?;
            let rf = robinson_foulds_normalized(&result.tree, &self.reference)?;
            let mut flags = result.diagnostics.flags.clone();
            // Extraction can fail on degenerate replicates whose shrunk tree
            // is not shaped like a suppressed augmented tree; those rows are
            // kept and flagged rather than dropped.
            let (tstar_exact, leaf_errors) = if spec.targets.underlying {
                match crate::recovery::extract_tstar(result.tree.underlying(), self.offset) {
                    Ok(extraction) => {
                        for &u in &extraction.ambiguous {
                            flags.push(format!("ambiguous-terminal-minimum:{u}"));
                        }
                        let exact = extraction.tree.same_topology(&self.tree);
                        let errors =
                            if exact { 0 } else { displaced_leaves(&self.tree, &extraction.tree) };
                        (Some(exact), Some(errors))
                    }
                    Err(e) => {
                        flags.push(format!("extraction-failed:{e}"));
                        (Some(false), None)
                    }
                }
            } else {
                (None, None)
            };
            rows.push(ExperimentRow {
                tree: self.tree_name.clone(),
                model: spec.model.tag(),
                noise_value,
                epsilon: eps,
                replicate: rep,
                rf_normalized: rf,
                tstar_exact,
                leaf_errors,
                degenerate_flags: flags,
            });
        }
        Ok(rows)
    }
}

/// Number of leaves present in exactly one of the two trees, halved: each
/// mother-leaf swap displaces one leaf.
fn displaced_leaves(a: &LabeledTree<f64>, b: &LabeledTree<f64>) -> usize {
    let la: std::collections::BTreeSet<NodeLabel> = a.leaves().into_iter().collect();
    let lb: std::collections::BTreeSet<NodeLabel> = b.leaves().into_iter().collect();
    la.symmetric_difference(&lb).count() / 2
}

/// Groups rows by (noise, epsilon) and aggregates.
pub fn aggregate(rows: &[ExperimentRow]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, String, u64, Option<u64>)> = Vec::new();
    let mut groups: BTreeMap<(String, String, u64, Option<u64>), Vec<&ExperimentRow>> =
        BTreeMap::new();
    for row in rows {
        let key = (
            row.tree.clone(),
            row.model.clone(),
            row.noise_value.to_bits(),
            row.epsilon.map(f64::to_bits),
        );
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(row);
    }
    order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let n = members.len();
            let mean = members.iter().map(|r| r.rf_normalized).sum::<f64>() / n as f64;
            let var = members
                .iter()
                .map(|r| (r.rf_normalized - mean).powi(2))
                .sum::<f64>()
                / n as f64;
            let successes: Vec<bool> = members.iter().filter_map(|r| r.tstar_exact).collect();
            AggregateRow {
                tree: key.0,
                model: key.1,
                noise_value: f64::from_bits(key.2),
                epsilon: key.3.map(f64::from_bits),
                replicates: n,
                mean_rf: mean,
                std_rf: var.sqrt(),
                tstar_success_rate: (!successes.is_empty()).then(|| {
                    successes.iter().filter(|&&s| s).count() as f64 / successes.len() as f64
                }),
                tstar_success_given_shape: {
                    let shape_ok: Vec<bool> = members
                        .iter()
                        .filter(|r| r.rf_normalized == 0.0)
                        .filter_map(|r| r.tstar_exact)
                        .collect();
                    (!shape_ok.is_empty()).then(|| {
                        shape_ok.iter().filter(|&&s| s).count() as f64 / shape_ok.len() as f64
                    })
                },
                degenerate_count: members
                    .iter()
                    .filter(|r| !r.degenerate_flags.is_empty())
                    .count(),
            }
        })
        .collect()
}

fn eps_cell(eps: Option<f64>) -> String {
    eps.map(|e| e.to_string()).unwrap_or_default()
}

/// Long-format CSV: one row per replicate per cell.
pub fn write_rows_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(
        "tree,model,noise_value,epsilon,replicate,rf_normalized,tstar_exact,leaf_errors,degenerate_flags\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.tree,
            r.model,
            r.noise_value,
            eps_cell(r.epsilon),
            r.replicate,
            r.rf_normalized,
            r.tstar_exact.map(|b| b.to_string()).unwrap_or_default(),
            r.leaf_errors.map(|e| e.to_string()).unwrap_or_default(),
            r.degenerate_flags.join(";"),
        ));
    }
    out
}

/// Aggregated CSV: one row per sweep cell.
pub fn write_aggregate_csv(aggregates: &[AggregateRow]) -> String {
    let mut out = String::from(
        "tree,model,noise_value,epsilon,replicates,mean_rf,std_rf,tstar_success_rate,tstar_success_given_shape,degenerate_count\n",
    );
    for a in aggregates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            a.tree,
            a.model,
            a.noise_value,
            eps_cell(a.epsilon),
            a.replicates,
            a.mean_rf,
            a.std_rf,
            a.tstar_success_rate
                .map(|s| s.to_string())
                .unwrap_or_default(),
            a.tstar_success_given_shape
                .map(|s| s.to_string())
                .unwrap_or_default(),
            a.degenerate_count,
        ));
    }
    out
}
