//! Command-line harness: simulate tree-model data, corrupt it, estimate
//! distance matrices, run structure recovery, sweep experiments, and compare
//! trees. Exit codes: 0 success, 2 configuration error, 3 runtime error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use noisy_trees::error::Error;
use noisy_trees::experiment::{aggregate, run_experiment, ExperimentManifest, ExperimentSpec};
use noisy_trees::io::{
    parse_batch_csv, parse_distance_csv, parse_distance_phylip, parse_newick, parse_tree_json,
    write_batch_csv, write_distance_csv, write_distance_phylip, write_newick,
    write_newick_anonymous, write_tree_json, BatchManifest, CorruptionJson, ModelFile, ModelJson,
};
use noisy_trees::metrics::{distance_matrix_empirical, EmpiricalKind, Provenance};
use noisy_trees::model::corrupt;
use noisy_trees::recovery::{recover, Method, RecoveryConfig, RecoveryTarget};
use noisy_trees::tree::{
    robinson_foulds_normalized, LabeledTree, NodeLabel, SemiLabeledTree, MIN_NOISY_OFFSET,
};

#[derive(Parser)]
#[command(
    name = "noisy-trees",
    version,
    about = "Tree structure recovery from noise-corrupted data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw i.i.d. samples from a JSON model file.
    Simulate(SimulateArgs),
    /// Push a sample batch through per-node noise channels.
    Corrupt(CorruptArgs),
    /// Estimate a distance matrix from a sample batch.
    Estimate(EstimateArgs),
    /// Reconstruct a tree from distances or samples.
    Recover(RecoverArgs),
    /// Run a sweep experiment from a JSON spec.
    Experiment(ExperimentArgs),
    /// Compare two tree files (Robinson-Foulds and equality).
    Rf(RfArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON model file ({"type": "symmetric" | "ising" | "discrete" | "linear", ...}).
    #[arg(long, value_name = "json")]
    model: PathBuf,
    #[arg(long, default_value_t = 1000)]
    sample_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (creates samples.csv and samples.manifest.json).
    #[arg(long, value_name = "dir")]
    out: PathBuf,
}

#[derive(Args)]
struct CorruptArgs {
    /// Input sample CSV.
    #[arg(long = "in", value_name = "csv")]
    input: PathBuf,
    /// Corruption spec JSON ({"default": ..., "channels": [[node, ...]]}).
    #[arg(long, value_name = "json")]
    spec: PathBuf,
    /// State count of the input data (inferred from the data when omitted).
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "dir")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Discrete,
    Continuous,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Csv,
    Phylip,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input sample CSV.
    #[arg(long = "in", value_name = "csv")]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// State count for discrete data (inferred when omitted).
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
    format: MatrixFormat,
    #[arg(long, value_name = "dir")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Nj,
    ChowLiu,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    /// The suppressed augmented tree (the identifiable class).
    TbarE,
    /// The underlying tree.
    Tstar,
}

#[derive(Args)]
struct RecoverArgs {
    /// Distance matrix file (CSV, or PHYLIP with --phylip).
    #[arg(long, value_name = "file", conflicts_with = "samples")]
    distances: Option<PathBuf>,
    /// Treat --distances as lower-triangular PHYLIP.
    #[arg(long)]
    phylip: bool,
    /// Sample CSV to estimate distances from.
    #[arg(long, value_name = "csv")]
    samples: Option<PathBuf>,
    /// Estimator kind when --samples is given.
    #[arg(long, value_enum, default_value_t = KindArg::Discrete)]
    kind: KindArg,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Nj)]
    method: MethodArg,
    /// Shrink internal edges shorter than this after Neighbor-Joining.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Shrink to a binary core instead of using --epsilon.
    #[arg(long)]
    binary_prior: bool,
    #[arg(long, value_enum, default_value_t = TargetArg::TbarE)]
    target: TargetArg,
    /// Noisy-label offset (inferred from the labels when omitted).
    #[arg(long)]
    noisy_offset: Option<u64>,
    /// Reference tree (Newick or JSON) for Robinson-Foulds diagnostics.
    #[arg(long, value_name = "file")]
    reference: Option<PathBuf>,
    #[arg(long, value_name = "dir")]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec JSON.
    #[arg(long, value_name = "json")]
    spec: PathBuf,
    /// Override the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the spec's replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the spec's sample size.
    #[arg(long)]
    sample_size: Option<usize>,
    /// Use exact model distances instead of sampling.
    #[arg(long)]
    exact: bool,
    /// Row and aggregate output format.
    #[arg(long, value_enum, default_value_t = RowFormat::Csv)]
    format: RowFormat,
    #[arg(long, value_name = "dir")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RowFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct RfArgs {
    /// First tree file (Newick, or JSON with a .json extension).
    file_a: PathBuf,
    /// Second tree file.
    file_b: PathBuf,
    /// Also print the suppressed tree sizes.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Corrupt(args) => cmd_corrupt(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Rf(args) => cmd_rf(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for configuration problems, 3 for runtime failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Parse(_)
        | Error::InvalidParameter(_)
        | Error::Json(_)
        | Error::ThetaOutOfRange { .. }
        | Error::UnknownNode(_) => 2,
        _ => 3,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn load_tree(path: &Path) -> Result<LabeledTree<f64>, Error> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        parse_tree_json(&text)
    } else {
        parse_newick(&text)
    }
}

/// The unique power-of-ten offset with every label in [offset, 2*offset).
fn infer_noisy_offset(labels: &[NodeLabel]) -> Option<u64> {
    let min = labels.iter().copied().min()?;
    let max = labels.iter().copied().max()?;
    let mut offset = MIN_NOISY_OFFSET;
    while offset <= min {
        if max < 2 * offset {
            return Some(offset);
        }
        offset = offset.checked_mul(10)?;
    }
    None
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let model = ModelJson::parse(&read(&args.model)?)?.into_model()?;
    let batch = match model {
        ModelFile::Discrete(m) => m.sample(args.sample_size, args.seed),
        ModelFile::Linear(m) => m.sample(args.sample_size, args.seed),
    };
    let csv = write_out(&args.out, "samples.csv", &write_batch_csv(&batch))?;
    let manifest = BatchManifest::for_batch(&batch).to_json();
    write_out(&args.out, "samples.manifest.json", &manifest)?;
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_corrupt(args: CorruptArgs) -> Result<(), Error> {
    let batch = parse_batch_csv(&read(&args.input)?, args.r, args.seed)?;
    let spec = CorruptionJson::parse(&read(&args.spec)?)?.into_spec(batch.labels())?;
    let noisy = corrupt(&batch, &spec, args.seed)?;
    let csv = write_out(&args.out, "corrupted.csv", &write_batch_csv(&noisy))?;
    let manifest = BatchManifest::for_batch(&noisy).to_json();
    write_out(&args.out, "corrupted.manifest.json", &manifest)?;
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Error> {
    let batch = parse_batch_csv(&read(&args.input)?, args.r, 0)?;
    let kind = match args.kind {
        KindArg::Discrete => EmpiricalKind::Discrete,
        KindArg::Continuous => EmpiricalKind::Continuous,
    };
    let d = distance_matrix_empirical(&batch, kind, &Default::default())?;
    let path = match args.format {
        MatrixFormat::Csv => write_out(&args.out, "distances.csv", &write_distance_csv(&d))?,
        MatrixFormat::Phylip => write_out(&args.out, "distances.phy", &write_distance_phylip(&d))?,
    };
    if !d.flagged().is_empty() {
        eprintln!(
            "warning: {} degenerate entries clamped or defaulted",
            d.flagged().len()
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_recover(args: RecoverArgs) -> Result<(), Error> {
    let distances = match (&args.distances, &args.samples) {
        (Some(path), None) => {
            let text = read(path)?;
            let provenance = Provenance::Exact;
            if args.phylip || path.extension().is_some_and(|e| e == "phy") {
                parse_distance_phylip(&text, provenance)?
            } else {
                parse_distance_csv(&text, provenance)?
            }
        }
        (None, Some(path)) => {
            let batch = parse_batch_csv(&read(path)?, args.r, 0)?;
            let kind = match args.kind {
                KindArg::Discrete => EmpiricalKind::Discrete,
                KindArg::Continuous => EmpiricalKind::Continuous,
            };
            distance_matrix_empirical(&batch, kind, &Default::default())?
        }
        _ => {
            return Err(Error::Config(
                "exactly one of --distances or --samples is required".into(),
            ))
        }
    };

    let target = match args.target {
        TargetArg::TbarE => RecoveryTarget::SuppressedNoisyTree,
        TargetArg::Tstar => RecoveryTarget::UnderlyingTree,
    };
    let noisy_offset = match (args.noisy_offset, target) {
        (Some(o), _) => Some(o),
        (None, RecoveryTarget::UnderlyingTree) => {
            Some(infer_noisy_offset(distances.labels()).ok_or_else(|| {
                Error::Config("cannot infer the noisy-label offset; pass --noisy-offset".into())
            })?)
        }
        (None, _) => infer_noisy_offset(distances.labels()),
    };
    let config = RecoveryConfig {
        method: match args.method {
            MethodArg::Nj => Method::NeighborJoining,
            MethodArg::ChowLiu => Method::ChowLiu,
        },
        epsilon: args.epsilon,
        binary_prior: args.binary_prior,
        target,
        noisy_offset,
        ..Default::default()
    };
    let mut result = recover(&distances, &config)?;

    if let Some(ref_path) = &args.reference {
        let reference = load_tree(ref_path)?;
        result.diagnose_against(&reference, None)?;
    }

    let newick = write_newick_anonymous(result.tree.underlying());
    write_out(&args.out, "recovered.nwk", &newick)?;
    if let Some(underlying) = &result.underlying {
        write_out(&args.out, "recovered_origin.nwk", &write_newick(underlying))?;
        write_out(&args.out, "recovered_origin.json", &write_tree_json(underlying))?;
    }
    let report = serde_json::json!({
        "method": match args.method { MethodArg::Nj => "nj", MethodArg::ChowLiu => "chow_liu" },
        "epsilon": args.epsilon,
        "binary_prior": args.binary_prior,
        "shrunk_edges": result.shrunk_edges,
        "rf_to_reference": result.diagnostics.rf_to_reference,
        "flags": result.diagnostics.flags,
    });
    let path = write_out(
        &args.out,
        "recovery.json",
        &serde_json::to_string_pretty(&report).expect("serializable"),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Error> {
    let mut spec: ExperimentSpec = ExperimentSpec::parse(&read(&args.spec)?)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(replicates) = args.replicates {
        spec.replicates = replicates;
    }
    if let Some(n) = args.sample_size {
        spec.sample_size = n;
    }
    if args.exact {
        spec.exact = true;
    }
    spec.validate()?;

    let rows = run_experiment(&spec)?;
    let aggregates = aggregate(&rows);
    match args.format {
        RowFormat::Csv => {
            write_out(&args.out, "rows.csv", &noisy_trees::experiment::write_rows_csv(&rows))?;
            write_out(
                &args.out,
                "aggregate.csv",
                &noisy_trees::experiment::write_aggregate_csv(&aggregates),
            )?;
        }
        RowFormat::Json => {
            write_out(
                &args.out,
                "rows.json",
                &serde_json::to_string_pretty(&rows).expect("serializable"),
            )?;
            write_out(
                &args.out,
                "aggregate.json",
                &serde_json::to_string_pretty(&aggregates).expect("serializable"),
            )?;
        }
    }
    let manifest = ExperimentManifest {
        spec: &spec,
        version: env!("CARGO_PKG_VERSION"),
        threads: std::env::var(noisy_trees::experiment::THREADS_ENV)
            .ok()
            .and_then(|v| v.parse().ok()),
    };
    let path = write_out(
        &args.out,
        "manifest.json",
        &serde_json::to_string_pretty(&manifest).expect("serializable"),
    )?;
    let rows_name = match args.format {
        RowFormat::Csv => "rows.csv",
        RowFormat::Json => "rows.json",
    };
    println!(
        "wrote {} rows to {}",
        rows.len(),
        args.out.join(rows_name).display()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_rf(args: RfArgs) -> Result<(), Error> {
    let a = load_tree(&args.file_a)?;
    let b = load_tree(&args.file_b)?;
    let sa = SemiLabeledTree::new(a);
    let sb = SemiLabeledTree::new(b);
    let rf = robinson_foulds_normalized(&sa, &sb)?;
    let splits_a = sa.internal_splits();
    let splits_b = sb.internal_splits();
    let shared: BTreeSet<_> = splits_a.intersection(&splits_b).collect();
    if args.verbose {
        println!(
            "suppressed sizes: {} and {} nodes",
            sa.underlying().suppress_degree_two().node_count(),
            sb.underlying().suppress_degree_two().node_count()
        );
    }
    println!("internal splits: {} vs {}", splits_a.len(), splits_b.len());
    println!("shared splits: {}", shared.len());
    println!(
        "unique splits: {}",
        splits_a.len() + splits_b.len() - 2 * shared.len()
    );
    println!("normalized RF: {rf}");
    println!(
        "equal as semi-labeled trees: {}",
        if sa == sb { "yes" } else { "no" }
    );
    Ok(())
}
