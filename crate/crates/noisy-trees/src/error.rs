use thiserror::Error;

/// Crate-wide error type.
///
/// Scalar payloads are stored as `f64` regardless of the scalar type the
/// operation ran with, so the error type stays non-generic.
#[derive(Debug, Error)]
pub enum Error {
    // -- tree construction ---------------------------------------------------
    #[error("edge ({0}, {1}) closes a cycle")]
    CycleDetected(u64, u64),
    #[error("tree is disconnected: reached {reached} of {total} nodes")]
    Disconnected { reached: usize, total: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u64, u64),
    #[error("node {0} is not in the tree")]
    UnknownNode(u64),
    #[error("leaf sets differ; only in first: {only_a:?}, only in second: {only_b:?}")]
    LeafSetMismatch { only_a: Vec<u64>, only_b: Vec<u64> },

    // -- model construction --------------------------------------------------
    #[error("theta = {theta} is outside the open interval (0, 1/{r})")]
    ThetaOutOfRange { theta: f64, r: usize },
    #[error("tree has {nodes} nodes, exact computation is capped at {max}")]
    TreeTooLarge { nodes: usize, max: usize },
    #[error("state space size {states} exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u128 },
    #[error("corruption spec does not match the batch: {0}")]
    SpecMismatch(String),
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // -- metrics ---------------------------------------------------------
    #[error("joint table has a zero marginal at state {index}")]
    SingularMarginal { index: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("assumption {condition} violated: {detail}")]
    AssumptionViolated {
        condition: &'static str,
        detail: String,
    },
    #[error("sample batch is empty")]
    EmptyBatch,
    #[error("column {label} is degenerate (constant)")]
    DegenerateColumn { label: u64 },

    // -- recovery ----------------------------------------------------------
    #[error("need at least {need} taxa, got {got}")]
    TooFewTaxa { got: usize, need: usize },
    #[error("cannot reduce to the target shape: {0}")]
    NotReducible(String),

    // -- io / config ---------------------------------------------------------
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
