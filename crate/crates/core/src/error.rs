use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty geometry")]
    EmptyGeometry,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unsupported dimension {0} for this operation")]
    UnsupportedDimension(usize),

    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(u32, u32),

    #[error("degenerate discretization: {0}")]
    DegenerateDiscretization(String),

    #[error("lattice needs about {needed_mb} MiB, budget is {budget_mb} MiB")]
    Capacity { needed_mb: u64, budget_mb: u64 },

    #[error("invalid capacity law: {0}")]
    InvalidLaw(String),

    #[error("invalid flow problem: {0}")]
    InvalidFlowProblem(String),

    #[error("brute-force oracle limited to {limit} edges, got {edges}")]
    OracleTooLarge { edges: usize, limit: usize },

    #[error("edge set is not a cutset")]
    NotACutset,

    #[error("test function undefined at {0:?}")]
    UndefinedTestFunction(Vec<f64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
