use std::path::PathBuf;

/// Errors produced by the simulator, the schedule and bound evaluators, and
/// the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("node index {node} out of range for {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("analytic constants unavailable for the {0} loss family")]
    ConstantsUnavailable(&'static str),

    #[error("eigenvalue computation failed: {0}")]
    EigenSolve(String),

    #[error("reference solver did not converge in {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    #[error("stepsize {beta} outside convergence range (0, {upper})")]
    StepsizeOutOfRange { beta: f64, upper: f64 },

    #[error("iterate diverged at iteration {k}")]
    Divergence { k: usize },

    #[error("objective is not strongly convex (mu = 0); use the convex bound")]
    NotStronglyConvex,

    #[error("convex bound not valid beyond k0 = {k0} (requested k = {k})")]
    BeyondK0 { k: usize, k0: usize },

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("label mapping failed: {0}")]
    LabelMapping(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid config at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
