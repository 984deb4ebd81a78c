use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested design is infeasible (e.g. negative coverage, n < r + m).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An integer sample-size search hit its hard cap without a solution.
    #[error("no solution: coverage target not reached below n = {cap}")]
    NoSolution { cap: u64 },

    /// An iterative procedure failed to converge.
    #[error("did not converge within {iterations} iterations: {context}")]
    NonConvergence { iterations: usize, context: String },

    /// A quantile at prob = 1 of an unbounded distribution was requested.
    #[error("unbounded quantile: prob = 1 has no finite quantile")]
    UnboundedQuantile,

    /// Not enough data to carry out an estimation step.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Grid densities entering a convolution must share a step size.
    #[error("grid step mismatch: {left} vs {right}")]
    StepMismatch { left: f64, right: f64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
