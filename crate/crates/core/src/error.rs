use thiserror::Error;

use crate::toda::NewtonReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// A configuration or data file that does not match its schema.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("unsupported Lie type {kind}{rank}")]
    UnsupportedType { kind: char, rank: usize },

    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("newton solve did not converge: final residual {:.3e} after {} iterations", .0.final_residual, .0.iterations)]
    NonConvergence(Box<NewtonReport>),

    #[error("linear solve breakdown: {message} (conditioning estimate {condition:.3e})")]
    LinearSolve { message: String, condition: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
