use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum WeldError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("neck budget violated: lambda * N^{q} = {value:.6e} exceeds {budget:.6e}")]
    NeckBudget { value: f64, budget: f64, q: i32 },

    #[error("invalid neck parameters: {0}")]
    InvalidNeck(String),

    #[error("point outside the neck annulus (|xi| = {radius:.6e}, allowed [{inner:.6e}, {outer:.6e}])")]
    OutsideNeck { radius: f64, inner: f64, outer: f64 },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: String, found: String },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("gauge radius {radius:.4} does not fit in the chart (limit {limit:.4})")]
    GaugeRadius { radius: f64, limit: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("quadratic iteration diverged at step {step} (residual {residual:.3e})")]
    Divergence { step: usize, residual: f64 },

    #[error("alternating iteration stalled after {passes} passes")]
    Stall { passes: usize, deltas: Vec<f64> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WeldError>;
