use thiserror::Error;

/// Errors raised by the RG engine.
#[derive(Debug, Error)]
pub enum HrgError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure in {op}: {detail}")]
    Numerical { op: &'static str, detail: String },

    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no convergence in {op} after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("Newton iteration failed: {detail}; residual trace {residuals:?}")]
    NewtonFailure { detail: String, residuals: Vec<f64> },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("series not summable: {0}")]
    NonSummable(String),

    #[error("memory guard: {0}")]
    MemoryGuard(String),

    #[error("at epsilon = {epsilon}: {source}")]
    AtEpsilon {
        epsilon: f64,
        source: Box<HrgError>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HrgError {
    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        HrgError::Numerical {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        HrgError::InvalidParameter(detail.into())
    }
}

pub type Result<T> = std::result::Result<T, HrgError>;
