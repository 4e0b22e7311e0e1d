use thiserror::Error;

/// Errors raised by the solvers, norms and checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("Neumann problem for k = 0 is not solvable: flux defect {defect:e}")]
    Solvability { defect: f64 },

    #[error("Gevrey radius exhausted: t = {t} >= 1/lambda = {limit}")]
    RadiusExhausted { t: f64, limit: f64 },

    #[error("Gevrey weight overflows the floating-point range at wavenumber k = {k}")]
    WeightOverflow { k: i64 },

    #[error("solution blew up at t = {t} (non-finite or exceeding {bound:e})")]
    BlowUp { t: f64, bound: f64 },

    #[error("singular 2x2 influence system at k = {k} (condition number {cond:e})")]
    SingularInfluence { k: i64, cond: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("time mismatch: {a} vs {b}")]
    TimeMismatch { a: f64, b: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
