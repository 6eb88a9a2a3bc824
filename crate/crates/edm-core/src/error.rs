use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "input matrix is not hollow (max |diagonal| {max_diag:.3e} vs max |entry| {max_abs:.3e})"
    )]
    NonHollowInput { max_diag: f64, max_abs: f64 },

    #[error("rank {r} out of range for order {n}")]
    RankOutOfRange { r: usize, n: usize },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("iterative eigensolver did not converge within {matvecs} matrix-vector products")]
    NoConvergence { matvecs: usize },

    #[error("clique of size {size} too small for embedding dimension {r}")]
    CliqueTooSmall { size: usize, r: usize },

    #[error("both reflections of the clique union violate the radio range; merge is ambiguous")]
    AmbiguousReflection,

    #[error("exposing aggregate is rank deficient; face under-determined (uncovered vertices: {uncovered:?})")]
    DeficientAggregate { uncovered: Vec<usize> },

    #[error("initial trace {t0} does not satisfy v(t0) > 0; double and retry")]
    BadInitialPoint { t0: f64 },

    #[error("Newton root finder exceeded {iters} iterations (bound {bound:.1})")]
    NewtonNonConvergence { iters: usize, bound: f64 },

    #[error("instance carries no ground truth")]
    NoGroundTruth,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn dims(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
