use thiserror::Error;

/// Errors produced by the interpolation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("triangular factor is singular at diagonal entry {0}")]
    SingularFactor(usize),

    #[error("polynomial block is rank deficient (numerical rank {rank} of {cols} columns); use the rank-deficient pipeline")]
    RankDeficient { rank: usize, cols: usize },

    #[error("quadrature failed to converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },

    #[error("target condition number {target:e} is unreachable (achievable range [{lo:e}, {hi:e}])")]
    UnreachableCondition { target: f64, lo: f64, hi: f64 },

    #[error("shape tuning failed on node set {index}: {source}")]
    Tuning {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("node generation failed: {0}")]
    Generation(String),

    #[error("saddle-point oracle failed: {0}")]
    Oracle(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("unknown target function `{0}`")]
    UnknownTarget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by malformed user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::InvalidArgument(_)
            | Error::UnknownTarget(_)
            | Error::Parse(_)
            | Error::Shape { .. } => true,
            Error::Tuning { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
