use thiserror::Error;

use crate::estimators::StepEstimate;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no observations")]
    NoObservations,

    #[error("invalid cause label {status} (number of causes is {causes})")]
    InvalidCause { status: usize, causes: usize },

    #[error("time {0} is not finite")]
    NonFiniteTime(f64),

    #[error("time {0} not covered by grouping scheme")]
    UncoveredTime(f64),

    #[error("invalid grouping scheme: {0}")]
    InvalidScheme(String),

    #[error("no observations at point {0}")]
    NoObservationsAtPoint(f64),

    #[error("point {0} is not in the support")]
    PointNotInSupport(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle limit exceeded: {0}")]
    OracleLimitExceeded(String),

    #[error(
        "solver did not converge after {iterations} iterations \
         (log-likelihood {log_likelihood}, KKT residual {kkt_residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        log_likelihood: f64,
        kkt_residual: f64,
        last: Box<StepEstimate>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
