use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is numerically rank deficient")]
    RankDeficient,
    #[error("matrix is numerically singular: {0}")]
    Singular(String),
    #[error("dataset is not centered (largest mean {max_mean:e})")]
    NotCentered { max_mean: f64 },
    #[error("response has zero sum of squares")]
    DegenerateResponse,
    #[error("PLS weight direction vanished before the first component")]
    DegenerateDirection,
    #[error("Krylov generator vector is zero")]
    ZeroVector,
    #[error("conjugate gradient broke down at step {step}")]
    Breakdown { step: usize },
    #[error("OLS estimator has zero quadratic-form norm")]
    DegenerateOls,
    #[error("ill-conditioned polynomial system at order {order} (residual {residual:e})")]
    IllConditioned { order: usize, residual: f64 },
    #[error("polynomial must satisfy q(0) = -1, got {value}")]
    ConstraintViolated { value: f64 },
    #[error("could not draw a positive eigenvalue after {attempts} attempts")]
    ResampleExhausted { attempts: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("column `{0}` not present in header")]
    MissingColumn(String),
    #[error("table has no usable rows")]
    EmptyTable,
    #[error("column `{0}` has zero variance")]
    DegenerateColumn(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("record invariant violated: {0}")]
    InvariantViolated(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = PlsError> = std::result::Result<T, E>;

impl PlsError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        PlsError::Io {
            context: context.into(),
            source,
        }
    }
}
