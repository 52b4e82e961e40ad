use thiserror::Error;

use crate::stats::ValidationReport;

pub type Result<T> = std::result::Result<T, GeoError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("zero-length vector: correlation is undefined")]
    DegenerateVector,

    #[error("variable `{0}` has zero variance after centering")]
    DegenerateVariable(String),

    #[error("explanatory variables are collinear: {0}")]
    Collinear(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    Singular { pivot: usize, value: f64 },

    #[error("insufficient data: n = {n} observations cannot support m = {m} regressors (need n >= {required})")]
    InsufficientData { n: usize, m: usize, required: usize },

    #[error("invalid correlation structure: {0}")]
    InvalidCorrelation(ValidationReport),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("no explanatory variables")]
    NoExplanatory,

    #[error("scale-dependent output requested from a correlation-only summary (norms missing)")]
    MissingNorms,

    #[error("raw data vectors are required but only correlations are available")]
    MissingData,

    #[error("invalid subset: {0}")]
    Subset(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("R² = {0} exceeds 1 beyond rounding tolerance")]
    RSquaredOutOfRange(f64),
}
