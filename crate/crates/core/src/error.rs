use thiserror::Error;

pub type Result<T, E = FinslerError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FinslerError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("null direction: |y| = {0:e} is below the chart scale")]
    NullDirection(f64),
    #[error("fundamental tensor is not positive definite at x = {x:?}, y = {y:?}")]
    NotPositiveDefinite { x: Vec<f64>, y: Vec<f64> },
    #[error("matrix is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("index error: {0}")]
    Index(String),
    #[error("degenerate flag: area term {0:e}")]
    DegenerateFlag(f64),
    #[error("invalid lift: {0}")]
    InvalidLift(String),
    #[error("trajectory left the chart at t = {t}")]
    DomainExit { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },
    #[error("grid error: {0}")]
    Grid(String),
    #[error("reference field vanishes at node {0}")]
    NullReference(usize),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("curve is not normal to the end manifold (residual {0:e})")]
    NormalityViolation(f64),
    #[error("tangent basis is singular: {0}")]
    SingularBasis(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
