use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaudinError {
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation at a pole")]
    PoleEvaluation,
    #[error("rational function is not proper at infinity (numerator degree {num} > denominator degree {den})")]
    ImproperRational { num: usize, den: usize },
    #[error("sites are not pairwise distinct")]
    RepeatedSites,
    #[error("subspace is not invariant: {0}")]
    NotInvariant(String),
    #[error("point is not in the domain of the master function: {0}")]
    PointNotInU(String),
    #[error("critical point is degenerate (Hessian {0:e})")]
    DegenerateCriticalPoint(f64),
    #[error("weight function vanishes at the critical point")]
    ZeroVector,
    #[error("ambient degree {d} is too small, need at least {min}")]
    AmbientTooSmall { d: usize, min: usize },
    #[error("polynomial kernel has dimension {found}, expected {expected}")]
    KernelDimensionMismatch { expected: usize, found: usize },
    #[error("shape normalization failed: {0}")]
    ShapeNormalizationFailure(String),
    #[error("too many weight function terms: {count} > {limit}")]
    TooManyTerms { count: u128, limit: u128 },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GaudinError {
    fn from(e: std::io::Error) -> Self {
        GaudinError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GaudinError {
    fn from(e: serde_json::Error) -> Self {
        GaudinError::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GaudinError>;
