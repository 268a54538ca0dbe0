use thiserror::Error;

/// Errors raised across the crate.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("columns are linearly dependent")]
    RankDeficient,
    #[error("matrix is singular")]
    Singular,
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("ambiguous projection (point on a numerical face boundary)")]
    AmbiguousProjection,
    #[error("point is not in the cone")]
    NotInCone,
    #[error("unsupported set kind for {0}")]
    UnsupportedKind(&'static str),
    #[error("formula is not read-once")]
    NotReadOnce,
    #[error("transform {0} is not orthogonal")]
    NonOrthogonalTransform(usize),
    #[error("normal decomposition is singular")]
    DecompositionSingular,
    #[error("projected cone is degenerate")]
    ImageDegenerate,
    #[error("invalid rational {0:?}")]
    InvalidRational(String),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("degenerate trial budget exceeded ({count} of {trials} trials)")]
    DegenerateBudget { count: usize, trials: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
