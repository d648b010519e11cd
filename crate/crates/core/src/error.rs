use thiserror::Error;

/// Errors produced while validating, preconditioning or analysing an instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Carries the 1-based column index.
    #[error("column {0} is zero")]
    ZeroColumn(usize),
    #[error("matrix is rank deficient (sigma_min/sigma_max = {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("convex hull is lower dimensional and contains the origin")]
    DegenerateHull,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("instance is ill-posed (hull distance {distance:e})")]
    IllPosed { distance: f64 },
    #[error("Grassmann condition number is undefined for m = n")]
    Degenerate,
    #[error("matrix is not an orthogonal projector (defect {defect:e})")]
    NotAProjector { defect: f64 },
    #[error("vector is not a solution of the preconditioned system (residual {residual:e})")]
    NotASolution { residual: f64 },
    #[error("no strictly feasible direction among the sampled points")]
    NoFeasibleDirection,
    #[error("search budget exhausted without reaching the ill-posed set")]
    BudgetExhausted,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroColumn(_) => "ZeroColumn",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::Shape(_) => "ShapeError",
            Error::NonFiniteEntry { .. } => "NonFiniteEntry",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DegenerateHull => "DegenerateHull",
            Error::Unsupported(_) => "Unsupported",
            Error::IllPosed { .. } => "IllPosed",
            Error::Degenerate => "Degenerate",
            Error::NotAProjector { .. } => "NotAProjector",
            Error::NotASolution { .. } => "NotASolution",
            Error::NoFeasibleDirection => "NoFeasibleDirection",
            Error::BudgetExhausted => "BudgetExhausted",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
