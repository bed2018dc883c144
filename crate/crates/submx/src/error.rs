use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix side length must be positive")]
    InvalidDimension,

    #[error("index out of bounds: {0}")]
    IndexOutOfBounds(String),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration budget exceeded: {what} = {size:.4e} > budget {budget:.4e}")]
    BudgetExceeded { what: String, size: f64, budget: f64 },

    #[error("no solution on bracket: {0}")]
    NoSolution(String),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("empty sample")]
    EmptySample,

    #[error("weighted sample not supported here: {0}")]
    WeightedSample(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
