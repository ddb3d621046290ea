use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{what} too large: {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("duplicate rows {first} and {second} in B")]
    DuplicateRows { first: usize, second: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("sampling budget of {0} attempts exhausted")]
    BudgetExhausted(usize),
    #[error("prediction undefined: {0}")]
    Undefined(String),
    #[error("internal encoder error: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
