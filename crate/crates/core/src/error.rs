use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("variable x{index} out of range for {n_vars} variables")]
    VarOutOfRange { index: usize, n_vars: usize },
    #[error("stale node handle {index} for a tree of {size} nodes")]
    StaleHandle { index: usize, size: usize },
    #[error("invalid operator set: {0}")]
    InvalidOperatorSet(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
}

/// The run ran out of dataset traversals.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("traversal budget of {limit} exhausted")]
pub struct BudgetExhausted {
    pub limit: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataSet(String),
    #[error(transparent)]
    Budget(#[from] BudgetExhausted),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("operator `{0}` cannot be lowered to a polynomial")]
    Unsupported(String),
    #[error("variable x{0} is not the polynomial variable")]
    Variable(usize),
    #[error("degree {degree} exceeds the guard of {max}")]
    DegreeExceeded { degree: usize, max: usize },
    #[error("non-finite coefficient")]
    NonFinite,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("{0}")]
    Invalid(String),
}
