use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HhiError {
    #[error("division by zero")]
    DivisionByZero,

    #[error("fractional factorial undefined at negative integer {0}")]
    NegativeIntegerFactorial(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid orbifold data: {0}")]
    InvalidData(String),

    #[error("elements are not admissible: product of group elements is not the identity")]
    Inadmissible,

    #[error("marking count mismatch: {0} vs {1}")]
    MarkingMismatch(usize, usize),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("series error: {0}")]
    Series(String),
}

pub type Result<T> = std::result::Result<T, HhiError>;
