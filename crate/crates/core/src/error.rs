use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole: denominator vanishes at t = {0}")]
    Pole(String),
    #[error("inexact polynomial division")]
    Inexact,
    #[error("arity mismatch: {left} vs {right} variables")]
    ArityMismatch { left: usize, right: usize },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid content: {0}")]
    InvalidContent(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("state space has {states} states, above the limit of {limit}")]
    StateSpaceTooLarge { states: usize, limit: usize },
    #[error("generator kernel is not one-dimensional")]
    Singular,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
