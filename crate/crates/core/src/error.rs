use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid multi-index {0:?}")]
    InvalidIndex(Vec<usize>),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("the weight cone needs at least one edge")]
    EmptyEdgeSet,
    #[error("vector does not lie in the ambient subspace of the cone")]
    OutsideSubspace,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
}
