use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("level or omega mismatch: {0}")]
    Mismatch(String),
    #[error("recursion guard exceeded at depth {depth} (word length {len})")]
    RecursionGuard { depth: usize, len: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("element is not representable in the required form: {0}")]
    Representation(String),
    #[error("search bound {0} exceeded")]
    BoundExceeded(usize),
    #[error("collision between {0:?} and {1:?}")]
    Collision(Vec<u8>, Vec<u8>),
    #[error("assumption Fr(D) fails at block {block}")]
    FrFailure { block: usize },
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
