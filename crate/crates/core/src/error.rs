use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A resource guard would be exceeded by the requested enumeration.
    #[error("guard exceeded: {what} requires {required}, limit is {limit}")]
    Guard {
        what: String,
        required: String,
        limit: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("letter index {index} outside alphabet of size {alphabet_size}")]
    LetterOutOfRange { index: usize, alphabet_size: usize },

    #[error("permutation size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("not a quotient: the target core graph is not covered by the source")]
    NotQuotient,

    #[error("no morphism: the source subgroup is not contained in the target")]
    NoMorphism,

    #[error("word is not a member of the subgroup")]
    NotMember,

    #[error("graph is not regular")]
    NotRegular,

    #[error("graph is not connected")]
    NotConnected,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub fn guard(what: impl Into<String>, required: impl ToString, limit: impl ToString) -> Self {
        Error::Guard {
            what: what.into(),
            required: required.to_string(),
            limit: limit.to_string(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}
