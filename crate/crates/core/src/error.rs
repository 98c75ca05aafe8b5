use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("term {index} is not positive")]
    NonPositiveTerm { index: usize },

    #[error("terms are not strictly increasing at index {index}")]
    NotIncreasing { index: usize },

    #[error("ratio n[{index}]/n[{prev}] = {ratio} does not exceed 1", prev = index - 1)]
    NotLacunary { index: usize, ratio: String },

    #[error("ratio at index {index} is below the certified gap {q}")]
    CertificateViolated { index: usize, q: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid block shape: long length {long} must exceed short length {short} >= 1")]
    InvalidBlockShape { long: usize, short: usize },

    #[error("sequence too short: {required} terms required, {available} available")]
    InsufficientLength { required: usize, available: usize },

    /// A grid or enumeration limit would be exceeded. `bound` names the violated limit.
    #[error("infeasible: {bound}")]
    Infeasible { bound: String },

    #[error("grid error: {0}")]
    Grid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn infeasible(bound: impl Into<String>) -> Self {
        Error::Infeasible {
            bound: bound.into(),
        }
    }

    /// True for errors caused by grid or enumeration limits rather than bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. }
                | Error::InsufficientLength { .. }
                | Error::InvalidBlockShape { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
