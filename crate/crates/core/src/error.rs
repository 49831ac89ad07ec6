use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("covariance is not symmetric positive definite: {0}")]
    SingularCovariance(String),

    #[error("length mismatch: `{name}` has length {got}, expected {expected}")]
    LengthMismatch {
        name: &'static str,
        expected: usize,
        got: usize,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// The argument or key the error refers to, when there is one.
    pub fn key(&self) -> Option<&'static str> {
        match self {
            Error::InvalidArgument { name, .. } | Error::LengthMismatch { name, .. } => Some(name),
            Error::SingularCovariance(_) => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
