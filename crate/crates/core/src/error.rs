use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A mathematical precondition of a bound or an attack is violated.
    #[error("hypothesis violated: {what} (value {value})")]
    Hypothesis { what: &'static str, value: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("trigger search produced a non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("surgery precondition failed: {0}")]
    Surgery(String),
}

/// Coarse classification used by front-ends to map errors onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input data.
    Input,
    /// A mathematical hypothesis (e.g. `phi <= 0`) does not hold.
    Hypothesis,
    /// An algorithm failed to produce a usable result.
    Algorithm,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch { .. }
            | Error::Shape(_)
            | Error::NonFinite(_)
            | Error::InvalidParameter(_) => ErrorKind::Input,
            Error::Hypothesis { .. } => ErrorKind::Hypothesis,
            Error::Quadrature(_) | Error::NonFiniteLoss { .. } | Error::Surgery(_) => {
                ErrorKind::Algorithm
            }
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
