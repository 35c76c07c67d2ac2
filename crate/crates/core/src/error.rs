use alloc::string::String;

/// Errors raised by operators, proximal maps, splittings and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("non-finite value in input to {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("line search did not terminate after {backtracks} backtracks (tau = {tau:e})")]
    LineSearch { backtracks: usize, tau: f64 },
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }

    /// True for errors that signal numerical trouble during iteration rather
    /// than a bad setup.
    pub fn is_numerical_anomaly(&self) -> bool {
        matches!(self, Error::LineSearch { .. } | Error::NonFinite(_))
    }
}
