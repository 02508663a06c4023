use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("unknown factor label `{0}`")]
    UnknownFactor(String),

    #[error("duplicate factor label `{0}`")]
    DuplicateFactor(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("truncation loss {deficit:.3e} exceeds {limit:.1e} (cutoff {cutoff}); raise the cutoff")]
    TruncationLoss { deficit: f64, limit: f64, cutoff: usize },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("non-finite matrix entries")]
    NonFinite,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t:.6e}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("non-finite state at t = {t:.6e}")]
    Diverged { t: f64 },

    #[error("i/o: {0}")]
    Io(String),

    #[error("{row}: {source}")]
    AtRow { row: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }

    /// Time at which a numerical failure happened, if any.
    pub fn failing_time(&self) -> Option<f64> {
        match self {
            Error::StepUnderflow { t, .. } | Error::TooManySteps { t, .. } | Error::Diverged { t } => {
                Some(*t)
            }
            Error::AtRow { source, .. } => source.failing_time(),
            _ => None,
        }
    }

    /// Scenario row that produced the error, if known.
    pub fn row(&self) -> Option<&str> {
        match self {
            Error::AtRow { row, .. } => Some(row),
            _ => None,
        }
    }

    pub fn at_row(self, row: impl Into<String>) -> Self {
        Error::AtRow { row: row.into(), source: Box::new(self) }
    }
}
