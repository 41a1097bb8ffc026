use thiserror::Error;

pub type Result<T> = std::result::Result<T, GofError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GofError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("pilot estimator failed: {0}")]
    PilotFailed(String),
    #[error("numeric overflow: {0}")]
    Overflow(String),
    /// Quadrature did not settle, typically because a required moment is infinite.
    #[error("moment condition violated: {0}")]
    MomentCondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl GofError {
    /// True for failures caused by the caller's input rather than by the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            GofError::InvalidParameter(_)
                | GofError::Domain(_)
                | GofError::DegenerateSample(_)
                | GofError::Parse(_)
                | GofError::Io(_)
        )
    }
}

impl From<std::io::Error> for GofError {
    fn from(e: std::io::Error) -> Self {
        GofError::Io(e.to_string())
    }
}

impl From<csv::Error> for GofError {
    fn from(e: csv::Error) -> Self {
        GofError::Parse(e.to_string())
    }
}
