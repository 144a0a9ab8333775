use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("singular evaluation of K at the origin")]
    SingularEvaluation,
    #[error("operation requires dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("time {t} outside control domain [{start}, {end}]")]
    ControlDomain { t: f64, start: f64, end: f64 },
    #[error("invalid control: {0}")]
    InvalidControl(String),
    #[error("invalid evolution config: {0}")]
    InvalidEvolution(String),
    #[error("picard iteration did not contract after {iterations} iterations (measured ratio {ratio:.4})")]
    PicardNonConvergence { iterations: usize, ratio: f64 },
    #[error("non-finite state at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("malformed state file: {0}")]
    StateFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PicardNonConvergence { .. } | Error::NonFinite { .. } | Error::DegenerateState(_)
        )
    }
}
