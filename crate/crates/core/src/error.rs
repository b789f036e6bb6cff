use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("calibration failed: best residual {residual:e} exceeds tolerance")]
    CalibrationFailed { residual: f64 },

    #[error("preparation pipeline disagrees with the target mode (residual {residual:e})")]
    PipelineMismatch { residual: f64 },

    #[error("cylindrical converter requires a retardation phase")]
    MissingPhase,

    #[error("probabilities must be nonnegative and sum to 1 (sum {sum})")]
    BadDistribution { sum: f64 },

    #[error("all channels are dark after background subtraction")]
    AllDark,

    #[error("invalid grid size {got}: need at least {min}")]
    InvalidGrid { got: usize, min: usize },

    #[error("cannot parse strategy {input:?}: {reason}")]
    ParseStrategy { input: String, reason: String },

    #[error("invalid payoff override {input:?}")]
    ParsePayoff { input: String },

    #[error("empty strategy set")]
    EmptySet,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
