use thiserror::Error;

/// Errors raised by the simulator and the variational toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("sampling error: profile is not finite at r = {r}")]
    Sampling { r: f64 },
    #[error("shape mismatch: expected {expected} samples, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("range error: {0}")]
    Range(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("root not bracketed: {0}")]
    Bracket(String),
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Short machine-readable tag, used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Sampling { .. } => "sampling",
            Error::Shape { .. } => "shape",
            Error::Range(_) => "range",
            Error::Construction(_) => "construction",
            Error::Precondition(_) => "precondition",
            Error::Bracket(_) => "bracket",
            Error::Calibration(_) => "calibration",
            Error::InternalConsistency(_) => "internal_consistency",
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
