use thiserror::Error;

/// Typed failure modes of the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("curve hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("singularity at t = {t}: {context}")]
    Singularity { t: f64, context: String },

    #[error("insufficient data: need {needed} usable samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate weight: {0}")]
    DegenerateWeight(String),

    #[error("config value out of range for `{key}`: {message}")]
    RangeViolation { key: String, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config error in {path}: {message}")]
    ConfigParse { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
