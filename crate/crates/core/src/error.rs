use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability or divergence input fell outside `[0, 1]` (or was NaN).
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector length, index range, or other shape contract violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid config: {0}")]
    Config(String),

    /// The feasible set became empty: the observations contradict every hypothesis.
    #[error("inconsistent observations: {0}")]
    Inconsistent(String),

    #[error("episode generation failed: {0}")]
    Generation(String),

    /// Operation not allowed in the current episode state (step after done, export before done, ...).
    #[error("invalid state: {0}")]
    State(String),

    #[error("config mismatch: transcript digest {recorded}, active digest {active}")]
    ConfigMismatch { recorded: String, active: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Short machine-readable tag, used as `error_kind` on the wire.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) | Error::Contract(_) => "contract",
            Error::Config(_) | Error::ConfigMismatch { .. } => "config",
            Error::Inconsistent(_) => "inconsistent",
            Error::Generation(_) => "generation",
            Error::State(_) => "state",
            Error::Io { .. } => "io",
            Error::Json { .. } => "parse",
        }
    }
}
