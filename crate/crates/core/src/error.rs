use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("no R-peaks detected: {0}")]
    NoPeaks(String),
    #[error("need at least 2 R-peaks, got {0}")]
    InsufficientPeaks(usize),
    #[error("every RR interval was flagged as an artifact")]
    AllArtifact,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("manifest validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error("required channel missing: {0}")]
    Channel(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("split error: {0}")]
    Split(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("non-finite gradients in boosting round {round}")]
    Numeric { round: usize },
    #[error("feature alignment failed; missing: [{}], extra: [{}]", .missing.join(", "), .extra.join(", "))]
    FeatureAlignment {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("task error: {0}")]
    Task(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
