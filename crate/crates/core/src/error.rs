use std::path::PathBuf;

/// Errors produced by the correction pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("number {0} is out of range (expected 0..=999999)")]
    NumberOutOfRange(u64),

    #[error("{path}:{line}: {msg}")]
    RulesFormat {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("grapheme-to-phoneme table does not cover {ch:?} (tables must be total)")]
    G2pCoverage { ch: char },

    #[error("invalid threshold {0} (expected 0.0..=1.0)")]
    InvalidThreshold(f64),

    #[error("reference transcript is empty{}", id.as_ref().map(|i| format!(" (utterance {i})")).unwrap_or_default())]
    EmptyReference { id: Option<String> },

    #[error("noise rate {0} is out of range (expected 0.0..=1.0)")]
    InvalidNoiseRate(f64),

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("relative reduction undefined for non-positive base {0}")]
    NonPositiveBase(f64),

    #[error("training loss became non-finite at batch {batch} (loss {loss})")]
    NonFiniteLoss { batch: usize, loss: f64 },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
