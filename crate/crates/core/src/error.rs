use std::path::PathBuf;

use thiserror::Error;

use crate::harte::HarteError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Harte(#[from] HarteError),

    #[error("operation requires a sounded chord, got N")]
    NoChord,

    #[error("schema error: {0}")]
    Schema(String),

    #[error("chord event {index}: {source}")]
    Event {
        index: usize,
        #[source]
        source: HarteError,
    },

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("timeline '{0}' has no sounded chord events")]
    EmptyTimeline(String),

    #[error("kernel size {kernel_size} is invalid for a {n}x{n} matrix (must be even, >= 2 and <= 2n)")]
    KernelTooLarge { kernel_size: usize, n: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("query has no sounded chords")]
    EmptyQuery,

    #[error("clique error: {0}")]
    Clique(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pair ({a}, {b}): {source}")]
    Pair {
        a: String,
        b: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by user input (bad files, bad chords, bad
    /// parameters) as opposed to environment or internal failures.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io(_) => false,
            Error::File { .. } => true,
            Error::Pair { source, .. } => source.is_input_error(),
            _ => true,
        }
    }
}
