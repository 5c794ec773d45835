use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown S-class `{0}`")]
    UnknownClass(String),

    #[error("invalid class inventory: {0}")]
    Inventory(String),

    #[error("span out of bounds: [{start}, {end}) on a sentence of {len} tokens")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },

    #[error("overlapping mentions: [{0}, {1}) and [{2}, {3})")]
    OverlappingSpans(usize, usize, usize, usize),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("word `{0}` is not in the lexicon")]
    UnknownWord(String),

    #[error("pair ({word}, {class}) is not in the lexicon")]
    AbsentPair { word: String, class: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("memory budget exceeded: {needed} parameters requested, budget is {budget}")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("embedding file: {0}")]
    Embedding(String),

    #[error("no sense vectors for `{0}`")]
    NoSenseVectors(String),

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("k = {k} is too large for {n} candidates")]
    KTooLarge { k: usize, n: usize },

    #[error("predictions do not match the gold examples: {0}")]
    ExampleMismatch(String),

    #[error("typicality is undefined for single-class word `{0}`")]
    TypicalityUndefined(String),

    #[error("stage `{stage}` failed")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
