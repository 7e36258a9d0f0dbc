use std::path::PathBuf;

/// Errors produced by the graph-construction pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: invalid descriptor: {source}", path.display())]
    Descriptor {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },

    /// A declared schema is internally inconsistent.
    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("header mismatch at column {index}: expected `{expected}`, found `{found}`")]
    HeaderMismatch {
        index: usize,
        expected: String,
        found: String,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("zero-norm embedding at row {0}")]
    ZeroNorm(usize),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("edge ({0}, {1}) out of range for {2} nodes")]
    EdgeOutOfRange(usize, usize, usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("anchor `{anchor}` has {available} eligible negatives, {requested} requested")]
    NotEnoughNegatives {
        anchor: String,
        available: usize,
        requested: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
