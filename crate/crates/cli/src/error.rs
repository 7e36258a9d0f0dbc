use std::io::ErrorKind;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("embedding service: {0}")]
    Service(String),

    #[error(transparent)]
    Core(dbgraph::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingInput(_) => 2,
            CliError::Invariant(_) => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, e: std::io::Error) -> Self {
        let path = path.into();
        if e.kind() == ErrorKind::NotFound {
            CliError::MissingInput(path)
        } else {
            CliError::Core(dbgraph::Error::Io { path, source: e })
        }
    }
}

impl From<dbgraph::Error> for CliError {
    fn from(e: dbgraph::Error) -> Self {
        use dbgraph::Error as E;
        match e {
            E::Io { path, source } if source.kind() == ErrorKind::NotFound => CliError::MissingInput(path),
            E::ZeroNorm(_)
            | E::NonFinite { .. }
            | E::DuplicateId(_)
            | E::EdgeOutOfRange(..)
            | E::DuplicateEdge(..)
            | E::SelfLoop(_)
            | E::LengthMismatch { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
