use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Input {
        path: String,
        #[source]
        source: cdsteiner::Error,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("instance {id}: {algo} failed: {source}")]
    Algorithm {
        id: usize,
        algo: &'static str,
        #[source]
        source: cdsteiner::Error,
    },

    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl BenchError {
    /// Process exit code: 1 usage, 2 I/O or parse, 3 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 1,
            BenchError::Input { .. } | BenchError::Io(_) => 2,
            BenchError::Algorithm { source, .. } => match source {
                cdsteiner::Error::TooLarge(_) | cdsteiner::Error::Parameter(_) => 1,
                _ => 3,
            },
            BenchError::Invariant(_) => 3,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
