use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{origin}: {msg}")]
    Parse { origin: String, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] rmrk_core::Error),
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn parse(origin: impl Into<String>, msg: impl Into<String>) -> Self {
        BenchError::Parse {
            origin: origin.into(),
            msg: msg.into(),
        }
    }

    /// Process exit status for the CLI: 2 for bad input, 3 for solver or
    /// instance failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Io { .. } => 1,
            BenchError::Parse { .. } | BenchError::Config(_) => 2,
            BenchError::Solver(_) => 3,
        }
    }
}
