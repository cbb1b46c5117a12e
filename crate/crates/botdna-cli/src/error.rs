use std::path::PathBuf;

/// Errors surfaced by the pipeline and CLI. Validation problems exit with
/// code 1, I/O problems with code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown input format '{0}' (expected jsonl or csv)")]
    UnknownFormat(String),
    #[error("no valid rows in {0}")]
    NoValidRows(PathBuf),
    #[error("invalid year range {0}..={1}")]
    InvalidRange(i32, i32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("artifact {0} is missing; run the producing stage first")]
    MissingArtifact(PathBuf),
    #[error("malformed artifact {path}: {reason}")]
    BadArtifact { path: PathBuf, reason: String },
    #[error("event study needs post text; corpus has none")]
    NoTextAvailable,
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
    #[error(transparent)]
    Core(#[from] botdna_core::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        CliError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::MissingArtifact(_) => 2,
            CliError::Stage { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
