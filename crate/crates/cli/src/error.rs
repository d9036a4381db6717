use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag combination or value; exit code 1.
    #[error("{flag}: {msg}")]
    Usage { flag: &'static str, msg: String },
    /// Problem with input data; exit code 2.
    #[error("{}{}: {source}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Data {
        path: PathBuf,
        line: Option<usize>,
        #[source]
        source: codetok::Error,
    },
    #[error("{0}")]
    Other(#[from] codetok::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn usage(flag: &'static str, msg: impl Into<String>) -> Self {
        CliError::Usage {
            flag,
            msg: msg.into(),
        }
    }

    pub fn data(path: impl Into<PathBuf>, source: codetok::Error) -> Self {
        let path = path.into();
        match source {
            codetok::Error::AtLine { line, source } => CliError::Data {
                path,
                line: Some(line),
                source: *source,
            },
            source => CliError::Data {
                path,
                line: None,
                source,
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
