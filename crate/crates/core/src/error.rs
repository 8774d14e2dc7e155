use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One violated bound on a configuration value.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl Violation {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join_violations(.0))]
    Config(Vec<Violation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("run failed for cell {cell_id} seed {seed}: {source}")]
    Run {
        cell_id: u32,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("table {table} is missing cells {ids:?}")]
    MissingCells { table: String, ids: Vec<u32> },

    #[error("malformed data in {path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config(vec![Violation::new(key, message)])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            Error::MissingCells { .. } | Error::Data { .. } => 4,
            Error::Run { source, .. } => source.exit_code(),
            Error::Domain(_) | Error::DegenerateVariance(_) => 1,
        }
    }

    /// Keys named by a configuration error, in order.
    pub fn violated_keys(&self) -> Vec<&str> {
        match self {
            Error::Config(v) => v.iter().map(|v| v.key.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}
