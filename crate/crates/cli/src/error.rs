use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_PREDICTOR: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("predictor failure: {0}")]
    Predictor(String),
    #[error("{0}")]
    Operation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Schema { .. } => EXIT_SCHEMA,
            CliError::Config(_) => EXIT_USAGE,
            CliError::Predictor(_) => EXIT_PREDICTOR,
            CliError::Operation(_) => EXIT_FAILURE,
        }
    }

    pub fn schema(path: impl Into<PathBuf>, line: usize, message: impl ToString) -> Self {
        CliError::Schema {
            path: path.into(),
            line,
            message: message.to_string(),
        }
    }
}

impl From<hoplab_core::engine::EngineError> for CliError {
    fn from(e: hoplab_core::engine::EngineError) -> Self {
        use hoplab_core::engine::EngineError;
        match e {
            EngineError::Predictor { .. } | EngineError::PredictorRange { .. } => {
                CliError::Predictor(e.to_string())
            }
            other => CliError::Operation(other.to_string()),
        }
    }
}

impl From<hoplab_core::metrics::MetricError> for CliError {
    fn from(e: hoplab_core::metrics::MetricError) -> Self {
        match e {
            hoplab_core::metrics::MetricError::Engine(inner) => inner.into(),
            other => CliError::Operation(other.to_string()),
        }
    }
}
