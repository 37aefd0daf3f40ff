use std::path::PathBuf;

use thiserror::Error;

use crate::sql::SqlError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("data error in table {table}{}: {message}", fmt_row_col(*.row, .column.as_deref()))]
    Data {
        table: String,
        row: Option<usize>,
        column: Option<String>,
        message: String,
    },

    #[error(transparent)]
    Sql(#[from] SqlError),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("execution error: {0}")]
    Execution(String),

    #[error("universe size overflow: {0}")]
    Overflow(String),

    #[error("provider error: {0}")]
    Provider(String),

    #[error("missing statistics for column {0}")]
    MissingStatistics(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing upstream artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn fmt_row_col(row: Option<usize>, column: Option<&str>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" (row {r}, column {c})"),
        (Some(r), None) => format!(" (row {r})"),
        (None, Some(c)) => format!(" (column {c})"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
