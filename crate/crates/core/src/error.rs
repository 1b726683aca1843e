use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A row the CSV reader could not turn into numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for RowIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "insufficient data: {records} records with {distinct_n} distinct weld counts \
         (need at least 4 records and 2 distinct counts)"
    )]
    InsufficientData { records: usize, distinct_n: usize },

    #[error("empty cohort")]
    EmptyCohort,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("grid has {cells} cells, budget is {budget}")]
    GridTooLarge { cells: u128, budget: u64 },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("{} unparseable row(s): {}", .0.len(), join_issues(.0))]
    UnparseableRow(Vec<RowIssue>),

    #[error("dataset contains no accepted records")]
    EmptyDataset,

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("group `{group}`: {source}")]
    Group {
        group: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than the caller.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::InvalidConfig(_) | Error::UnknownGroup(_) => false,
            Error::Group { source, .. } => source.is_data_error(),
            _ => true,
        }
    }
}

fn join_issues(issues: &[RowIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
