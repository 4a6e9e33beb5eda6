use std::path::PathBuf;

use crate::corpus::LevelLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("word list not found: {}", .0.display())]
    MissingWordList(PathBuf),

    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown label {value:?} at line {line}")]
    UnknownLabel { line: usize, value: String },

    #[error("invalid feature catalog: {0}")]
    InvalidCatalog(String),

    #[error("unknown descriptor {0:?}")]
    UnknownDescriptor(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("class {label} has {count} item(s); at least 2 are needed to split")]
    ClassTooSmall { label: LevelLabel, count: usize },

    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),

    #[error("item {index} has no second-annotator label")]
    MissingSecondLabel { index: usize },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("node has no samples")]
    EmptyNode,

    #[error("feature matrix is empty")]
    EmptyMatrix,

    #[error("expected a vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("no path predicts {0}")]
    NoPathsForLabel(LevelLabel),

    #[error("definition of {0} has no constraints")]
    EmptyDefinition(LevelLabel),

    #[error("definition set is empty")]
    EmptyDefinitionSet,

    #[error("binary descriptor {0:?} has a constraint that is neither true nor false")]
    UnsupportedBinaryConstraint(String),

    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown data property {0:?}")]
    UnknownProperty(String),

    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },

    #[error("no labels to evaluate")]
    EmptyInput,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_row(self, row: usize) -> Self {
        Error::Row {
            row,
            source: Box::new(self),
        }
    }
}
