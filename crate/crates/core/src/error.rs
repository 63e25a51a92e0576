use std::path::PathBuf;

use crate::quality::Feature;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the pipeline can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // catalog
    #[error("duplicate source: {0}")]
    DuplicateSource(String),
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("unknown domain: {0}")]
    UnknownDomain(String),
    #[error("unknown source: {0}")]
    UnknownSource(String),
    #[error("unknown table: {0}")]
    UnknownTable(String),
    #[error("unknown source column: {0}")]
    UnknownSourceColumn(String),
    #[error("unknown global table: {0}")]
    UnknownGlobalTable(String),
    #[error("unknown global column: {0}")]
    UnknownGlobalColumn(String),
    #[error("duplicate global table: {0}")]
    DuplicateGlobalTable(String),
    #[error("global table {0} declares no key column")]
    MissingKeyColumn(String),
    #[error("schema mismatch in {file}: {detail}")]
    SchemaMismatch { file: String, detail: String },
    #[error("{file}: row {row}: {detail}")]
    RowFormatError { file: String, row: usize, detail: String },
    #[error("duplicate reference key {key} in {table}")]
    DuplicateReferenceKey { table: String, key: String },
    #[error("null key value in reference {table} at row {row}")]
    NullReferenceKey { table: String, row: usize },
    #[error("column {column} is already mapped to {existing}; pass replace to remap")]
    MappingConflict { column: String, existing: String },
    #[error("invalid domain rule `{rule}`: {detail}")]
    InvalidDomainRule { rule: String, detail: String },
    #[error("invalid date `{0}` (expected day/month/year)")]
    InvalidDate(String),
    #[error("volatility must be positive, got {0}")]
    InvalidVolatility(i64),
    #[error("unsupported catalog version {found} (this build reads up to {supported})")]
    UnsupportedCatalogVersion { found: u32, supported: u32 },
    #[error("catalog parse error: {0}")]
    CatalogParseError(String),
    #[error("no sources registered")]
    NoSources,

    // assessor
    #[error("reference relation for {0} is empty or missing")]
    EmptyReference(String),
    #[error("source table {table} has no column mapped to key {key}")]
    MissingKeyMapping { table: String, key: String },
    #[error("fact completeness inputs inconsistent: incompleteness {inc} exceeds population {pop}")]
    InvariantViolation { pop: f64, inc: f64 },
    #[error("empty projection")]
    EmptyProjection,
    #[error("empty input")]
    EmptyInput,
    #[error("assessment for mapping {0} is stale; run assess")]
    StaleAssessment(String),

    // query frontend
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("ambiguous column {0}; qualify it with its global table")]
    AmbiguousColumn(String),
    #[error("unknown quality feature: {0}")]
    UnknownFeature(String),
    #[error("qualitative term `{term}` is not defined for {feature}")]
    UnresolvedTerm { feature: Feature, term: String },
    #[error("quality goals mixing AND and OR are not supported")]
    UnsupportedGoalShape,
    #[error("selection predicate spans several global tables")]
    CrossTablePredicate,

    // planner
    #[error("no registered source supplies any projected column")]
    NoCandidateSources,
    #[error("{count} queried sources exceed the combination cap of {cap}; raise max_sources to enumerate them")]
    TooManySources { count: usize, cap: usize },
    #[error("your required level of quality for query answering can't be satisfied with these data quality features together")]
    UnsatisfiableGoal,

    // ranker
    #[error("nothing to rank")]
    EmptyRanking,
    #[error("scoring function rejected: {0}")]
    RejectedScoringFunction(String),
    #[error("score for {0} is not a finite number")]
    InvalidScore(String),

    // fusion
    #[error("member {source_name} has no column for key {key}")]
    MissingKey { source_name: String, key: String },

    // config / io
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
