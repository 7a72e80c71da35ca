use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid document id {0:?}: ids must be non-empty and contain no whitespace")]
    InvalidDocId(String),

    #[error("duplicate document {doc}{}", topic.as_ref().map(|t| format!(" in topic {t}")).unwrap_or_default())]
    DuplicateDocument { topic: Option<String>, doc: String },

    #[error("document {0} is not part of the collection")]
    UnknownDocument(String),

    #[error("invalid collection: {0}")]
    InvalidCollection(String),

    #[error("invalid score for document {doc}: {score}")]
    InvalidScore { doc: String, score: f64 },

    #[error("invalid ranked list: {0}")]
    InvalidRankedList(String),

    #[error("a signal set needs at least one signal")]
    EmptySignalSet,

    #[error("the gold standard has no relevant documents")]
    NoRelevantDocuments,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid metric spec {spec:?}: {reason}")]
    InvalidMetricSpec { spec: String, reason: String },

    #[error("no gold standard for topic {0}")]
    MissingGold(String),

    #[error("no collection for topic {0}")]
    MissingCollection(String),

    #[error("run {run} has no ranking for topic {topic}")]
    IncompleteGrid { run: String, topic: String },

    #[error("metric unanimity needs at least two runs per topic")]
    InsufficientRuns,

    #[error("no run pair is unanimously improved across the metric set")]
    NoUnanimousPairs,

    #[error("pivot run {0} is not among the fused runs")]
    UnknownPivot(String),

    #[error("invalid generator parameters: {0}")]
    InvalidGeneratorParams(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
