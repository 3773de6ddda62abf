use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no facts section heading found")]
    MissingFactsSection,
    #[error("facts section heading found but the section is empty")]
    EmptyFacts,
    #[error("case {0} has no judgment date")]
    MissingDate(String),

    #[error("index {index} out of bounds (length {len})")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("backward requires a scalar output, got shape {0:?}")]
    NonScalarOutput(Vec<usize>),
    #[error("attribution target must be scalar, got shape {0:?}")]
    NonScalarTarget(Vec<usize>),

    #[error("empty text supplied to the {0} branch")]
    EmptyText(&'static str),
    #[error("auxiliary relevance head is disabled for this model")]
    AuxDisabled,
    #[error("training split is empty")]
    EmptyDataset,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no model markup for case {case_id}, article {article}")]
    MissingPair { case_id: String, article: String },
    #[error("case {0}: a violated article is not among the alleged articles")]
    GoldNotSubsetOfAlleged(usize),

    #[error("degenerate group: {0}")]
    DegenerateGroup(String),
    #[error("constant input to correlation")]
    ConstantInput,

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
