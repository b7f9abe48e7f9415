use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("expected exactly two distinct labels, found {0}")]
    LabelCount(usize),

    #[error("labels are not normalized for {0} loss")]
    LabelsNotNormalized(&'static str),

    #[error("sample index {index} out of range for n = {n}")]
    SampleIndex { index: usize, n: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("starting point is not feasible")]
    InfeasibleStart,

    #[error("non-finite value detected at iteration {iteration}")]
    NonFinite { iteration: u64 },

    #[error("iteration {k} out of range for horizon {horizon}")]
    IterationRange { k: u64, horizon: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("reference value {f_min} exceeds the smallest traced value {observed}")]
    InconsistentReference { f_min: f64, observed: f64 },

    #[error("trace has no recorded gaps")]
    NoGaps,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
