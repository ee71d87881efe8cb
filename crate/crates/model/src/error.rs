use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sequence of {len} tokens exceeds the maximum of {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("question of {len} tokens does not fit a packed length of {max_len}")]
    QuestionTooLong { len: usize, max_len: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("loss diverged at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("validation set has a single class")]
    DegenerateValidation,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Text(#[from] qgen_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
