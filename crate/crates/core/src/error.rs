use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input text is empty")]
    EmptyInput,
    #[error("edits overlap at character {0}")]
    OverlappingEdits(usize),
    #[error("range {start}..{end} is out of bounds for text of {len} characters")]
    RangeOutOfBounds { start: usize, end: usize, len: usize },
    #[error("range {start}..{end} covers no token")]
    EmptySpan { start: usize, end: usize },
    #[error("span is not aligned with the paragraph tokens: {0}")]
    SpanMisaligned(String),
    #[error("malformed BIO tags: {0}")]
    MalformedTags(String),
    #[error("annotator unavailable: {0}")]
    AnnotatorUnavailable(String),
    #[error("malformed annotator response: {0}")]
    MalformedAnnotation(String),
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("threshold {0} is outside [0, 1]")]
    InvalidKnob(f64),
}
