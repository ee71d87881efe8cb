//! Answerability filter: a question and paragraph are packed into one
//! sequence, a contextual encoder produces one vector per position, and the
//! no-answer score at `[CLS]` is compared with the best paragraph span.

mod calibrate;
mod encoder;
mod model;
mod pack;
mod score;

pub use calibrate::{calibrate_threshold, threshold_accuracy, Calibration};
pub use encoder::{ContextEncoder, RecurrentContextEncoder};
pub use model::{FilterExample, FinetuneReport, SpanScorer};
pub use pack::{pack, PackedSequence, CLS, SEP};
pub use score::{is_answerable, score_hidden, FilterVerdict, SpanScores};
