//! The question generator: bidirectional recurrent paragraph encoder with
//! BIO answer tags, recurrent decoder with sparsemax attention and a copy
//! gate over the fixed vocabulary plus the example's dynamic dictionary.

mod beam;
mod embeddings;
mod generate;
mod model;
mod train;

pub use beam::{beam_search, BeamConfig, Hypothesis, StepModel};
pub use embeddings::load_text_embeddings;
pub use generate::{generate_questions, generate_questions_with, DecodedQuestion};
pub(crate) use model::dropout_fn;
pub use model::{DecoderState, EncodedParagraph, QgModel, StepOutput};
pub use train::{evaluate_loss, token_accuracy, train, TrainExample, TrainReport};
