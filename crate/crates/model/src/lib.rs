//! Neural components: a bidirectional recurrent paragraph encoder, a question
//! decoder with a per-example dynamic dictionary, a copy gate and sparsemax
//! attention, beam search, and a span-scoring answerability filter.
//!
//! Gradients come from a small reverse-mode tape ([`nn::Tape`]) over dense
//! `f64` tensors; models are sized for CPU training at desk scale.

pub mod checkpoint;
pub mod config;
mod error;
pub mod filter;
pub mod nn;
pub mod nonfinite;
pub mod qg;
pub mod sparsemax;
pub mod squad;
pub mod synthetic;
pub mod vocab;

pub use checkpoint::{Checkpoint, CheckpointKind};
pub use config::{CellKind, FilterConfig, QgConfig};
pub use error::{Error, Result};
pub use sparsemax::{sparsemax, sparsemax_backward};
pub use vocab::{DynamicDictionary, Vocabulary};
