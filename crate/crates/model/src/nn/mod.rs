//! Minimal dense tensors, parameters, a reverse-mode tape, layers and
//! optimizers.

mod layers;
mod optim;
mod params;
mod tape;
mod tensor;

pub use layers::{BiOutput, BiRecurrent, CellState, Embedding, Linear, RecurrentCell};
pub use optim::{clip_grad_norm, Adam, Optimizer, Sgd};
pub use params::{Grads, ParamId, Params};
pub use tape::{Tape, Var};
pub use tensor::Tensor;
