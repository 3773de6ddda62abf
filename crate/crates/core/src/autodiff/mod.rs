//! Dense tensors with reverse-mode differentiation.

mod checkpoint;
mod gradcheck;
mod tape;
mod tensor;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use gradcheck::{grad_check, GradCheckReport, NamedTensors};
pub use tape::{ElementwiseFn, Gradients, Tape, Var};
pub use tensor::Tensor;
