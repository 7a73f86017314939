//! Minimal reverse-mode automatic differentiation over dense `f32` tensors.

pub mod adam;
pub mod ops;
pub mod tape;
pub mod tensor;

pub use adam::Adam;
pub use tape::{sigmoid, Gradients, Tape, Var};
pub use tensor::Tensor;
