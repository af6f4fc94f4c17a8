//! Just enough neural-network machinery for the 3-conv / 2-dense SpO₂
//! regressor: valid 2-D convolution, dense layers, ReLU, MSE with an L2
//! weight penalty, hand-written reverse-mode gradients and Adam.

mod adam;
pub mod checkpoint;
mod gemm;
mod network;
mod tensor;

use thiserror::Error;

pub use adam::{AdamConfig, AdamState};
pub use network::{
    loss, Architecture, Conv2d, Dense, Gradients, LossValue, Network, PARAM_NAMES, PARAM_TENSORS,
};
pub use tensor::{conv2d_forward, dense_forward, Tensor};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("kernel {kh}x{kw} larger than input {h}x{w}")]
    KernelTooLarge {
        kh: usize,
        kw: usize,
        h: usize,
        w: usize,
    },
    #[error("empty batch")]
    EmptyBatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = NnError> = std::result::Result<T, E>;
