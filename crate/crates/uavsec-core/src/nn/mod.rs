//! Minimal real-valued neural-network engine with exact backpropagation.
//!
//! Supported layers: dense, 3x3 same-padding convolution, batch
//! normalization, ReLU, tanh, 2x2 max pooling, and flatten — enough for the
//! dominant-eigenvector subnet, the convolutional trajectory actor-critic,
//! and all value critics. Parameters and activations are `f64`; forward and
//! backward are bit-deterministic for identical inputs.

pub mod checkpoint;
mod layers;
mod network;
mod optim;
mod tensor;

pub use checkpoint::{CheckpointError, SectionReader, SectionWriter, CHECKPOINT_VERSION};
pub use layers::{Layer, LayerCache, LayerGrads};
pub use network::{grad_check, Mode, NetCache, NetGrads, Network};
pub use optim::{adam_step_slice, AdamSlice, AdamState};
pub use tensor::Tensor;

use core::fmt;

/// Errors from the network engine.
#[derive(Debug, Clone, PartialEq)]
pub enum NnError {
    /// Input or intermediate activation shape is incompatible with a layer.
    ShapeMismatch { layer: usize, detail: &'static str },
    /// Backward called with a cache from a different forward pass or network.
    StaleCache,
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { layer, detail } => {
                write!(f, "shape mismatch at layer {layer}: {detail}")
            }
            NnError::StaleCache => write!(f, "backward cache does not match this network"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NnError {}
