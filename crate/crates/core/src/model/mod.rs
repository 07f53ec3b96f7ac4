//! Two-layer LSTM language model with hand-written backpropagation through
//! time.
//!
//! The stack is embedding lookup → LSTM → dropout → LSTM → dropout → dense
//! projection; the softmax lives in the loss. Cells use the standard forget-gate
//! formulation without peepholes, and every sequence starts from a zero state.

mod cell;
mod checkpoint;
mod network;
mod params;

pub use cell::{lstm_cell_forward, CellCache};
pub use checkpoint::{Checkpoint, CheckpointError, TrainingMeta, FORMAT_VERSION, MAGIC};
pub use network::{backward, backward_into, forward, step, Forward, ForwardCache, HiddenState, Mode};
pub use params::{LstmLayerParams, ModelDims, ModelParams, TENSOR_COUNT};

use thiserror::Error;

use crate::corpus::TokenId;
use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("empty input sequence")]
    EmptySequence,
    #[error("token id {id} out of range for vocabulary of {vocab}")]
    InvalidTokenId { id: TokenId, vocab: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("gradient shape {got:?} does not match cached forward pass {expected:?}")]
    CacheMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("dropout rate {0} outside [0, 1)")]
    InvalidDropout(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}
