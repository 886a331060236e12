//! Dense classifier built from scratch: batch normalization, fully connected
//! layers, ReLU, softmax, categorical cross-entropy and Adam.
//!
//! The stack is `BatchNorm → [Dense → ReLU → BatchNorm]* → Dense → Softmax`.
//! With widths `[4096, 256, 128, 64]` it carries 1,107,904 parameters, of
//! which 1,098,944 are trainable and 8,960 are moving statistics.

mod adam;
mod batchnorm;
mod dense;
mod file;
mod loss;
mod model;

pub use adam::{AdamConfig, AdamState};
pub use batchnorm::BatchNorm;
pub use dense::Dense;
pub use file::{
    load_model, model_from_bytes, model_to_bytes, read_model_from, save_model, write_model_to, MODEL_MAGIC,
    MODEL_VERSION,
};
pub use loss::{accuracy, argmax_rows, cross_entropy, one_hot, LOG_CLAMP};
pub use model::{init_model, softmax_rows, DenseModel, Gradients, Layer, Mode, ParamCounts, PAPER_WIDTHS};

/// Floating-point element type the network can run in (f32 for training,
/// f64 for gradient checks).
pub trait Float: ndarray::NdFloat {}

impl<T: ndarray::NdFloat> Float for T {}
