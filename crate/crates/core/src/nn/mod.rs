//! A small feed-forward network written from scratch: dense, batch-norm and
//! ReLU layers with a softmax head, cross-entropy + L2 loss, analytic
//! backpropagation, Adam, mini-batch training and a text model format.

mod adam;
mod artifact;
mod layers;
mod model;
mod presets;
mod train;

pub use adam::{adam_step, Adam, AdamConfig};
pub use artifact::{load_model, save_model, ModelArtifact};
pub use layers::{init_xavier_normal, BatchNormLayer, DenseLayer, Layer};
pub use model::{
    argmax, cross_entropy, softmax_rows, Gradients, MlpModel, Mode, Trace, PROB_FLOOR,
};
pub use presets::ModelSpec;
pub use train::{evaluate, one_hot, train, Dataset, EpochRecord, History, TrainConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(String),
}
