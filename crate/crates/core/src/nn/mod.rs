//! Fully connected network engine: presets, normalizers, SGD training and
//! evaluation.

mod config;
mod eval;
mod network;
mod normalize;
mod train;

pub use config::{NetworkConfig, NormalizationKind, OutputActivation, Preset};
pub use eval::EvalReport;
pub use network::{ForwardPass, Gradients, NetworkModel, MODEL_FORMAT_VERSION};
pub use normalize::{fit_normalizer, Normalizer};
pub use train::{fit_model, TrainingHistory};
