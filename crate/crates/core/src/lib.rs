// Negated comparisons are how validation rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod data;
pub mod error;
pub mod kv;
pub mod motion;
pub mod nn;
pub mod pipeline;
pub mod scalar;
pub mod sensors;
pub mod signal;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations used by the command-line tool.
pub type Series = signal::SampleSeries<f64>;
pub type Triaxial = signal::TriaxialSeries<f64>;
pub type Bundle = data::WindowBundle<f64>;
pub type Dataset = data::LabeledDataset<f64>;
pub type Model = nn::NetworkModel<f64>;
pub type Pipeline = pipeline::PipelineModel<f64>;

/// `f32` instantiations for memory-constrained use.
pub type Series32 = signal::SampleSeries<f32>;
pub type Triaxial32 = signal::TriaxialSeries<f32>;
pub type Bundle32 = data::WindowBundle<f32>;
pub type Dataset32 = data::LabeledDataset<f32>;
pub type Model32 = nn::NetworkModel<f32>;
pub type Pipeline32 = pipeline::PipelineModel<f32>;
