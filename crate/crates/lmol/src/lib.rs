//! Conditional SMILES generation: a decoder-only transformer (rotary
//! positions, RMS pre-normalization, masked multi-head attention, SwiGLU)
//! conditioned on numeric properties and token-sequence fragments, trained
//! with stochastic context deletion so one model covers unconditional,
//! single- and multi-conditional generation.

pub mod batch;
pub mod checkpoint;
pub mod config;
pub mod context;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod infer;
pub mod metrics;
pub mod model;
pub mod params;
pub mod rng;
pub mod sample;
pub mod train;

pub use config::{ModelConfig, SamplerConfig, TrainConfig};
pub use context::{ConditionTemplate, ContextSpec, FragmentCondition, NumericCondition};
pub use error::Error;
pub use params::ModelParams;
