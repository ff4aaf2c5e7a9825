//! Config-driven multimodal feature extraction: YAML plans, toy model
//! registry, deterministic kernels, NPY output.
//!
//! The pipeline is config -> plan -> run: [`config`] parses and
//! validates the YAML into an [`config::ExtractionPlan`], [`model`]
//! resolves each requested model against the registry, and [`runner`]
//! drives decode -> preprocess -> extract -> write for every sample of
//! every job, producing NPY files in the output cascade.

pub mod config;
pub mod dataset;
pub mod error;
pub mod model;
pub mod npy;
pub mod runner;
pub mod tensor;

pub use config::{
    apply_overrides, parse_yaml_config, validate_config, ConfigNode, ExtractionPlan, Modality,
    OverridePair, Validation,
};
pub use error::{ConfigError, DataError, FormatError, IoError, ModelError, PipelineError};
pub use model::{load_registry, ModelRegistry};
pub use npy::{read_npy, write_npy};
pub use runner::{execute_extractions, execute_modality, RunReport};
pub use tensor::Tensor;
