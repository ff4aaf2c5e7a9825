//! Configuration pipeline: YAML text -> node tree -> overrides -> plan.

mod node;
mod overrides;
mod plan;
mod validate;

pub use node::{parse_yaml_config, ConfigNode};
pub use overrides::{apply_overrides, OverridePair};
pub use plan::{ColumnSpec, ExtractionJob, ExtractionPlan, ModelSpec, Modality, Source};
pub use validate::{validate_config, Validation};
