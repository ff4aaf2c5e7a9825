//! Model registry, layer kernels, and graph execution.

mod graph;
mod layer;
mod registry;

pub use graph::{build_model, extract_features, forward, ModelGraph};
pub use layer::{Layer, LayerOp, L2_EPS};
pub use registry::{load_registry, InputContract, ModelEntry, ModelRegistry};
