//! Model registry: JSON catalogue of deterministic layer chains.
//!
//! Every entry carries explicit weights, an input contract for its
//! modality, and one or more named variants; "default" must exist. The
//! whole file is validated eagerly on load so later job builds can only
//! fail on plan/registry mismatches, never on registry internals.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use crate::config::Modality;
use crate::error::{IoError, ModelError, PipelineError};
use crate::model::layer::{Layer, LayerOp};

/// Input contract of a model, fixed by its modality.
#[derive(Clone, Debug, PartialEq)]
pub enum InputContract {
    Visual {
        /// Default (height, width); reshape in the plan overrides it.
        shape: (usize, usize),
        mean: [f32; 3],
        std: [f32; 3],
    },
    Audio {
        sample_rate: u32,
    },
    Textual {
        vocab: HashMap<String, u32>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub modality: Modality,
    pub input: InputContract,
    pub variants: BTreeMap<String, Vec<Layer>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelRegistry {
    models: BTreeMap<String, ModelEntry>,
}

impl ModelRegistry {
    pub fn get(&self, name: &str) -> Option<&ModelEntry> {
        self.models.get(name)
    }

    /// Model names in sorted order, for error listings.
    pub fn available(&self) -> Vec<String> {
        self.models.keys().cloned().collect()
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: RawRegistry = serde_json::from_str(text).map_err(|e| ModelError::Registry {
            context: "file".into(),
            message: e.to_string(),
        })?;
        let mut models = BTreeMap::new();
        for (name, raw_model) in raw.models {
            let entry = convert_model(&name, raw_model)?;
            models.insert(name, entry);
        }
        Ok(Self { models })
    }
}

/// Reads and validates a registry file. A missing or unreadable file is
/// an [`IoError`]; everything wrong inside the file is a [`ModelError`].
pub fn load_registry(path: &Path) -> Result<ModelRegistry, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::new(path, e))?;
    Ok(ModelRegistry::from_json(&text)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegistry {
    models: BTreeMap<String, RawModel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    modality: String,
    input: RawInput,
    variants: BTreeMap<String, RawVariant>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawInput {
    shape: Option<Vec<i64>>,
    mean: Option<Vec<f64>>,
    std: Option<Vec<f64>>,
    sample_rate: Option<u32>,
    vocab: Option<HashMap<String, u32>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariant {
    layers: Vec<RawLayer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    name: String,
    kind: String,
    weights: Option<Vec<Vec<f64>>>,
    bias: Option<Vec<f64>>,
    table: Option<Vec<Vec<f64>>>,
    frame: Option<usize>,
    hop: Option<usize>,
}

fn registry_err(context: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Registry {
        context: context.into(),
        message: message.into(),
    }
}

fn convert_model(name: &str, raw: RawModel) -> Result<ModelEntry, ModelError> {
    let context = format!("model '{name}'");
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(registry_err(
            &context,
            "model names must be non-empty and contain no path separators",
        ));
    }
    let modality = Modality::parse(&raw.modality).ok_or_else(|| {
        registry_err(&context, format!("unknown modality '{}'", raw.modality))
    })?;
    let input = convert_input(&context, modality, raw.input)?;

    if !raw.variants.contains_key("default") {
        return Err(registry_err(&context, "variants must include 'default'"));
    }
    let mut variants = BTreeMap::new();
    for (variant_name, raw_variant) in raw.variants {
        let vctx = format!("{context} variant '{variant_name}'");
        let layers = convert_layers(&vctx, modality, raw_variant.layers)?;
        validate_chain(&vctx, modality, &input, &layers)?;
        variants.insert(variant_name, layers);
    }
    Ok(ModelEntry {
        modality,
        input,
        variants,
    })
}

fn convert_input(
    context: &str,
    modality: Modality,
    raw: RawInput,
) -> Result<InputContract, ModelError> {
    let require_absent = |present: bool, field: &str| {
        if present {
            Err(registry_err(
                context,
                format!("input field '{field}' does not apply to {modality}"),
            ))
        } else {
            Ok(())
        }
    };
    match modality {
        Modality::Visual => {
            require_absent(raw.sample_rate.is_some(), "sample_rate")?;
            require_absent(raw.vocab.is_some(), "vocab")?;
            let shape = raw
                .shape
                .ok_or_else(|| registry_err(context, "visual input requires 'shape'"))?;
            let [h, w, depth] = shape[..] else {
                return Err(registry_err(context, "input shape must be [height, width, 3]"));
            };
            if h < 1 || w < 1 || depth != 3 {
                return Err(registry_err(context, "input shape must be [height, width, 3]"));
            }
            let mean = triple(context, "mean", raw.mean)?;
            let std = triple(context, "std", raw.std)?;
            if std.contains(&0.0) {
                return Err(registry_err(context, "std components must be nonzero"));
            }
            Ok(InputContract::Visual {
                shape: (h as usize, w as usize),
                mean,
                std,
            })
        }
        Modality::Audio => {
            require_absent(raw.shape.is_some(), "shape")?;
            require_absent(raw.mean.is_some(), "mean")?;
            require_absent(raw.std.is_some(), "std")?;
            require_absent(raw.vocab.is_some(), "vocab")?;
            let sample_rate = raw
                .sample_rate
                .ok_or_else(|| registry_err(context, "audio input requires 'sample_rate'"))?;
            if sample_rate == 0 {
                return Err(registry_err(context, "sample_rate must be >= 1"));
            }
            Ok(InputContract::Audio { sample_rate })
        }
        Modality::Textual => {
            require_absent(raw.shape.is_some(), "shape")?;
            require_absent(raw.mean.is_some(), "mean")?;
            require_absent(raw.std.is_some(), "std")?;
            require_absent(raw.sample_rate.is_some(), "sample_rate")?;
            let vocab = raw
                .vocab
                .ok_or_else(|| registry_err(context, "textual input requires 'vocab'"))?;
            if vocab.get("<unk>") != Some(&0) {
                return Err(registry_err(context, "vocab must map '<unk>' to id 0"));
            }
            Ok(InputContract::Textual { vocab })
        }
    }
}

fn triple(context: &str, field: &str, raw: Option<Vec<f64>>) -> Result<[f32; 3], ModelError> {
    let values =
        raw.ok_or_else(|| registry_err(context, format!("visual input requires '{field}'")))?;
    let [a, b, c] = values[..] else {
        return Err(registry_err(
            context,
            format!("'{field}' must have exactly 3 components"),
        ));
    };
    Ok([a as f32, b as f32, c as f32])
}

fn convert_layers(
    context: &str,
    modality: Modality,
    raw: Vec<RawLayer>,
) -> Result<Vec<Layer>, ModelError> {
    if raw.is_empty() {
        return Err(registry_err(context, "variant has no layers"));
    }
    let mut names = HashSet::new();
    let mut layers = Vec::with_capacity(raw.len());
    for raw_layer in raw {
        let name = raw_layer.name.clone();
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(registry_err(
                context,
                format!("layer name '{name}' must be non-empty and contain no path separators"),
            ));
        }
        if !names.insert(name.clone()) {
            return Err(registry_err(context, format!("duplicate layer name '{name}'")));
        }
        let lctx = format!("{context} layer '{name}'");
        layers.push(Layer {
            op: convert_op(&lctx, modality, raw_layer)?,
            name,
        });
    }
    Ok(layers)
}

fn convert_op(context: &str, modality: Modality, raw: RawLayer) -> Result<LayerOp, ModelError> {
    // Parameters not consumed by the kind are mistakes, not extras.
    let forbid = |present: bool, field: &str, kind: &str| {
        if present {
            Err(registry_err(
                context,
                format!("parameter '{field}' does not apply to kind '{kind}'"),
            ))
        } else {
            Ok(())
        }
    };
    let none_of = |raw: &RawLayer, kind: &str, but: &[&str]| -> Result<(), ModelError> {
        if !but.contains(&"weights") {
            forbid(raw.weights.is_some(), "weights", kind)?;
        }
        if !but.contains(&"bias") {
            forbid(raw.bias.is_some(), "bias", kind)?;
        }
        if !but.contains(&"table") {
            forbid(raw.table.is_some(), "table", kind)?;
        }
        if !but.contains(&"frame") {
            forbid(raw.frame.is_some(), "frame", kind)?;
        }
        if !but.contains(&"hop") {
            forbid(raw.hop.is_some(), "hop", kind)?;
        }
        Ok(())
    };
    match raw.kind.as_str() {
        "flatten" => {
            none_of(&raw, "flatten", &[])?;
            Ok(LayerOp::Flatten)
        }
        "relu" => {
            none_of(&raw, "relu", &[])?;
            Ok(LayerOp::Relu)
        }
        "tanh" => {
            none_of(&raw, "tanh", &[])?;
            Ok(LayerOp::Tanh)
        }
        "mean_pool" => {
            none_of(&raw, "mean_pool", &[])?;
            Ok(LayerOp::MeanPool)
        }
        "l2_normalize" => {
            none_of(&raw, "l2_normalize", &[])?;
            Ok(LayerOp::L2Normalize)
        }
        "linear" => {
            none_of(&raw, "linear", &["weights", "bias"])?;
            let weights = raw
                .weights
                .ok_or_else(|| registry_err(context, "linear requires 'weights'"))?;
            let bias = raw
                .bias
                .ok_or_else(|| registry_err(context, "linear requires 'bias'"))?;
            rectangular(context, "weights", &weights)?;
            if bias.len() != weights.len() {
                return Err(registry_err(
                    context,
                    format!(
                        "bias length {} does not match {} weight rows",
                        bias.len(),
                        weights.len()
                    ),
                ));
            }
            Ok(LayerOp::Linear {
                weights: weights
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v as f32).collect())
                    .collect(),
                bias: bias.into_iter().map(|v| v as f32).collect(),
            })
        }
        "embedding" => {
            none_of(&raw, "embedding", &["table"])?;
            let table = raw
                .table
                .ok_or_else(|| registry_err(context, "embedding requires 'table'"))?;
            if modality != Modality::Textual {
                return Err(registry_err(
                    context,
                    "embedding layers require a textual model",
                ));
            }
            rectangular(context, "table", &table)?;
            Ok(LayerOp::Embedding {
                table: table
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v as f32).collect())
                    .collect(),
            })
        }
        "frame_rms" => {
            none_of(&raw, "frame_rms", &["frame", "hop"])?;
            let frame = raw
                .frame
                .ok_or_else(|| registry_err(context, "frame_rms requires 'frame'"))?;
            let hop = raw
                .hop
                .ok_or_else(|| registry_err(context, "frame_rms requires 'hop'"))?;
            if frame < 1 || hop < 1 {
                return Err(registry_err(context, "frame and hop must be >= 1"));
            }
            Ok(LayerOp::FrameRms { frame, hop })
        }
        other => Err(registry_err(context, format!("unknown layer kind '{other}'"))),
    }
}

fn rectangular(context: &str, field: &str, rows: &[Vec<f64>]) -> Result<usize, ModelError> {
    let first = rows
        .first()
        .ok_or_else(|| registry_err(context, format!("'{field}' must not be empty")))?;
    if first.is_empty() {
        return Err(registry_err(context, format!("'{field}' rows must not be empty")));
    }
    for row in rows {
        if row.len() != first.len() {
            return Err(registry_err(context, format!("'{field}' must be rectangular")));
        }
    }
    Ok(first.len())
}

/// Chain-level invariants that need the input contract: textual chains
/// start with their embedding (and only the first layer is one), and
/// embedding tables cover every vocab id.
fn validate_chain(
    context: &str,
    modality: Modality,
    input: &InputContract,
    layers: &[Layer],
) -> Result<(), ModelError> {
    for (i, layer) in layers.iter().enumerate() {
        let is_embedding = matches!(layer.op, LayerOp::Embedding { .. });
        if modality == Modality::Textual && i == 0 && !is_embedding {
            return Err(registry_err(
                context,
                "textual chains must start with an embedding layer",
            ));
        }
        if is_embedding && i != 0 {
            return Err(registry_err(
                context,
                format!("embedding layer '{}' must come first", layer.name),
            ));
        }
        if let (LayerOp::Embedding { table }, InputContract::Textual { vocab }) =
            (&layer.op, input)
        {
            let max_id = vocab.values().max().copied().unwrap_or(0) as usize;
            if table.len() < max_id + 1 {
                return Err(registry_err(
                    context,
                    format!(
                        "embedding table has {} rows but the vocab needs {}",
                        table.len(),
                        max_id + 1
                    ),
                ));
            }
        }
    }
    Ok(())
}
