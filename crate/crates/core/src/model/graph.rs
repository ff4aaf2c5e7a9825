//! Model graph construction and execution.
//!
//! `build_model` resolves a plan's [`ModelSpec`] against the registry and
//! type-checks the layer chain symbolically before any sample is read:
//! dimensions are Known or Dynamic, known/known mismatches fail at build
//! time, dynamic ones surface at runtime inside the kernels.

use std::collections::HashMap;

use crate::config::{ModelSpec, Modality};
use crate::dataset::SamplePayload;
use crate::error::ModelError;
use crate::model::layer::{Layer, LayerOp};
use crate::model::registry::{InputContract, ModelEntry, ModelRegistry};

/// A runnable, type-checked chain bound to its registry entry.
#[derive(Clone, Debug)]
pub struct ModelGraph<'r> {
    pub name: String,
    pub backend: String,
    /// Resolved variant name (after the default fallback).
    pub variant: String,
    pub entry: &'r ModelEntry,
    pub layers: &'r [Layer],
    pub output_layers: Vec<String>,
    /// Effective visual input dims: the plan's reshape or the registry
    /// default. None for other modalities.
    pub input_dims: Option<(usize, usize)>,
    /// Textual only: clean the text before tokenization.
    pub clear_text: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dim {
    Known(usize),
    Dynamic,
}

/// Symbolic value flowing through the chain during type checking.
#[derive(Clone, Debug, PartialEq, Eq)]
enum SymShape {
    /// Token ids, before the embedding.
    Tokens,
    Rank1(Dim),
    Rank2(Dim, Dim),
    Rank3(Dim, Dim, Dim),
}

impl SymShape {
    fn describe(&self) -> String {
        match self {
            SymShape::Tokens => "token ids".into(),
            SymShape::Rank1(_) => "rank-1 tensor".into(),
            SymShape::Rank2(..) => "rank-2 tensor".into(),
            SymShape::Rank3(..) => "rank-3 tensor".into(),
        }
    }
}

/// Resolves `spec` against the registry and type-checks the chain.
pub fn build_model<'r>(
    spec: &ModelSpec,
    modality: Modality,
    registry: &'r ModelRegistry,
) -> Result<ModelGraph<'r>, ModelError> {
    let entry = registry.get(&spec.name).ok_or_else(|| ModelError::UnknownModel {
        name: spec.name.clone(),
        available: registry.available(),
    })?;
    if entry.modality != modality {
        return Err(ModelError::ModalityMismatch {
            model: spec.name.clone(),
            actual: entry.modality.to_string(),
            requested: modality.to_string(),
        });
    }

    // Unknown task names fall back to the default variant.
    let variant = match &spec.task {
        Some(task) if entry.variants.contains_key(task) => task.clone(),
        _ => "default".to_string(),
    };
    let layers = entry.variants[&variant].as_slice();

    for wanted in &spec.output_layers {
        if !layers.iter().any(|l| &l.name == wanted) {
            return Err(ModelError::UnknownLayer {
                model: spec.name.clone(),
                variant: variant.clone(),
                layer: wanted.clone(),
                available: layers.iter().map(|l| l.name.clone()).collect(),
            });
        }
    }

    let input_dims = match &entry.input {
        InputContract::Visual { shape, .. } => Some(spec.reshape.unwrap_or(*shape)),
        _ => None,
    };
    let start = match &entry.input {
        InputContract::Visual { .. } => {
            let (h, w) = input_dims.expect("visual dims resolved above");
            SymShape::Rank3(Dim::Known(h), Dim::Known(w), Dim::Known(3))
        }
        InputContract::Audio { .. } => SymShape::Rank1(Dim::Dynamic),
        InputContract::Textual { .. } => SymShape::Tokens,
    };
    check_chain(layers, start)?;

    Ok(ModelGraph {
        name: spec.name.clone(),
        backend: spec.backend.clone(),
        variant,
        entry,
        layers,
        output_layers: spec.output_layers.clone(),
        input_dims,
        clear_text: spec.clear_text,
    })
}

fn check_chain(layers: &[Layer], mut shape: SymShape) -> Result<(), ModelError> {
    for layer in layers {
        shape = step(layer, shape)?;
    }
    Ok(())
}

fn step(layer: &Layer, shape: SymShape) -> Result<SymShape, ModelError> {
    let bad = |message: String| ModelError::BadChain {
        layer: layer.name.clone(),
        message,
    };
    if matches!(shape, SymShape::Tokens) {
        return match &layer.op {
            LayerOp::Embedding { table } => {
                Ok(SymShape::Rank2(Dim::Dynamic, Dim::Known(table[0].len())))
            }
            _ => Err(bad("textual chains must start with an embedding layer".into())),
        };
    }
    match &layer.op {
        LayerOp::Embedding { .. } => {
            Err(bad("embedding must be the first layer of a textual chain".into()))
        }
        LayerOp::Flatten => {
            let total = match shape {
                SymShape::Rank1(d) => d,
                SymShape::Rank2(a, b) => mul(a, b),
                SymShape::Rank3(a, b, c) => mul(mul(a, b), c),
                SymShape::Tokens => unreachable!("handled above"),
            };
            Ok(SymShape::Rank1(total))
        }
        LayerOp::Linear { weights, .. } => {
            let in_dim = weights[0].len();
            match shape {
                SymShape::Rank1(Dim::Known(d)) if d != in_dim => Err(ModelError::DimMismatch {
                    layer: layer.name.clone(),
                    expected: in_dim,
                    got: d,
                }),
                SymShape::Rank1(_) => Ok(SymShape::Rank1(Dim::Known(weights.len()))),
                other => Err(bad(format!(
                    "linear requires a rank-1 input, got {}",
                    other.describe()
                ))),
            }
        }
        LayerOp::Relu | LayerOp::Tanh | LayerOp::L2Normalize => Ok(shape),
        LayerOp::MeanPool => match shape {
            SymShape::Rank2(_, d) => Ok(SymShape::Rank1(d)),
            other => Err(bad(format!(
                "mean_pool requires a rank-2 input, got {}",
                other.describe()
            ))),
        },
        LayerOp::FrameRms { frame, hop } => match shape {
            SymShape::Rank1(Dim::Known(n)) => {
                let frames = if n >= *frame { (n - frame) / hop + 1 } else { 0 };
                Ok(SymShape::Rank1(Dim::Known(frames)))
            }
            SymShape::Rank1(Dim::Dynamic) => Ok(SymShape::Rank1(Dim::Dynamic)),
            other => Err(bad(format!(
                "frame_rms requires a rank-1 input, got {}",
                other.describe()
            ))),
        },
    }
}

fn mul(a: Dim, b: Dim) -> Dim {
    match (a, b) {
        (Dim::Known(x), Dim::Known(y)) => Dim::Known(x * y),
        _ => Dim::Dynamic,
    }
}

/// Runs every layer over one payload, returning each intermediate by
/// layer name. Non-finite outputs are rejected.
pub fn forward(
    graph: &ModelGraph<'_>,
    payload: &SamplePayload,
) -> Result<HashMap<String, crate::tensor::Tensor>, ModelError> {
    let mut outputs = HashMap::with_capacity(graph.layers.len());
    let mut current;
    let mut layers = graph.layers.iter();
    match payload {
        SamplePayload::Tokens(ids) => {
            let embed = layers.next().expect("validated chains are non-empty");
            current = embed.gather(ids)?;
            check_finite(&embed.name, &current)?;
            outputs.insert(embed.name.clone(), current.clone());
        }
        SamplePayload::Visual(t) | SamplePayload::Audio(t) => {
            current = t.clone();
        }
    }
    for layer in layers {
        current = layer.apply(&current)?;
        check_finite(&layer.name, &current)?;
        outputs.insert(layer.name.clone(), current.clone());
    }
    Ok(outputs)
}

/// Forward pass filtered down to the requested output layers, in
/// declaration order.
pub fn extract_features(
    graph: &ModelGraph<'_>,
    payload: &SamplePayload,
) -> Result<Vec<(String, crate::tensor::Tensor)>, ModelError> {
    let mut all = forward(graph, payload)?;
    Ok(graph
        .output_layers
        .iter()
        .map(|name| {
            let tensor = all.remove(name).expect("output layers verified at build");
            (name.clone(), tensor)
        })
        .collect())
}

fn check_finite(layer: &str, tensor: &crate::tensor::Tensor) -> Result<(), ModelError> {
    if tensor.data().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite {
            layer: layer.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::registry::ModelRegistry;
    use crate::tensor::Tensor;

    fn spec(name: &str, layers: &[&str]) -> ModelSpec {
        ModelSpec {
            name: name.into(),
            backend: "default".into(),
            output_layers: layers.iter().map(|s| s.to_string()).collect(),
            reshape: None,
            clear_text: false,
            task: None,
        }
    }

    fn registry() -> ModelRegistry {
        ModelRegistry::from_json(
            r#"{"models": {
                "vis": {
                    "modality": "visual",
                    "input": {"shape": [2, 2, 3], "mean": [0.0, 0.0, 0.0], "std": [1.0, 1.0, 1.0]},
                    "variants": {"default": {"layers": [
                        {"name": "flat", "kind": "flatten"},
                        {"name": "fc", "kind": "linear",
                         "weights": [[1,0,0,0,0,0,0,0,0,0,0,0],[0,0,0,0,0,0,0,0,0,0,0,1]],
                         "bias": [0.0, -1.0]},
                        {"name": "act", "kind": "relu"}
                    ]}}
                },
                "txt": {
                    "modality": "textual",
                    "input": {"vocab": {"<unk>": 0, "red": 1, "hat": 2}},
                    "variants": {
                        "default": {"layers": [
                            {"name": "embed", "kind": "embedding", "table": [[0,0],[1,2],[3,4]]},
                            {"name": "pool", "kind": "mean_pool"},
                            {"name": "norm", "kind": "l2_normalize"}
                        ]},
                        "sentiment": {"layers": [
                            {"name": "embed", "kind": "embedding", "table": [[0,0],[1,2],[3,4]]},
                            {"name": "pool", "kind": "mean_pool"},
                            {"name": "senti", "kind": "linear", "weights": [[1,1]], "bias": [0]},
                            {"name": "squash", "kind": "tanh"}
                        ]}
                    }
                },
                "aud": {
                    "modality": "audio",
                    "input": {"sample_rate": 8000},
                    "variants": {"default": {"layers": [
                        {"name": "frames", "kind": "frame_rms", "frame": 2, "hop": 2},
                        {"name": "fc", "kind": "linear", "weights": [[1.0, 1.0]], "bias": [0.0]}
                    ]}}
                }
            }}"#,
        )
        .unwrap()
    }

    #[test]
    fn unknown_model_lists_available_sorted() {
        let registry = registry();
        match build_model(&spec("nope", &["x"]), Modality::Visual, &registry) {
            Err(ModelError::UnknownModel { available, .. }) => {
                assert_eq!(available, ["aud", "txt", "vis"]);
            }
            other => panic!("expected unknown model, got {other:?}"),
        }
    }

    #[test]
    fn modality_mismatch_is_rejected() {
        let registry = registry();
        assert!(matches!(
            build_model(&spec("vis", &["act"]), Modality::Audio, &registry),
            Err(ModelError::ModalityMismatch { .. })
        ));
    }

    #[test]
    fn unknown_output_layer_lists_chain() {
        let registry = registry();
        match build_model(&spec("vis", &["fc9"]), Modality::Visual, &registry) {
            Err(ModelError::UnknownLayer { layer, available, variant, .. }) => {
                assert_eq!(layer, "fc9");
                assert_eq!(variant, "default");
                assert_eq!(available, ["flat", "fc", "act"]);
            }
            other => panic!("expected unknown layer, got {other:?}"),
        }
    }

    #[test]
    fn task_selects_variant_with_default_fallback() {
        let registry = registry();
        let mut s = spec("txt", &["norm"]);
        s.task = Some("ner".into());
        let graph = build_model(&s, Modality::Textual, &registry).unwrap();
        assert_eq!(graph.variant, "default");

        let mut s = spec("txt", &["squash"]);
        s.task = Some("sentiment".into());
        let graph = build_model(&s, Modality::Textual, &registry).unwrap();
        assert_eq!(graph.variant, "sentiment");

        // Output layers resolve against the selected variant.
        let mut s = spec("txt", &["squash"]);
        s.task = Some("ner".into());
        assert!(matches!(
            build_model(&s, Modality::Textual, &registry),
            Err(ModelError::UnknownLayer { .. })
        ));
    }

    #[test]
    fn reshape_mismatch_fails_at_build_time_naming_both_dims() {
        let registry = registry();
        let mut s = spec("vis", &["act"]);
        s.reshape = Some((3, 3));
        match build_model(&s, Modality::Visual, &registry) {
            Err(ModelError::DimMismatch { layer, expected, got }) => {
                assert_eq!(layer, "fc");
                assert_eq!(expected, 12);
                assert_eq!(got, 27);
            }
            other => panic!("expected dim mismatch, got {other:?}"),
        }
    }

    #[test]
    fn audio_dynamic_dims_pass_build_and_fail_at_runtime() {
        let registry = registry();
        // freq-domain length is unknown at build: fc expects 2 values.
        let graph = build_model(&spec("aud", &["fc"]), Modality::Audio, &registry).unwrap();
        // 6 samples -> 3 frames -> linear expects 2.
        let err = forward(&graph, &SamplePayload::Audio(Tensor::from_vec(vec![0.1; 6])))
            .unwrap_err();
        assert!(matches!(err, ModelError::DimMismatch { expected: 2, got: 3, .. }));
        // 4 samples -> 2 frames -> fine.
        assert!(forward(&graph, &SamplePayload::Audio(Tensor::from_vec(vec![0.1; 4]))).is_ok());
    }

    #[test]
    fn forward_returns_every_layer_output() {
        let registry = registry();
        let graph = build_model(&spec("vis", &["act"]), Modality::Visual, &registry).unwrap();
        // Quarters are exact in f32, so expectations compare bitwise.
        let img = Tensor::new(vec![2, 2, 3], (0..12).map(|v| v as f32 / 4.0).collect());
        let outputs = forward(&graph, &SamplePayload::Visual(img)).unwrap();
        assert_eq!(outputs.len(), 3);
        assert_eq!(outputs["flat"].shape(), &[12]);
        assert_eq!(outputs["fc"].data(), &[0.0, 1.75]);
        assert_eq!(outputs["act"].data(), &[0.0, 1.75]);
    }

    #[test]
    fn extract_features_keeps_declaration_order_and_preactivations() {
        let registry = registry();
        let graph = build_model(&spec("vis", &["act", "fc"]), Modality::Visual, &registry).unwrap();
        let img = Tensor::new(vec![2, 2, 3], vec![-10.0; 12]);
        let feats = extract_features(&graph, &SamplePayload::Visual(img)).unwrap();
        assert_eq!(feats[0].0, "act");
        assert_eq!(feats[1].0, "fc");
        // Pre-activation value is negative; relu clamps its copy.
        assert_eq!(feats[1].1.data(), &[-10.0, -11.0]);
        assert_eq!(feats[0].1.data(), &[0.0, 0.0]);
    }

    #[test]
    fn textual_forward_gathers_then_pools() {
        let registry = registry();
        let graph = build_model(&spec("txt", &["norm"]), Modality::Textual, &registry).unwrap();
        let feats = extract_features(&graph, &SamplePayload::Tokens(vec![1, 2])).unwrap();
        // embed rows: [1,2] and [3,4]; pool -> [2, 3]; norm -> unit.
        let norm = (4.0f64 + 9.0).sqrt();
        let got = feats[0].1.data();
        assert!((got[0] as f64 - 2.0 / norm).abs() < 1e-6);
        assert!((got[1] as f64 - 3.0 / norm).abs() < 1e-6);
    }

    #[test]
    fn non_finite_output_is_a_model_error() {
        let registry = ModelRegistry::from_json(
            r#"{"models": {"hot": {
                "modality": "audio",
                "input": {"sample_rate": 8000},
                "variants": {"default": {"layers": [
                    {"name": "fc", "kind": "linear", "weights": [[3e38, 3e38]], "bias": [0.0]}
                ]}}
            }}}"#,
        )
        .unwrap();
        let graph = build_model(&spec("hot", &["fc"]), Modality::Audio, &registry).unwrap();
        let err = forward(&graph, &SamplePayload::Audio(Tensor::from_vec(vec![1.0, 1.0])))
            .unwrap_err();
        assert!(matches!(err, ModelError::NonFinite { layer } if layer == "fc"));
    }

    #[test]
    fn build_rejects_rank_conflicts() {
        let registry = ModelRegistry::from_json(
            r#"{"models": {"bad": {
                "modality": "visual",
                "input": {"shape": [2, 2, 3], "mean": [0,0,0], "std": [1,1,1]},
                "variants": {"default": {"layers": [
                    {"name": "fc", "kind": "linear", "weights": [[1.0]], "bias": [0.0]}
                ]}}
            }}}"#,
        )
        .unwrap();
        // Linear directly on a rank-3 input: structural, caught at build.
        match build_model(&spec("bad", &["fc"]), Modality::Visual, &registry) {
            Err(ModelError::BadChain { layer, message }) => {
                assert_eq!(layer, "fc");
                assert!(message.contains("rank-1"));
            }
            other => panic!("expected bad chain, got {other:?}"),
        }
    }

    #[test]
    fn frame_rms_known_length_propagates() {
        // Visual input flattened to 12, framed to 6, then linear 6 -> ok.
        let registry = ModelRegistry::from_json(
            r#"{"models": {"v": {
                "modality": "visual",
                "input": {"shape": [2, 2, 3], "mean": [0,0,0], "std": [1,1,1]},
                "variants": {"default": {"layers": [
                    {"name": "flat", "kind": "flatten"},
                    {"name": "fr", "kind": "frame_rms", "frame": 2, "hop": 2},
                    {"name": "fc", "kind": "linear", "weights": [[1,1,1,1,1,1]], "bias": [0]}
                ]}}
            }}}"#,
        )
        .unwrap();
        assert!(build_model(&spec("v", &["fc"]), Modality::Visual, &registry).is_ok());
        let mut s = spec("v", &["fc"]);
        s.reshape = Some((2, 3)); // 18 values -> 9 frames -> mismatch vs 6
        assert!(matches!(
            build_model(&s, Modality::Visual, &registry),
            Err(ModelError::DimMismatch { expected: 6, got: 9, .. })
        ));
    }
}
