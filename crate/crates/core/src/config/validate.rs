//! Schema validation: raw [`ConfigNode`] tree to [`ExtractionPlan`].
//!
//! Cleaning is deliberately narrow: keys are matched after trim plus
//! ascii lowercase, scalar strings coerce to declared integer/boolean
//! types, and a single model mapping coerces to a one-element list.
//! Nothing else is repaired. Unknown or non-applicable keys produce
//! warnings; structural problems are hard errors.

use std::collections::HashSet;

use indexmap::IndexMap;

use crate::config::node::ConfigNode;
use crate::config::plan::{ColumnSpec, ExtractionJob, ExtractionPlan, ModelSpec, Modality, Source};
use crate::error::ConfigError;

/// A validated plan plus the non-fatal warnings produced on the way.
#[derive(Clone, Debug)]
pub struct Validation {
    pub plan: ExtractionPlan,
    pub warnings: Vec<String>,
}

pub fn validate_config(root: &ConfigNode) -> Result<Validation, ConfigError> {
    Validator::default().run(root)
}

fn clean(key: &str) -> String {
    key.trim().to_ascii_lowercase()
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Finds the child whose cleaned key equals `want`. Two keys cleaning to
/// the same recognized name is a hard error.
fn cleaned_lookup<'a>(
    map: &'a IndexMap<String, ConfigNode>,
    want: &str,
    path: &str,
) -> Result<Option<&'a ConfigNode>, ConfigError> {
    let mut found = None;
    for (k, v) in map {
        if clean(k) == want {
            if found.is_some() {
                return Err(ConfigError::DuplicateKey {
                    path: if path.is_empty() { "<root>".into() } else { path.into() },
                    key: want.to_string(),
                });
            }
            found = Some(v);
        }
    }
    Ok(found)
}

#[derive(Default)]
struct Validator {
    warnings: Vec<String>,
}

impl Validator {
    fn run(mut self, root: &ConfigNode) -> Result<Validation, ConfigError> {
        let map = root.as_map().ok_or(ConfigError::NonMappingRoot)?;
        const TOP: &[&str] = &[
            "dataset_path",
            "gpu_list",
            "model_registry",
            "visual",
            "textual",
            "audio",
        ];
        self.warn_unknown(map, TOP, "");

        let dataset_path = self.require_str(map, "", "dataset_path")?;
        let gpu_list = cleaned_lookup(map, "gpu_list", "")?.ok_or(ConfigError::MissingKey {
            key: "gpu_list".into(),
        })?;
        let workers = self.workers_from_gpu_list(gpu_list)?;
        let registry_path = self
            .optional_str(map, "", "model_registry")?
            .unwrap_or_else(|| "registry.json".to_string());

        let mut jobs = Vec::new();
        let mut seen = HashSet::new();
        // Document order decides job order; sources nest inside their
        // modality section so all jobs of a modality stay contiguous.
        for (key, value) in map {
            let Some(modality) = Modality::parse(&clean(key)) else {
                continue;
            };
            if !seen.insert(modality) {
                return Err(ConfigError::DuplicateKey {
                    path: "<root>".into(),
                    key: modality.key().to_string(),
                });
            }
            self.section(modality, value, &mut jobs)?;
        }

        Ok(Validation {
            plan: ExtractionPlan {
                dataset_path: dataset_path.into(),
                workers,
                registry_path: registry_path.into(),
                skip_errors: false,
                log_dir: "logs".into(),
                jobs,
            },
            warnings: self.warnings,
        })
    }

    /// gpu_list fixes the worker count: -1 (scalar or single-element
    /// list) means one cpu worker, a list of n non-negative device ids
    /// means n workers. Everything else is an error.
    fn workers_from_gpu_list(&mut self, node: &ConfigNode) -> Result<usize, ConfigError> {
        match node {
            ConfigNode::Seq(items) => {
                if items.is_empty() {
                    return Err(invalid("gpu_list", "device list must not be empty"));
                }
                let mut ids = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    ids.push(self.want_int(item, &format!("gpu_list[{i}]"))?);
                }
                if ids == [-1] {
                    return Ok(1);
                }
                if ids.iter().all(|&v| v >= 0) {
                    return Ok(ids.len());
                }
                Err(invalid(
                    "gpu_list",
                    "device ids must all be non-negative, or the list must be exactly [-1]",
                ))
            }
            scalar => {
                let v = self.want_int(scalar, "gpu_list")?;
                if v == -1 {
                    Ok(1)
                } else {
                    Err(invalid(
                        "gpu_list",
                        format!("scalar gpu_list must be -1 (cpu), found {v}"),
                    ))
                }
            }
        }
    }

    fn section(
        &mut self,
        modality: Modality,
        node: &ConfigNode,
        jobs: &mut Vec<ExtractionJob>,
    ) -> Result<(), ConfigError> {
        let path = modality.key();
        let map = node.as_map().ok_or_else(|| {
            invalid(
                path,
                format!("modality section must be a mapping, found {}", node.type_name()),
            )
        })?;
        self.warn_unknown(map, &["items", "interactions"], path);
        let mut seen = HashSet::new();
        let mut any = false;
        for (key, value) in map {
            let source = match clean(key).as_str() {
                "items" => Source::Items,
                "interactions" => Source::Interactions,
                _ => continue,
            };
            if !seen.insert(source) {
                return Err(ConfigError::DuplicateSection {
                    modality: modality.key().to_string(),
                    section: source.key().to_string(),
                });
            }
            any = true;
            jobs.push(self.job(modality, source, value)?);
        }
        if !any {
            return Err(invalid(
                path,
                "modality section declares neither items nor interactions",
            ));
        }
        Ok(())
    }

    fn job(
        &mut self,
        modality: Modality,
        source: Source,
        node: &ConfigNode,
    ) -> Result<ExtractionJob, ConfigError> {
        let path = format!("{}.{}", modality.key(), source.key());
        if source == Source::Interactions && modality != Modality::Textual {
            return Err(invalid(
                &path,
                "interactions are only supported for textual extraction",
            ));
        }
        let map = node.as_map().ok_or_else(|| {
            invalid(
                &path,
                format!("source section must be a mapping, found {}", node.type_name()),
            )
        })?;
        const KNOWN: &[&str] = &[
            "input_folder",
            "output_folder",
            "model",
            "item_column",
            "user_column",
            "text_column",
        ];
        self.warn_unknown(map, KNOWN, &path);

        let input_folder = self.require_str(map, &path, "input_folder")?;
        let output_folder = self.require_str(map, &path, "output_folder")?;

        let columns = if modality == Modality::Textual {
            self.columns(map, source, &path)?
        } else {
            for key in ["item_column", "user_column", "text_column"] {
                if cleaned_lookup(map, key, &path)?.is_some() {
                    self.warnings.push(format!(
                        "key '{key}' does not apply to {path} (ignored)"
                    ));
                }
            }
            None
        };

        let model_node = cleaned_lookup(map, "model", &path)?.ok_or(ConfigError::MissingKey {
            key: join(&path, "model"),
        })?;
        let model_path = join(&path, "model");
        let entries: Vec<&ConfigNode> = match model_node {
            // A single mapping stands for a one-element list.
            ConfigNode::Map(_) => vec![model_node],
            ConfigNode::Seq(items) if items.is_empty() => {
                return Err(invalid(&model_path, "model list must not be empty"))
            }
            ConfigNode::Seq(items) => items.iter().collect(),
            other => {
                return Err(invalid(
                    &model_path,
                    format!(
                        "model must be a mapping or a list of mappings, found {}",
                        other.type_name()
                    ),
                ))
            }
        };
        let mut models = Vec::with_capacity(entries.len());
        for (i, entry) in entries.iter().enumerate() {
            models.push(self.model(modality, entry, &format!("{model_path}[{i}]"))?);
        }

        Ok(ExtractionJob {
            modality,
            source,
            input_folder,
            output_folder,
            columns,
            models,
        })
    }

    /// Column names are all-or-nothing per source; user_column never
    /// applies to items.
    fn columns(
        &mut self,
        map: &IndexMap<String, ConfigNode>,
        source: Source,
        path: &str,
    ) -> Result<Option<ColumnSpec>, ConfigError> {
        let item = self.optional_str(map, path, "item_column")?;
        let user = self.optional_str(map, path, "user_column")?;
        let text = self.optional_str(map, path, "text_column")?;
        let missing = |key: &str| ConfigError::MissingKey {
            key: join(path, key),
        };
        match source {
            Source::Items => {
                if user.is_some() {
                    self.warnings.push(format!(
                        "key 'user_column' does not apply to {path} (ignored)"
                    ));
                }
                match (item, text) {
                    (None, None) => Ok(None),
                    (Some(item), Some(text)) => Ok(Some(ColumnSpec::Items { item, text })),
                    (Some(_), None) => Err(missing("text_column")),
                    (None, Some(_)) => Err(missing("item_column")),
                }
            }
            Source::Interactions => match (user, item, text) {
                (None, None, None) => Ok(None),
                (Some(user), Some(item), Some(text)) => {
                    Ok(Some(ColumnSpec::Interactions { user, item, text }))
                }
                (None, _, _) => Err(missing("user_column")),
                (_, None, _) => Err(missing("item_column")),
                (_, _, None) => Err(missing("text_column")),
            },
        }
    }

    fn model(
        &mut self,
        modality: Modality,
        node: &ConfigNode,
        path: &str,
    ) -> Result<ModelSpec, ConfigError> {
        let map = node.as_map().ok_or_else(|| {
            invalid(
                path,
                format!("model entry must be a mapping, found {}", node.type_name()),
            )
        })?;
        const KNOWN: &[&str] = &[
            "name",
            "backend",
            "output_layers",
            "reshape",
            "clear_text",
            "task",
        ];
        self.warn_unknown(map, KNOWN, path);

        let name = self.require_str(map, path, "name")?;
        let backend = self
            .optional_str(map, path, "backend")?
            .unwrap_or_else(|| "default".to_string());
        // Backend is a single folder in the output cascade.
        if backend.is_empty() || backend.contains(['/', '\\']) {
            return Err(invalid(
                join(path, "backend"),
                "backend must be a non-empty name without path separators",
            ));
        }

        let layers_node =
            cleaned_lookup(map, "output_layers", path)?.ok_or(ConfigError::MissingKey {
                key: join(path, "output_layers"),
            })?;
        let layers_path = join(path, "output_layers");
        let output_layers = match layers_node {
            ConfigNode::Seq(items) if items.is_empty() => {
                return Err(invalid(&layers_path, "output_layers must not be empty"))
            }
            ConfigNode::Seq(items) => {
                let mut layers = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match item {
                        ConfigNode::Str(s) => layers.push(s.clone()),
                        other => {
                            return Err(invalid(
                                format!("{layers_path}[{i}]"),
                                format!("expected a layer name, found {}", other.type_name()),
                            ))
                        }
                    }
                }
                let mut dedup = HashSet::new();
                for layer in &layers {
                    if !dedup.insert(layer.as_str()) {
                        return Err(invalid(
                            &layers_path,
                            format!("duplicate output layer '{layer}'"),
                        ));
                    }
                }
                layers
            }
            other => {
                return Err(invalid(
                    &layers_path,
                    format!("expected a list of layer names, found {}", other.type_name()),
                ))
            }
        };

        let reshape = match cleaned_lookup(map, "reshape", path)? {
            None => None,
            Some(_) if modality != Modality::Visual => {
                self.warnings.push(format!(
                    "key 'reshape' does not apply to {} models (ignored)",
                    modality.key()
                ));
                None
            }
            Some(node) => Some(self.reshape(node, &join(path, "reshape"))?),
        };

        let clear_text = match cleaned_lookup(map, "clear_text", path)? {
            None => false,
            Some(_) if modality != Modality::Textual => {
                self.warnings.push(format!(
                    "key 'clear_text' does not apply to {} models (ignored)",
                    modality.key()
                ));
                false
            }
            Some(node) => self.want_bool(node, &join(path, "clear_text"))?,
        };

        let task = match cleaned_lookup(map, "task", path)? {
            None => None,
            Some(_) if modality == Modality::Visual => {
                self.warnings
                    .push("key 'task' does not apply to visual models (ignored)".to_string());
                None
            }
            Some(node) => match node {
                ConfigNode::Str(s) => Some(s.clone()),
                other => {
                    return Err(invalid(
                        join(path, "task"),
                        format!("expected a string, found {}", other.type_name()),
                    ))
                }
            },
        };

        Ok(ModelSpec {
            name,
            backend,
            output_layers,
            reshape,
            clear_text,
            task,
        })
    }

    fn reshape(&mut self, node: &ConfigNode, path: &str) -> Result<(usize, usize), ConfigError> {
        let items = match node {
            ConfigNode::Seq(items) if items.len() == 2 => items,
            ConfigNode::Seq(items) => {
                return Err(invalid(
                    path,
                    format!("reshape needs exactly 2 values, found {}", items.len()),
                ))
            }
            other => {
                return Err(invalid(
                    path,
                    format!("expected [height, width], found {}", other.type_name()),
                ))
            }
        };
        let h = self.want_int(&items[0], &format!("{path}[0]"))?;
        let w = self.want_int(&items[1], &format!("{path}[1]"))?;
        if h < 1 || w < 1 {
            return Err(invalid(path, "reshape dims must be >= 1"));
        }
        Ok((h as usize, w as usize))
    }

    fn warn_unknown(
        &mut self,
        map: &IndexMap<String, ConfigNode>,
        known: &[&str],
        path: &str,
    ) {
        for key in map.keys() {
            if !known.contains(&clean(key).as_str()) {
                let place = if path.is_empty() {
                    "at the top level".to_string()
                } else {
                    format!("at {path}")
                };
                self.warnings
                    .push(format!("unknown key '{}' {place} (ignored)", key.trim()));
            }
        }
    }

    fn optional_str(
        &mut self,
        map: &IndexMap<String, ConfigNode>,
        path: &str,
        key: &str,
    ) -> Result<Option<String>, ConfigError> {
        match cleaned_lookup(map, key, path)? {
            None => Ok(None),
            Some(ConfigNode::Str(s)) => Ok(Some(s.clone())),
            Some(other) => Err(invalid(
                join(path, key),
                format!("expected a string, found {}", other.type_name()),
            )),
        }
    }

    fn require_str(
        &mut self,
        map: &IndexMap<String, ConfigNode>,
        path: &str,
        key: &str,
    ) -> Result<String, ConfigError> {
        self.optional_str(map, path, key)?
            .ok_or(ConfigError::MissingKey {
                key: join(path, key),
            })
    }

    fn want_int(&mut self, node: &ConfigNode, path: &str) -> Result<i64, ConfigError> {
        match node {
            ConfigNode::Int(v) => Ok(*v),
            ConfigNode::Str(s) => s.trim().parse().map_err(|_| {
                invalid(path, format!("expected an integer, found '{s}'"))
            }),
            other => Err(invalid(
                path,
                format!("expected an integer, found {}", other.type_name()),
            )),
        }
    }

    fn want_bool(&mut self, node: &ConfigNode, path: &str) -> Result<bool, ConfigError> {
        match node {
            ConfigNode::Bool(v) => Ok(*v),
            ConfigNode::Str(s) => {
                let t = s.trim();
                if t.eq_ignore_ascii_case("true") {
                    Ok(true)
                } else if t.eq_ignore_ascii_case("false") {
                    Ok(false)
                } else {
                    Err(invalid(path, format!("expected true or false, found '{s}'")))
                }
            }
            other => Err(invalid(
                path,
                format!("expected a boolean, found {}", other.type_name()),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::node::parse_yaml_config;

    const MINIMAL: &str = "\
dataset_path: ./data
gpu_list: -1
visual:
  items:
    input_folder: images
    output_folder: visual_embeddings
    model:
      name: toy_visual
      output_layers: [relu1]
";

    fn validate(text: &str) -> Result<Validation, ConfigError> {
        validate_config(&parse_yaml_config(text).unwrap())
    }

    #[test]
    fn minimal_visual_config_validates() {
        let v = validate(MINIMAL).unwrap();
        assert!(v.warnings.is_empty());
        let plan = v.plan;
        assert_eq!(plan.workers, 1);
        assert_eq!(plan.registry_path.to_str(), Some("registry.json"));
        assert!(!plan.skip_errors);
        assert_eq!(plan.log_dir.to_str(), Some("logs"));
        assert_eq!(plan.jobs.len(), 1);
        let job = &plan.jobs[0];
        assert_eq!(job.modality, Modality::Visual);
        assert_eq!(job.source, Source::Items);
        assert_eq!(job.input_folder, "images");
        assert_eq!(job.columns, None);
        // Single mapping coerced to a one-element model list.
        assert_eq!(job.models.len(), 1);
        assert_eq!(job.models[0].name, "toy_visual");
        assert_eq!(job.models[0].backend, "default");
        assert_eq!(job.models[0].output_layers, ["relu1"]);
        assert_eq!(job.models[0].reshape, None);
    }

    #[test]
    fn missing_dataset_path_and_gpu_list_are_errors() {
        let err = validate("gpu_list: -1\n").unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey { key } if key == "dataset_path"));
        let err = validate("dataset_path: d\n").unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey { key } if key == "gpu_list"));
    }

    #[test]
    fn gpu_list_worker_mapping() {
        let workers = |gpu: &str| {
            validate(&format!("dataset_path: d\ngpu_list: {gpu}\n")).map(|v| v.plan.workers)
        };
        assert_eq!(workers("-1").unwrap(), 1);
        assert_eq!(workers("[-1]").unwrap(), 1);
        assert_eq!(workers("\"-1\"").unwrap(), 1);
        assert_eq!(workers("[0]").unwrap(), 1);
        assert_eq!(workers("[0, 1, 2, 3]").unwrap(), 4);
        assert_eq!(workers("[\"2\", 5]").unwrap(), 2);
        assert!(matches!(workers("0"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(workers("[]"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(workers("[-1, 0]"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(workers("[0, -2]"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(workers("true"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(workers("cpu"), Err(ConfigError::InvalidValue { .. })));
    }

    #[test]
    fn key_cleaning_matches_trimmed_case_insensitive_keys() {
        let text = MINIMAL
            .replace("dataset_path:", "\"Dataset_Path \":")
            .replace("gpu_list:", "\" GPU_LIST\":");
        let v = validate(&text).unwrap();
        assert_eq!(v.plan.dataset_path.to_str(), Some("./data"));
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn values_are_not_case_cleaned() {
        let text = MINIMAL.replace("input_folder: images", "input_folder: Images");
        let v = validate(&text).unwrap();
        assert_eq!(v.plan.jobs[0].input_folder, "Images");
    }

    #[test]
    fn unknown_keys_warn_and_are_ignored() {
        let text = format!("{MINIMAL}extra_top: 1\n");
        let text = text.replace(
            "    model:",
            "    shuffle: true\n    model:",
        );
        let v = validate(&text).unwrap();
        assert_eq!(v.warnings.len(), 2);
        assert!(v.warnings.iter().any(|w| w.contains("'extra_top' at the top level")));
        assert!(v.warnings.iter().any(|w| w.contains("'shuffle' at visual.items")));
    }

    #[test]
    fn non_applicable_keys_warn_and_are_ignored() {
        let text = "\
dataset_path: d
gpu_list: -1
textual:
  items:
    input_folder: t.tsv
    output_folder: out
    model:
      name: m
      output_layers: [norm]
      reshape: [2, 2]
";
        let v = validate(text).unwrap();
        assert_eq!(v.plan.jobs[0].models[0].reshape, None);
        assert!(v.warnings.iter().any(|w| w.contains("'reshape' does not apply")));

        let text = "\
dataset_path: d
gpu_list: -1
visual:
  items:
    input_folder: i
    output_folder: o
    item_column: id
    model:
      name: m
      output_layers: [fc]
      clear_text: true
      task: foo
";
        let v = validate(text).unwrap();
        assert!(!v.plan.jobs[0].models[0].clear_text);
        assert_eq!(v.plan.jobs[0].models[0].task, None);
        assert_eq!(v.plan.jobs[0].columns, None);
        assert!(v.warnings.iter().any(|w| w.contains("'item_column' does not apply")));
        assert!(v.warnings.iter().any(|w| w.contains("'clear_text' does not apply")));
        assert!(v.warnings.iter().any(|w| w.contains("'task' does not apply")));
    }

    #[test]
    fn string_coercion_for_declared_types() {
        let full = "\
dataset_path: d
gpu_list: -1
visual:
  items:
    input_folder: i
    output_folder: o
    model:
      name: m
      output_layers: [fc]
      reshape: [\"8\", \"6\"]
textual:
  items:
    input_folder: t.tsv
    output_folder: ot
    model:
      name: tm
      output_layers: [norm]
      clear_text: \"True\"
";
        let v = validate(full).unwrap();
        assert_eq!(v.plan.jobs[0].models[0].reshape, Some((8, 6)));
        assert!(v.plan.jobs[1].models[0].clear_text);
    }

    #[test]
    fn coercion_rejects_non_parseable_strings() {
        let text = MINIMAL.replace("gpu_list: -1", "gpu_list: \"one\"");
        assert!(matches!(
            validate(&text),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn model_list_form_and_multiple_models() {
        let text = "\
dataset_path: d
gpu_list: -1
visual:
  items:
    input_folder: i
    output_folder: o
    model:
      - name: a
        backend: toy
        output_layers: [x, y]
      - name: b
        output_layers: [z]
";
        let v = validate(text).unwrap();
        assert_eq!(v.plan.jobs[0].models.len(), 2);
        assert_eq!(v.plan.jobs[0].models[0].backend, "toy");
        assert_eq!(v.plan.jobs[0].models[0].output_layers, ["x", "y"]);
    }

    #[test]
    fn model_errors() {
        let bad = |model_block: &str| {
            validate(&format!(
                "dataset_path: d\ngpu_list: -1\nvisual:\n  items:\n    input_folder: i\n    output_folder: o\n{model_block}"
            ))
        };
        assert!(matches!(
            bad("    model: []\n"),
            Err(ConfigError::InvalidValue { path, .. }) if path == "visual.items.model"
        ));
        assert!(matches!(
            bad("    model: vgg\n"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            bad("    model:\n      output_layers: [x]\n"),
            Err(ConfigError::MissingKey { key }) if key == "visual.items.model[0].name"
        ));
        assert!(matches!(
            bad("    model:\n      name: m\n"),
            Err(ConfigError::MissingKey { key }) if key == "visual.items.model[0].output_layers"
        ));
        assert!(matches!(
            bad("    model:\n      name: m\n      output_layers: []\n"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            bad("    model:\n      name: m\n      output_layers: [x, x]\n"),
            Err(ConfigError::InvalidValue { reason, .. }) if reason.contains("duplicate output layer")
        ));
        assert!(matches!(
            bad("    model:\n      name: m\n      output_layers: [fc]\n      reshape: [2]\n"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            bad("    model:\n      name: m\n      output_layers: [fc]\n      backend: \"a/b\"\n"),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn missing_folders_are_errors() {
        let err = validate(
            "dataset_path: d\ngpu_list: -1\nvisual:\n  items:\n    output_folder: o\n    model: {name: m, output_layers: [x]}\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey { key } if key == "visual.items.input_folder"));
    }

    #[test]
    fn media_interactions_rejected() {
        let err = validate(
            "dataset_path: d\ngpu_list: -1\nvisual:\n  interactions:\n    input_folder: i\n    output_folder: o\n    model: {name: m, output_layers: [x]}\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { path, .. } if path == "visual.interactions"));
    }

    #[test]
    fn empty_modality_section_rejected() {
        let err = validate("dataset_path: d\ngpu_list: -1\naudio: {}\n").unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { path, .. } if path == "audio"));
        // Unknown-only keys inside a section leave it effectively empty.
        let err = validate("dataset_path: d\ngpu_list: -1\naudio: {foo: {}}\n").unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { path, .. } if path == "audio"));
    }

    #[test]
    fn textual_columns_all_or_nothing() {
        let base = "\
dataset_path: d
gpu_list: -1
textual:
  interactions:
    input_folder: reviews.tsv
    output_folder: o
";
        let model = "    model: {name: m, output_layers: [x]}\n";
        let ok = validate(&format!(
            "{base}    user_column: u\n    item_column: i\n    text_column: t\n{model}"
        ))
        .unwrap();
        assert_eq!(
            ok.plan.jobs[0].columns,
            Some(ColumnSpec::Interactions {
                user: "u".into(),
                item: "i".into(),
                text: "t".into(),
            })
        );
        let err = validate(&format!("{base}    user_column: u\n{model}")).unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey { key } if key.ends_with("item_column")));

        let none = validate(&format!("{base}{model}")).unwrap();
        assert_eq!(none.plan.jobs[0].columns, None);
    }

    #[test]
    fn items_user_column_warns() {
        let text = "\
dataset_path: d
gpu_list: -1
textual:
  items:
    input_folder: t.tsv
    output_folder: o
    item_column: id
    text_column: desc
    user_column: who
    model: {name: m, output_layers: [x]}
";
        let v = validate(text).unwrap();
        assert_eq!(
            v.plan.jobs[0].columns,
            Some(ColumnSpec::Items {
                item: "id".into(),
                text: "desc".into(),
            })
        );
        assert!(v.warnings.iter().any(|w| w.contains("'user_column' does not apply")));
    }

    #[test]
    fn duplicate_cleaned_sections_are_errors() {
        let err = validate(
            "dataset_path: d\ngpu_list: -1\nvisual:\n  items: {input_folder: i, output_folder: o, model: {name: m, output_layers: [x]}}\n  \"Items \": {input_folder: i2, output_folder: o2, model: {name: m, output_layers: [x]}}\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::DuplicateSection { .. }));

        let err = validate(
            "dataset_path: d\ngpu_list: -1\nvisual:\n  items: {input_folder: i, output_folder: o, model: {name: m, output_layers: [x]}}\nVISUAL:\n  items: {input_folder: i, output_folder: o, model: {name: m, output_layers: [x]}}\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::DuplicateKey { .. }));
    }

    #[test]
    fn job_order_follows_document_order() {
        let text = "\
dataset_path: d
gpu_list: -1
audio:
  items:
    input_folder: a
    output_folder: oa
    model: {name: am, output_layers: [x]}
visual:
  items:
    input_folder: v
    output_folder: ov
    model: {name: vm, output_layers: [x]}
";
        let v = validate(text).unwrap();
        let order: Vec<Modality> = v.plan.jobs.iter().map(|j| j.modality).collect();
        assert_eq!(order, [Modality::Audio, Modality::Visual]);
    }

    #[test]
    fn plan_round_trips_through_config_node() {
        let text = "\
dataset_path: ./data
gpu_list: [0, 1]
model_registry: models/registry.json
audio:
  items:
    input_folder: tracks
    output_folder: audio_out
    model:
      - name: toy_audio
        backend: toy
        output_layers: [fc]
        task: genre
textual:
  interactions:
    input_folder: reviews.tsv
    output_folder: text_out
    user_column: user
    item_column: item
    text_column: review
    model:
      - name: toy_reviews
        output_layers: [norm]
        clear_text: true
visual:
  items:
    input_folder: images
    output_folder: vis_out
    model:
      - name: toy_visual
        output_layers: [fc1, relu1]
        reshape: [3, 3]
";
        let first = validate(text).unwrap();
        let second = validate_config(&first.plan.to_config_node()).unwrap();
        assert_eq!(second.plan, first.plan);
        assert!(second.warnings.is_empty());
    }
}
