//! Validated extraction plan.

use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::config::node::ConfigNode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modality {
    Visual,
    Textual,
    Audio,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Visual, Modality::Textual, Modality::Audio];

    pub fn key(self) -> &'static str {
        match self {
            Modality::Visual => "visual",
            Modality::Textual => "textual",
            Modality::Audio => "audio",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "visual" => Some(Modality::Visual),
            "textual" => Some(Modality::Textual),
            "audio" => Some(Modality::Audio),
            _ => None,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Items,
    Interactions,
}

impl Source {
    pub fn key(self) -> &'static str {
        match self {
            Source::Items => "items",
            Source::Interactions => "interactions",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Column names for a textual table. The variant always matches the
/// job's source; completeness is enforced at validation.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnSpec {
    Items { item: String, text: String },
    Interactions { user: String, item: String, text: String },
}

/// One model request inside a job.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    /// Grouping folder in the output cascade; defaults to "default".
    pub backend: String,
    pub output_layers: Vec<String>,
    /// Visual only: overrides the registry input dims (height, width).
    pub reshape: Option<(usize, usize)>,
    /// Textual only: run text cleanup before tokenization.
    pub clear_text: bool,
    /// Variant selector; falls back to "default" when absent or unknown.
    pub task: Option<String>,
}

/// One (modality, source) extraction with its resolved paths and models.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionJob {
    pub modality: Modality,
    pub source: Source,
    /// Relative folder or table under `dataset_path`, as configured.
    pub input_folder: String,
    pub output_folder: String,
    pub columns: Option<ColumnSpec>,
    pub models: Vec<ModelSpec>,
}

impl ExtractionJob {
    pub fn input_path(&self, dataset_path: &Path) -> PathBuf {
        dataset_path.join(&self.input_folder)
    }

    pub fn output_path(&self, dataset_path: &Path) -> PathBuf {
        dataset_path.join(&self.output_folder)
    }
}

/// Fully validated run description. Construction goes through
/// `validate_config`; every field is well-formed by then.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionPlan {
    pub dataset_path: PathBuf,
    /// Worker threads, >= 1.
    pub workers: usize,
    /// Registry file; relative paths resolve under `dataset_path`.
    pub registry_path: PathBuf,
    pub skip_errors: bool,
    /// Run log directory; relative paths resolve under `dataset_path`.
    pub log_dir: PathBuf,
    pub jobs: Vec<ExtractionJob>,
}

impl ExtractionPlan {
    pub fn registry_file(&self) -> PathBuf {
        resolve_under(&self.dataset_path, &self.registry_path)
    }

    pub fn log_dir_path(&self) -> PathBuf {
        resolve_under(&self.dataset_path, &self.log_dir)
    }

    /// Renders the plan back into a raw config tree. Validating the result
    /// yields an equal plan (defaults render as their explicit values).
    pub fn to_config_node(&self) -> ConfigNode {
        let mut root = IndexMap::new();
        root.insert(
            "dataset_path".to_string(),
            ConfigNode::Str(self.dataset_path.to_string_lossy().into_owned()),
        );
        let gpu_list = if self.workers == 1 {
            ConfigNode::Int(-1)
        } else {
            ConfigNode::Seq((0..self.workers as i64).map(ConfigNode::Int).collect())
        };
        root.insert("gpu_list".to_string(), gpu_list);
        root.insert(
            "model_registry".to_string(),
            ConfigNode::Str(self.registry_path.to_string_lossy().into_owned()),
        );
        // Sections render in job order so a round trip preserves it; all
        // jobs of one modality are contiguous (they share one section).
        for job in &self.jobs {
            let entry = root
                .entry(job.modality.key().to_string())
                .or_insert_with(ConfigNode::empty_map);
            if let ConfigNode::Map(section) = entry {
                section.insert(job.source.key().to_string(), job_node(job));
            }
        }
        ConfigNode::Map(root)
    }
}

fn resolve_under(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn job_node(job: &ExtractionJob) -> ConfigNode {
    let mut map = IndexMap::new();
    map.insert(
        "input_folder".to_string(),
        ConfigNode::Str(job.input_folder.clone()),
    );
    map.insert(
        "output_folder".to_string(),
        ConfigNode::Str(job.output_folder.clone()),
    );
    match &job.columns {
        Some(ColumnSpec::Items { item, text }) => {
            map.insert("item_column".to_string(), ConfigNode::Str(item.clone()));
            map.insert("text_column".to_string(), ConfigNode::Str(text.clone()));
        }
        Some(ColumnSpec::Interactions { user, item, text }) => {
            map.insert("user_column".to_string(), ConfigNode::Str(user.clone()));
            map.insert("item_column".to_string(), ConfigNode::Str(item.clone()));
            map.insert("text_column".to_string(), ConfigNode::Str(text.clone()));
        }
        None => {}
    }
    let models = job.models.iter().map(model_node).collect();
    map.insert("model".to_string(), ConfigNode::Seq(models));
    ConfigNode::Map(map)
}

fn model_node(spec: &ModelSpec) -> ConfigNode {
    let mut map = IndexMap::new();
    map.insert("name".to_string(), ConfigNode::Str(spec.name.clone()));
    map.insert("backend".to_string(), ConfigNode::Str(spec.backend.clone()));
    map.insert(
        "output_layers".to_string(),
        ConfigNode::Seq(
            spec.output_layers
                .iter()
                .map(|l| ConfigNode::Str(l.clone()))
                .collect(),
        ),
    );
    if let Some((h, w)) = spec.reshape {
        map.insert(
            "reshape".to_string(),
            ConfigNode::Seq(vec![ConfigNode::Int(h as i64), ConfigNode::Int(w as i64)]),
        );
    }
    if spec.clear_text {
        map.insert("clear_text".to_string(), ConfigNode::Bool(true));
    }
    if let Some(task) = &spec.task {
        map.insert("task".to_string(), ConfigNode::Str(task.clone()));
    }
    ConfigNode::Map(map)
}
