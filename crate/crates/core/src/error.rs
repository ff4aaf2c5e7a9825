//! Error taxonomy for the pipeline.
//!
//! Every fallible operation returns one of four domain classes (config,
//! data, format, model) or an [`IoError`] carrying the offending path.
//! [`PipelineError`] is the union used by operations that cross class
//! boundaries (file loading, the runner, the CLI).

use std::path::PathBuf;

use thiserror::Error;

/// Configuration parsing, override, or validation failure.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("yaml syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("configuration root must be a mapping")]
    NonMappingRoot,
    #[error("null value at '{path}' is not supported")]
    NullValue { path: String },
    #[error("duplicate key '{key}' at '{path}'")]
    DuplicateKey { path: String, key: String },
    #[error("invalid override '{token}': {reason}")]
    InvalidOverride { token: String, reason: String },
    #[error("override path conflicts with a non-mapping value at '{prefix}'")]
    OverrideConflict { prefix: String },
    #[error("missing required key '{key}'")]
    MissingKey { key: String },
    #[error("invalid value at '{path}': {reason}")]
    InvalidValue { path: String, reason: String },
    #[error("duplicate section for {modality}/{section} after key cleaning")]
    DuplicateSection { modality: String, section: String },
}

/// Dataset shape problem: missing inputs, malformed tables, bad ids.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("input not found: {path}")]
    MissingInput { path: PathBuf },
    #[error("duplicate id '{id}' in {context}")]
    DuplicateId { id: String, context: String },
    #[error("invalid id '{id}': ids must not contain '/', '\\', or '__'")]
    InvalidId { id: String },
    #[error("row {row}: expected at least {expected} fields, found {found}")]
    ShortRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("column '{column}' not found in table header")]
    MissingColumn { column: String },
    #[error("empty waveform")]
    EmptyWaveform,
    #[error("output path collision: {path} would be written more than once")]
    PathCollision { path: PathBuf },
}

/// Malformed or unsupported bytes in a media or tensor file.
///
/// `format` names the container ("npy", "ppm", "png", "wav"); the variant
/// names the offending field or region.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{format}: bad magic")]
    BadMagic { format: &'static str },
    #[error("{format}: unsupported {field}: {value}")]
    Unsupported {
        format: &'static str,
        field: &'static str,
        value: String,
    },
    #[error("{format}: truncated {what}")]
    Truncated {
        format: &'static str,
        what: &'static str,
    },
    #[error("{format}: {message}")]
    Malformed {
        format: &'static str,
        message: String,
    },
}

/// Registry or model graph failure.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown model '{name}'; registry provides: {available:?}")]
    UnknownModel { name: String, available: Vec<String> },
    #[error("model '{model}' handles {actual} input, requested for {requested} extraction")]
    ModalityMismatch {
        model: String,
        actual: String,
        requested: String,
    },
    #[error("unknown output layer '{layer}' for model '{model}' variant '{variant}'; available: {available:?}")]
    UnknownLayer {
        model: String,
        variant: String,
        layer: String,
        available: Vec<String>,
    },
    #[error("layer '{layer}': linear expects {expected} input values, got {got}")]
    DimMismatch {
        layer: String,
        expected: usize,
        got: usize,
    },
    #[error("layer '{layer}': {message}")]
    BadChain { layer: String, message: String },
    #[error("non-finite value in output of layer '{layer}'")]
    NonFinite { layer: String },
    #[error("registry {context}: {message}")]
    Registry { context: String, message: String },
}

/// Filesystem failure tagged with the path that produced it.
#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct IoError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

impl IoError {
    pub fn new(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self {
            path: path.into(),
            source,
        }
    }
}

/// Union of all error classes, used by cross-class operations.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] IoError),
}
