//! Output path cascade and feature writing.

use std::path::{Path, PathBuf};

use crate::error::IoError;
use crate::npy::write_npy;
use crate::tensor::Tensor;

/// Identity of one extracted sample: a single id, or a (user, item)
/// interaction pair joined by a double underscore.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SampleKey {
    Item(String),
    Interaction { user: String, item: String },
}

impl SampleKey {
    /// Filename stem. Ids never contain "__", so interaction stems parse
    /// back unambiguously.
    pub fn file_stem(&self) -> String {
        match self {
            SampleKey::Item(id) => id.clone(),
            SampleKey::Interaction { user, item } => format!("{user}__{item}"),
        }
    }
}

/// Builds `<output_root>/<backend>/<model>/<stem>.npy`, appending
/// `__<layer>` to the stem when the model emits more than one layer.
pub fn create_output_path(
    output_root: &Path,
    backend: &str,
    model: &str,
    layer: &str,
    layer_count: usize,
    key: &SampleKey,
) -> PathBuf {
    debug_assert!(layer_count >= 1);
    let stem = key.file_stem();
    let file = if layer_count == 1 {
        format!("{stem}.npy")
    } else {
        format!("{stem}__{layer}.npy")
    };
    output_root.join(backend).join(model).join(file)
}

/// Creates parent directories as needed, then writes the tensor in one
/// whole-buffer write so readers never observe a torn file.
pub fn write_feature(tensor: &Tensor, path: &Path) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| IoError::new(parent, e))?;
    }
    write_npy(tensor, path)
}
