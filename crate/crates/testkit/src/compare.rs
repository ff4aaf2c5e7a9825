//! Directory snapshots for byte-identity assertions.

use std::path::Path;

/// Collects (relative path, bytes) for every file under `root`, sorted
/// by path. Directories whose name appears in `exclude` are skipped
/// wholesale (used to drop log folders from determinism comparisons).
pub fn snapshot_tree(root: &Path, exclude: &[&str]) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let entries = match std::fs::read_dir(&dir) {
            Ok(entries) => entries,
            Err(_) => continue, // missing root compares as empty
        };
        for entry in entries {
            let path = entry.expect("readable dir entry").path();
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            if path.is_dir() {
                if !exclude.contains(&name.as_str()) {
                    stack.push(path);
                }
            } else {
                let rel = path
                    .strip_prefix(root)
                    .expect("walked paths stay under root")
                    .to_string_lossy()
                    .replace('\\', "/");
                files.push((rel, std::fs::read(&path).expect("readable file")));
            }
        }
    }
    files.sort();
    files
}
