//! Dot-path command line overrides.

use indexmap::IndexMap;

use crate::config::node::ConfigNode;
use crate::error::ConfigError;

/// One `key.path=value` override. The value is always a string; type
/// coercion happens later, during validation.
#[derive(Clone, Debug, PartialEq)]
pub struct OverridePair {
    pub path: Vec<String>,
    pub value: String,
}

impl OverridePair {
    /// Splits on the first '='. The value may be empty and may itself
    /// contain '='; path segments must be non-empty.
    pub fn parse(token: &str) -> Result<Self, ConfigError> {
        let invalid = |reason: &str| ConfigError::InvalidOverride {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let (path, value) = token
            .split_once('=')
            .ok_or_else(|| invalid("expected KEY=VALUE"))?;
        if path.is_empty() {
            return Err(invalid("empty key path"));
        }
        let segments: Vec<String> = path.split('.').map(str::to_string).collect();
        if segments.iter().any(|s| s.is_empty()) {
            return Err(invalid("empty path segment"));
        }
        Ok(Self {
            path: segments,
            value: value.to_string(),
        })
    }
}

/// Applies `overrides` in order over a copy of `root` (value semantics:
/// the input tree is never mutated). Each override descends its path,
/// creating intermediate mappings as needed, and replaces the leaf with
/// the override string. A non-mapping intermediate is an error naming the
/// conflicting prefix. Later overrides win on equal paths.
pub fn apply_overrides(
    root: &ConfigNode,
    overrides: &[OverridePair],
) -> Result<ConfigNode, ConfigError> {
    let mut out = root.clone();
    for pair in overrides {
        apply_one(&mut out, pair)?;
    }
    Ok(out)
}

fn apply_one(root: &mut ConfigNode, pair: &OverridePair) -> Result<(), ConfigError> {
    let mut node = &mut *root;
    let (leaf, parents) = pair.path.split_last().expect("parsed path is non-empty");
    for (depth, key) in parents.iter().enumerate() {
        let map = match node {
            ConfigNode::Map(m) => m,
            _ => {
                return Err(ConfigError::OverrideConflict {
                    prefix: pair.path[..depth].join("."),
                })
            }
        };
        node = map
            .entry(key.clone())
            .or_insert_with(|| ConfigNode::Map(IndexMap::new()));
    }
    match node {
        ConfigNode::Map(m) => {
            m.insert(leaf.clone(), ConfigNode::Str(pair.value.clone()));
            Ok(())
        }
        _ => Err(ConfigError::OverrideConflict {
            prefix: parents.join("."),
        }),
    }
}
