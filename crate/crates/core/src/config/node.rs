//! Typed configuration tree and YAML parsing.

use indexmap::IndexMap;

use crate::error::ConfigError;

/// Parsed configuration value. Mappings preserve document order; null is
/// not representable (rejected at parse time).
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigNode {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Seq(Vec<ConfigNode>),
    Map(IndexMap<String, ConfigNode>),
}

impl ConfigNode {
    pub fn empty_map() -> Self {
        ConfigNode::Map(IndexMap::new())
    }

    pub fn as_map(&self) -> Option<&IndexMap<String, ConfigNode>> {
        match self {
            ConfigNode::Map(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ConfigNode::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Child of a mapping node by exact key.
    pub fn get(&self, key: &str) -> Option<&ConfigNode> {
        self.as_map().and_then(|m| m.get(key))
    }

    /// Descends a dot-path of exact keys. Returns None on any miss or
    /// non-mapping intermediate.
    pub fn get_path(&self, path: &[impl AsRef<str>]) -> Option<&ConfigNode> {
        let mut node = self;
        for key in path {
            node = node.get(key.as_ref())?;
        }
        Some(node)
    }

    fn kind(&self) -> &'static str {
        match self {
            ConfigNode::Str(_) => "string",
            ConfigNode::Int(_) => "integer",
            ConfigNode::Float(_) => "float",
            ConfigNode::Bool(_) => "boolean",
            ConfigNode::Seq(_) => "sequence",
            ConfigNode::Map(_) => "mapping",
        }
    }

    /// Human name of the node's type, for error messages.
    pub fn type_name(&self) -> &'static str {
        self.kind()
    }
}

/// Parses YAML text into a [`ConfigNode`] tree.
///
/// The root must be a mapping. Null values anywhere are rejected with the
/// dot-path of the offending key; keys must be strings and unique within
/// their mapping after trimming.
pub fn parse_yaml_config(text: &str) -> Result<ConfigNode, ConfigError> {
    let value: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| {
        let (line, column) = e
            .location()
            .map(|l| (l.line(), l.column()))
            .unwrap_or((0, 0));
        ConfigError::Syntax {
            line,
            column,
            message: e.to_string(),
        }
    })?;
    if !matches!(value, serde_yaml::Value::Mapping(_)) {
        return Err(ConfigError::NonMappingRoot);
    }
    convert(value, &mut Vec::new())
}

fn path_string(path: &[String]) -> String {
    if path.is_empty() {
        "<root>".to_string()
    } else {
        path.join(".")
    }
}

fn convert(value: serde_yaml::Value, path: &mut Vec<String>) -> Result<ConfigNode, ConfigError> {
    use serde_yaml::Value;
    match value {
        Value::Null => Err(ConfigError::NullValue {
            path: path_string(path),
        }),
        Value::Bool(b) => Ok(ConfigNode::Bool(b)),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(ConfigNode::Int(i))
            } else {
                Ok(ConfigNode::Float(n.as_f64().unwrap_or(f64::NAN)))
            }
        }
        Value::String(s) => Ok(ConfigNode::Str(s)),
        Value::Sequence(items) => {
            let mut out = Vec::with_capacity(items.len());
            for (i, item) in items.into_iter().enumerate() {
                path.push(format!("[{i}]"));
                let node = convert(item, path)?;
                path.pop();
                out.push(node);
            }
            Ok(ConfigNode::Seq(out))
        }
        Value::Mapping(map) => {
            let mut out = IndexMap::with_capacity(map.len());
            let mut seen_trimmed: Vec<String> = Vec::new();
            for (k, v) in map {
                let key = match k {
                    Value::String(s) => s,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            path: path_string(path),
                            reason: format!(
                                "mapping keys must be strings, found {}",
                                yaml_kind(&other)
                            ),
                        })
                    }
                };
                let trimmed = key.trim().to_string();
                if seen_trimmed.contains(&trimmed) {
                    return Err(ConfigError::DuplicateKey {
                        path: path_string(path),
                        key: trimmed,
                    });
                }
                seen_trimmed.push(trimmed);
                path.push(key.clone());
                let node = convert(v, path)?;
                path.pop();
                out.insert(key, node);
            }
            Ok(ConfigNode::Map(out))
        }
        Value::Tagged(t) => Err(ConfigError::InvalidValue {
            path: path_string(path),
            reason: format!("yaml tag '{}' is not supported", t.tag),
        }),
    }
}

fn yaml_kind(v: &serde_yaml::Value) -> &'static str {
    use serde_yaml::Value;
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Sequence(_) => "sequence",
        Value::Mapping(_) => "mapping",
        Value::Tagged(_) => "tagged value",
    }
}
