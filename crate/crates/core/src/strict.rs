// Strict readers over `serde_json::Value` that reject unknown keys and report
// the path of the first offending field.

use serde_json::{Map, Value};

use crate::validation::SchemaError;

pub(crate) fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

pub(crate) fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

pub(crate) struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    pub(crate) fn new(value: &'a Value, path: &str) -> Result<Self, SchemaError> {
        match value {
            Value::Object(map) => Ok(Self {
                path: path.to_string(),
                map,
            }),
            other => Err(SchemaError::new(
                display_path(path),
                format!("expected object, found {}", kind(other)),
            )),
        }
    }

    /// Fails on the first key (in sorted order) that is not in `allowed`.
    pub(crate) fn deny_unknown(&self, allowed: &[&str]) -> Result<(), SchemaError> {
        match self.map.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(extra) => Err(SchemaError::new(
                join(&self.path, extra),
                "unknown field".to_string(),
            )),
            None => Ok(()),
        }
    }

    pub(crate) fn path_of(&self, key: &str) -> String {
        join(&self.path, key)
    }

    pub(crate) fn required(&self, key: &str) -> Result<&'a Value, SchemaError> {
        self.map
            .get(key)
            .ok_or_else(|| SchemaError::new(self.path_of(key), "missing field"))
    }

    pub(crate) fn string(&self, key: &str) -> Result<String, SchemaError> {
        let value = self.required(key)?;
        as_string(value, &self.path_of(key))
    }

    pub(crate) fn opt_string(&self, key: &str) -> Result<Option<String>, SchemaError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => as_string(v, &self.path_of(key)).map(Some),
        }
    }

    pub(crate) fn uint(&self, key: &str) -> Result<u32, SchemaError> {
        let value = self.required(key)?;
        as_uint(value, &self.path_of(key))
    }

    pub(crate) fn array(&self, key: &str) -> Result<Vec<(String, &'a Value)>, SchemaError> {
        let path = self.path_of(key);
        match self.required(key)? {
            Value::Array(items) => Ok(items
                .iter()
                .enumerate()
                .map(|(i, v)| (index(&path, i), v))
                .collect()),
            other => Err(SchemaError::new(
                path,
                format!("expected array, found {}", kind(other)),
            )),
        }
    }

    pub(crate) fn object(&self, key: &str) -> Result<Obj<'a>, SchemaError> {
        let value = self.required(key)?;
        Obj::new(value, &self.path_of(key))
    }
}

pub(crate) fn as_string(value: &Value, path: &str) -> Result<String, SchemaError> {
    value.as_str().map(str::to_string).ok_or_else(|| {
        SchemaError::new(path, format!("expected string, found {}", kind(value)))
    })
}

pub(crate) fn as_uint(value: &Value, path: &str) -> Result<u32, SchemaError> {
    value
        .as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| {
            SchemaError::new(
                path,
                format!("expected non-negative integer, found {}", kind(value)),
            )
        })
}

pub(crate) fn kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_f64() => "number",
        Value::Number(_) => "integer",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn display_path(path: &str) -> String {
    if path.is_empty() {
        "$".to_string()
    } else {
        path.to_string()
    }
}
