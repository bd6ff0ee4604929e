//! Canonical JSON text and content digests.
//!
//! `serde_json::Map` is ordered by key, so `to_string` of a `Value` is already
//! a canonical form: sorted keys, no insignificant whitespace.

use serde_json::Value;
use sha2::{Digest, Sha256};

/// Compact, key-sorted JSON text of `value`.
pub fn canonical_json(value: &Value) -> String {
    serde_json::to_string(value).expect("serializing a Value cannot fail")
}

/// Hex SHA-256 of `tool_name` and the canonical form of `args`.
pub fn call_digest(tool_name: &str, args: &serde_json::Map<String, Value>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(tool_name.as_bytes());
    hasher.update(b"\n");
    hasher.update(canonical_json(&Value::Object(args.clone())).as_bytes());
    hex::encode(hasher.finalize())
}

/// Hex SHA-256 of arbitrary text.
pub fn text_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_order_does_not_change_digest() {
        let a: serde_json::Map<String, Value> =
            serde_json::from_str(r#"{"b": 1, "a": {"y": 2, "x": 3}}"#).unwrap();
        let b: serde_json::Map<String, Value> =
            serde_json::from_str(r#"{"a": {"x": 3, "y": 2}, "b": 1}"#).unwrap();
        assert_eq!(call_digest("t", &a), call_digest("t", &b));
        assert_ne!(call_digest("t", &a), call_digest("u", &a));
    }

    #[test]
    fn canonical_text_is_compact_and_sorted() {
        assert_eq!(canonical_json(&json!({"b": [1, 2], "a": "x"})), r#"{"a":"x","b":[1,2]}"#);
    }
}
