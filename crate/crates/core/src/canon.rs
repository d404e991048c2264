//! Canonical JSON rendering.
//!
//! Store files, program files and API responses all go through this module so
//! that byte-level comparisons are meaningful: object keys are sorted (the
//! `serde_json` map is a `BTreeMap`) and integral doubles are written without
//! a fractional part.

use serde::Serialize;
use serde_json::{Number, Value};

/// 2^53: beyond this not every integer is representable as a double.
const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

/// Canonical JSON number for a double. Non-finite values have no JSON form and map to `null`.
pub fn number(x: f64) -> Value {
    if x == 0.0 {
        // also folds -0
        return Value::from(0);
    }
    if x.fract() == 0.0 && x.abs() < MAX_EXACT_INT {
        return Value::from(x as i64);
    }
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Rewrites every float in `value` into its canonical number form.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => number(n.as_f64().unwrap_or_default()),
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Serializes `value` and canonicalizes the result.
pub fn to_value<T: Serialize + ?Sized>(value: &T) -> Value {
    // Serializing our own types into a `Value` cannot fail: every map key is a string.
    canonicalize(serde_json::to_value(value).expect("serializable into JSON value"))
}

/// Pretty, newline-terminated canonical text. Used for files.
pub fn render_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON value renders");
    text.push('\n');
    text
}

/// Compact canonical text. Used for HTTP bodies.
pub fn render_compact(value: &Value) -> String {
    serde_json::to_string(value).expect("JSON value renders")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn integral_doubles_lose_their_fraction() {
        assert_eq!(render_compact(&number(3.0)), "3");
        assert_eq!(render_compact(&number(-0.0)), "0");
        assert_eq!(render_compact(&number(0.25)), "0.25");
        assert_eq!(number(f64::INFINITY), Value::Null);
    }

    #[test]
    fn keys_are_sorted() {
        let v = canonicalize(json!({"b": 1.0, "a": [2.5, 3.0]}));
        assert_eq!(render_compact(&v), r#"{"a":[2.5,3],"b":1}"#);
    }
}
