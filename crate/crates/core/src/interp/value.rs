//! Runtime values and their loose coercions.

use std::cmp::Ordering;
use std::fmt;

use crate::program::Literal;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Text(String),
    Number(f64),
    Bool(bool),
}

impl Default for Value {
    fn default() -> Self {
        Value::Text(String::new())
    }
}

impl From<&Literal> for Value {
    fn from(lit: &Literal) -> Self {
        match lit {
            Literal::Text(s) => Value::Text(s.clone()),
            Literal::Number(n) => Value::Number(*n),
            Literal::Bool(b) => Value::Bool(*b),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_owned())
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Number(n)
    }
}

/// Parses a numeric string. Surrounding whitespace is ignored; blank text,
/// and spellings like `inf` or `nan`, are not numbers. `Infinity` is.
pub fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    match t {
        "Infinity" | "+Infinity" => return Some(f64::INFINITY),
        "-Infinity" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let lower = t.to_ascii_lowercase();
    if lower.contains("inf") || lower.contains("nan") {
        return None;
    }
    t.parse().ok()
}

/// Shortest round-trip decimal, with `Infinity`, `-Infinity` and `NaN` spelled out.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "Infinity" } else { "-Infinity" }.to_owned()
    } else if x == 0.0 {
        "0".to_owned()
    } else {
        format!("{x}")
    }
}

impl Value {
    /// Non-numeric text is 0, booleans are 1/0, NaN is 0.
    pub fn to_number(&self) -> f64 {
        let n = match self {
            Value::Number(n) => *n,
            Value::Bool(b) => f64::from(u8::from(*b)),
            Value::Text(s) => parse_number(s).unwrap_or(0.0),
        };
        if n.is_nan() {
            0.0
        } else {
            n
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Value::Text(s) => s.clone(),
            Value::Number(n) => format_number(*n),
            Value::Bool(b) => b.to_string(),
        }
    }

    /// `""`, `"0"`, `"false"` (any case), 0 and NaN are false.
    pub fn truthy(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Number(n) => *n != 0.0 && !n.is_nan(),
            Value::Text(s) => !(s.is_empty() || s == "0" || s.eq_ignore_ascii_case("false")),
        }
    }

    fn as_comparable_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) if !n.is_nan() => Some(*n),
            Value::Number(_) => None,
            Value::Bool(b) => Some(f64::from(u8::from(*b))),
            Value::Text(s) => parse_number(s),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Numeric when both sides are numeric, otherwise case-insensitive text order.
pub fn compare(a: &Value, b: &Value) -> Ordering {
    match (a.as_comparable_number(), b.as_comparable_number()) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        _ => a.to_text().to_lowercase().cmp(&b.to_text().to_lowercase()),
    }
}

pub fn equals(a: &Value, b: &Value) -> bool {
    compare(a, b) == Ordering::Equal
}

/// Remainder taking the sign of the divisor.
pub fn modulo(n: f64, m: f64) -> f64 {
    let r = n % m;
    if r != 0.0 && (r < 0.0) != (m < 0.0) {
        r + m
    } else {
        r
    }
}

/// Halves round up, toward positive infinity.
pub fn round(x: f64) -> f64 {
    (x + 0.5).floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Value {
        Value::from(s)
    }

    #[test]
    fn coercions() {
        assert_eq!(t("3").to_number() + Value::Number(4.0).to_number(), 7.0);
        assert_eq!(t("abc").to_number(), 0.0);
        assert_eq!(t(" 2.5 ").to_number(), 2.5);
        assert_eq!(t("inf").to_number(), 0.0);
        assert_eq!(t("Infinity").to_number(), f64::INFINITY);
        assert_eq!(Value::Bool(true).to_number(), 1.0);
        assert_eq!(Value::Number(f64::NAN).to_number(), 0.0);
    }

    #[test]
    fn number_rendering() {
        assert_eq!(format_number(1.0 / 0.0), "Infinity");
        assert_eq!(format_number(-1.0 / 0.0), "-Infinity");
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(format_number(27.0), "27");
        assert_eq!(format_number(0.75), "0.75");
    }

    #[test]
    fn comparisons() {
        assert!(equals(&t("Spain"), &t("spain")));
        assert!(equals(&t("10"), &Value::Number(10.0)));
        assert_eq!(compare(&t("9"), &t("10")), Ordering::Less);
        assert_eq!(compare(&t("b"), &t("A")), Ordering::Greater);
        assert!(!equals(&t(""), &Value::Number(0.0)));
    }

    #[test]
    fn truthiness() {
        for falsy in [t(""), t("0"), t("FALSE"), Value::Number(0.0), Value::Bool(false)] {
            assert!(!falsy.truthy(), "{falsy:?}");
        }
        for truthy in [t("no"), t("0.0"), Value::Number(-1.0), Value::Bool(true)] {
            assert!(truthy.truthy(), "{truthy:?}");
        }
    }

    #[test]
    fn arithmetic_helpers() {
        assert_eq!(modulo(-1.0, 3.0), 2.0);
        assert_eq!(modulo(1.0, -3.0), -2.0);
        assert_eq!(modulo(6.0, 3.0), 0.0);
        assert_eq!(round(2.5), 3.0);
        assert_eq!(round(-2.5), -2.0);
    }
}
