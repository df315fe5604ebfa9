//! Serde adapter for `f64` fields that may be infinite.
//!
//! Finite values are written as numbers; `+inf`, `-inf` and NaN as the string
//! tokens `"inf"`, `"-inf"` and `"nan"`. Deserialization accepts both forms.

use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};
use std::fmt;

pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
    if value.is_finite() {
        s.serialize_f64(*value)
    } else {
        s.serialize_str(format_token(*value))
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(FloatOrToken)
}

/// Token for a non-finite value; finite values are not tokens.
pub fn format_token(value: f64) -> &'static str {
    if value.is_nan() {
        "nan"
    } else if value > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// Shortest round-trip decimal for finite values, a token otherwise.
pub fn format_value(value: f64) -> String {
    if value.is_finite() {
        value.to_string()
    } else {
        format_token(value).to_string()
    }
}

/// Parses a number or one of the infinity tokens.
pub fn parse_token(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "Inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-Inf" | "-infinity" => Some(f64::NEG_INFINITY),
        "nan" | "NaN" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}

struct FloatOrToken;

impl Visitor<'_> for FloatOrToken {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_token(v).ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
    }
}
