//! Canonical JSON: object keys sorted by byte order, no whitespace, integers
//! verbatim and floats in exponent form with 17 significant digits so that
//! every `f64` survives a round trip bit for bit.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Result, ToolError};

/// Formats a finite float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_string(out: &mut String, s: &str) {
    // serde_json's string escaping is already deterministic
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

fn write_value(out: &mut String, v: &Value) -> Result<()> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                write!(out, "{i}").expect("writing to a String");
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").expect("writing to a String");
            } else {
                let f = n.as_f64().expect("json numbers are u64, i64 or f64");
                if !f.is_finite() {
                    return Err(ToolError::Usage(format!("cannot serialize non-finite number {f}")));
                }
                out.push_str(&format_f64(f));
            }
        }
        Value::String(s) => write_string(out, s),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_string(out, k);
                out.push(':');
                write_value(out, &map[k])?;
            }
            out.push('}');
        }
    }
    Ok(())
}

/// Canonical text of a JSON value.
pub fn to_canonical_value(v: &Value) -> Result<String> {
    let mut out = String::new();
    write_value(&mut out, v)?;
    Ok(out)
}

/// Canonical text of any serializable value. As with `serde_json`, NaN and
/// infinities become `null`; model files never contain them because
/// networks reject non-finite parameters.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| ToolError::Usage(format!("serialization failed: {e}")))?;
    to_canonical_value(&v)
}
