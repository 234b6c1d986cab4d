//! JSON run manifests with fixed key order and 17-digit floats.

use crate::dump::{fmt_f64, write_atomic};
use crate::error::{Error, Result};
use serde_json::{Map, Number, Value};
use std::path::Path;

pub const FORMAT_VERSION: u64 = 1;

/// A float as a JSON number with 17 significant digits; NaN and ±∞ become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        // Normalize −0 so that equal runs print equal bytes.
        let x = if x == 0.0 { 0.0 } else { x };
        Value::Number(fmt_f64(x).parse::<Number>().expect("formatted float parses"))
    } else {
        Value::Null
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

/// Insertion-ordered object builder.
#[derive(Default)]
pub struct Obj(Map<String, Value>);

impl Obj {
    pub fn new() -> Self {
        Obj(Map::new())
    }

    pub fn put(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), v.into());
        self
    }

    pub fn float(self, key: &str, x: f64) -> Self {
        self.put(key, num(x))
    }

    pub fn build(self) -> Value {
        Value::Object(self.0)
    }
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("manifest values serialize");
    s.push('\n');
    s
}

pub fn write(path: &Path, v: &Value) -> Result<()> {
    write_atomic(path, &to_text(v))
}

pub fn read(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    match v.get("format_version").and_then(Value::as_u64) {
        Some(FORMAT_VERSION) => Ok(v),
        other => Err(Error::InvalidArgument(format!(
            "{}: unsupported format_version {other:?}",
            path.display()
        ))),
    }
}
