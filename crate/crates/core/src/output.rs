//! CSV tables, JSON run summaries and content hashes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Rectangular table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} fields, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Pushes a row of floats in shortest round-trip form.
    pub fn push_f64(&mut self, row: &[f64]) -> Result<()> {
        self.push(row.iter().map(|v| fmt_f64(*v)).collect())
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Rows as JSON objects keyed by the header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj = self
                        .header
                        .iter()
                        .zip(r)
                        .map(|(k, v)| {
                            let val =
                                v.parse::<f64>().ok().and_then(|x| serde_json::Number::from_f64(x).map(Value::Number));
                            (k.clone(), val.unwrap_or_else(|| Value::String(v.clone())))
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Git-style object hash: SHA-256 of `"blob <len>\0" ++ bytes`, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Per-run JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub command: String,
    pub config: Value,
    /// [`content_hash`] of the canonical config JSON.
    pub input_hash: String,
    pub metrics: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Value>,
}

impl Summary {
    pub fn new(command: &str, config: Value, metrics: Value) -> Self {
        let canonical = serde_json::to_vec(&config).unwrap_or_default();
        Self { command: command.into(), input_hash: content_hash(&canonical), config, metrics, rows: None }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, s + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_object_format() {
        // `git hash-object --stdin` of "hello\n" in a sha256 repository
        assert_eq!(content_hash(b"hello\n"), "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4");
    }

    #[test]
    fn table_shape() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push_f64(&[1.0, 0.1]).unwrap();
        assert!(t.push_f64(&[1.0]).is_err());
        assert_eq!(t.render(), "a,b\n1.0,0.1\n");
        assert_eq!(t.to_json()[0]["b"], 0.1);
    }
}
