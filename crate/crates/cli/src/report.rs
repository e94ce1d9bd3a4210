use std::fmt::Display;
use std::fs;
use std::path::Path;

use anyhow::Result;

/// Ordered key-value summary with a text and a `key=value` rendering.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    rows: Vec<(String, String)>,
}

impl Summary {
    pub fn put(&mut self, key: impl Into<String>, value: impl Display) {
        self.rows.push((key.into(), value.to_string()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, format!("{value:.6e}"));
    }

    pub fn key_values(&self) -> String {
        self.rows.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn text(&self) -> String {
        let w = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        self.rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
    }

    /// `summary.txt` and `summary.kv` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join("summary.txt"), self.text())?;
        fs::write(dir.join("summary.kv"), self.key_values())?;
        Ok(())
    }
}
