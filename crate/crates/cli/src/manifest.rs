//! Flat `key=value` run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Ordered key/value pairs; keys keep insertion order on output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Parsed value for `key`, if present.
    pub fn parse<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::data(format!("manifest: bad value for {key}: {v:?}")))
            })
            .transpose()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn from_text(text: &str) -> CliResult<Self> {
        let mut seen = BTreeMap::new();
        let mut manifest = Manifest::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::data(format!("manifest line {}: expected key=value", i + 1)))?;
            if seen.insert(k.to_string(), ()).is_some() {
                return Err(CliError::data(format!("manifest line {}: duplicate key {k}", i + 1)));
            }
            manifest.set(k, v);
        }
        Ok(manifest)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read manifest {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| CliError::data(format!("cannot write manifest {}: {e}", path.display())))
    }
}
