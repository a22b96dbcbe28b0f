//! File-backed metadata sources: `key=value` lines, `#` comments.

use std::path::PathBuf;

use indexmap::IndexMap;

use crate::description::Description;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Backing {
    File(PathBuf),
    Inline(IndexMap<String, String>),
}

/// A metadata source bound to the terminal whose description it matches.
#[derive(Debug, Clone)]
pub struct KvSource {
    description: Description,
    backing: Backing,
}

impl KvSource {
    pub fn from_file(description: Description, path: impl Into<PathBuf>) -> Self {
        Self {
            description,
            backing: Backing::File(path.into()),
        }
    }

    pub fn inline<K, V>(description: Description, entries: impl IntoIterator<Item = (K, V)>) -> Self
    where
        K: Into<String>,
        V: Into<String>,
    {
        Self {
            description,
            backing: Backing::Inline(entries.into_iter().map(|(k, v)| (k.into(), v.into())).collect()),
        }
    }

    /// Parses the command-line form `<description>:<path>`, e.g. `Database=RefDB:refdb.kv`.
    pub fn parse_binding(spec: &str) -> Result<Self> {
        let (desc, path) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidDescription(spec.to_string()))?;
        Ok(Self::from_file(desc.parse()?, path))
    }

    pub fn description(&self) -> &Description {
        &self.description
    }

    /// Label used as the origin document of loaded attributes.
    pub fn label(&self) -> String {
        match &self.backing {
            Backing::File(p) => p.display().to_string(),
            Backing::Inline(_) => format!("kv:{}", self.description),
        }
    }

    pub fn load(&self) -> Result<IndexMap<String, String>> {
        match &self.backing {
            Backing::Inline(entries) => Ok(entries.clone()),
            Backing::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_kv(&text)
            }
        }
    }
}

pub fn parse_kv(text: &str) -> Result<IndexMap<String, String>> {
    let mut entries = IndexMap::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (k, v) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::syntax(i + 1, "expected key=value"))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::syntax(i + 1, "empty key"));
        }
        if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::syntax(i + 1, format!("duplicate key `{k}`")));
        }
    }
    Ok(entries)
}
