//! Key/value descriptions of workflow elements and the patterns that match them.
//!
//! A [`Description`] identifies an element (`Application=CMKIN`). A
//! [`DescriptionPattern`] is what context block headers, pattern
//! dependencies and namespace aliases are written in: each key carries one or
//! more alternative values, and `*` accepts any value.
//!
//! Both share a textual form: comma-separated items where an item containing
//! `=` opens a new key and a bare item adds an alternative to the previous
//! key. `Application=CMKIN,OSCAR,Site=FNAL` is the pattern
//! `{Application: [CMKIN, OSCAR], Site: [FNAL]}`.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;

use crate::error::Error;

/// Wildcard alternative in a pattern.
pub const WILDCARD: &str = "*";

fn valid_token(s: &str) -> bool {
    !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || c == ',' || c == '=')
}

/// Ordered key/value identity of a workflow element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Description {
    entries: IndexMap<String, String>,
}

impl Description {
    pub fn new() -> Self {
        Self::default()
    }

    /// Single-entry description, e.g. `Application=CMKIN`.
    pub fn single(key: impl Into<String>, value: impl Into<String>) -> Self {
        let mut d = Self::new();
        d.entries.insert(key.into(), value.into());
        d
    }

    /// Sets `key` to `value`. An existing key keeps its position.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains_value(&self, value: &str) -> bool {
        self.entries.values().any(|v| v == value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The pattern that matches exactly this description's entries.
    pub fn to_pattern(&self) -> DescriptionPattern {
        let mut p = DescriptionPattern::default();
        for (k, v) in &self.entries {
            p.entries.insert(k.clone(), vec![v.clone()]);
        }
        p
    }
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for Description {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut d = Description::new();
        for item in s.split(',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidDescription(s.to_string()))?;
            if !valid_token(k) || !valid_token(v) || d.entries.contains_key(k) {
                return Err(Error::InvalidDescription(s.to_string()));
            }
            d.entries.insert(k.to_string(), v.to_string());
        }
        Ok(d)
    }
}

/// Header-style pattern: every key must be present in a matching description
/// with one of the listed values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DescriptionPattern {
    entries: IndexMap<String, Vec<String>>,
}

impl DescriptionPattern {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an alternative for `key`, creating the key if needed.
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let value = value.into();
        let alts = self.entries.entry(key.into()).or_default();
        if !alts.contains(&value) {
            alts.push(value);
        }
    }

    pub fn alternatives(&self, key: &str) -> Option<&[String]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True iff every key in the pattern is present in `description` with a
    /// value equal to one of the alternatives (or an alternative is `*`).
    /// Extra description keys are ignored.
    pub fn matches(&self, description: &Description) -> bool {
        self.entries.iter().all(|(key, alts)| match description.get(key) {
            Some(value) => alts.iter().any(|a| a == WILDCARD || a == value),
            None => false,
        })
    }

    /// The sole concrete value when the pattern is `Key=Value` with no
    /// alternatives or wildcard. Used to name aliases and aliased elements.
    pub fn sole_value(&self) -> Option<&str> {
        if self.entries.len() != 1 {
            return None;
        }
        let alts = self.entries.values().next()?;
        match alts.as_slice() {
            [v] if v != WILDCARD => Some(v.as_str()),
            _ => None,
        }
    }

    /// True when `self` selects a strict subset of what `general` selects,
    /// judged syntactically: `self` has every key of `general` with no wider
    /// alternatives, and the two differ.
    pub fn is_more_specific_than(&self, general: &DescriptionPattern) -> bool {
        if self == general {
            return false;
        }
        general.entries.iter().all(|(key, galts)| {
            let Some(salts) = self.entries.get(key) else {
                return false;
            };
            if galts.iter().any(|a| a == WILDCARD) {
                return true;
            }
            salts.iter().all(|s| s != WILDCARD && galts.contains(s))
        })
    }
}

impl fmt::Display for DescriptionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, alts) in &self.entries {
            for (i, a) in alts.iter().enumerate() {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                if i == 0 {
                    write!(f, "{k}={a}")?;
                } else {
                    f.write_str(a)?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for DescriptionPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidDescription(s.to_string());
        let mut p = DescriptionPattern::new();
        let mut current: Option<String> = None;
        for item in s.split(',') {
            match item.split_once('=') {
                Some((k, v)) => {
                    if !valid_token(k) || !valid_token(v) || p.entries.contains_key(k) {
                        return Err(bad());
                    }
                    p.push(k, v);
                    current = Some(k.to_string());
                }
                None => {
                    let key = current.as_ref().ok_or_else(bad)?;
                    if !valid_token(item) {
                        return Err(bad());
                    }
                    p.push(key.clone(), item);
                }
            }
        }
        if p.is_empty() {
            return Err(bad());
        }
        Ok(p)
    }
}

// IndexMap equality ignores key order, so hash a key-sorted view.
impl std::hash::Hash for DescriptionPattern {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        let sorted: std::collections::BTreeMap<&String, &Vec<String>> = self.entries.iter().collect();
        sorted.hash(state);
    }
}

impl From<&Description> for DescriptionPattern {
    fn from(d: &Description) -> Self {
        d.to_pattern()
    }
}
