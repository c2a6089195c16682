//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! scenario = lindblad
//! kind = pure_dephasing
//! gamma_phi = 1.0
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                parse_pair(line).map_err(|e| e.context(format!("line {}", n + 1)))?;
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::parse(format!(
                    "line {}: duplicate key {key:?}",
                    n + 1
                )));
            }
        }
        Ok(Self { values })
    }

    /// Applies a `key=value` override; later calls win.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (key, value) = parse_pair(pair).map_err(|e| e.context("--set"))?;
        self.values.insert(key, value);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> CliResult<&str> {
        self.raw(key)
            .ok_or_else(|| CliError::validation(format!("missing required key {key:?}")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    CliError::validation(format!("invalid value {v:?} for key {key:?}"))
                })
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?
            .ok_or_else(|| CliError::validation(format!("missing required key {key:?}")))
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        let unknown: Vec<&str> = self.keys().filter(|k| !allowed.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::validation(format!(
                "unknown keys: {}",
                unknown.join(", ")
            )))
        }
    }
}

fn parse_pair(line: &str) -> CliResult<(String, String)> {
    let (key, value) = line
        .split_once('=')
        .ok_or_else(|| CliError::parse(format!("expected key = value, found {line:?}")))?;
    let key = key.trim();
    let value = value.trim();
    if !valid_key(key) {
        return Err(CliError::parse(format!("invalid key {key:?}")));
    }
    if value.is_empty() {
        return Err(CliError::parse(format!("empty value for key {key:?}")));
    }
    Ok((key.to_string(), value.to_string()))
}
