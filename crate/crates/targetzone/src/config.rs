//! TOML configuration. Top-level keys `threads` and `data_dir` apply to every command;
//! a table named after a subcommand supplies its flags, e.g.
//!
//! ```toml
//! threads = 4
//!
//! [estimate]
//! bins = 60
//! min_count = 20
//! ```
//!
//! Flags given on the command line override the file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const COMMANDS: &[&str] = &[
    "simulate",
    "ingest",
    "estimate",
    "fit",
    "lrtest",
    "krugman-curve",
    "diffusion-profile",
    "backtest",
    "moment-scaling",
    "reproduce",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    table: toml::Table,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("config: {e}")))?;
        for (key, value) in &table {
            let ok = match key.as_str() {
                "threads" => value.as_integer().is_some_and(|n| n >= 1),
                "data_dir" => value.is_str(),
                name => COMMANDS.contains(&name) && value.is_table(),
            };
            if !ok {
                return Err(CliError::Usage(format!("config: unexpected or invalid key `{key}`")));
            }
        }
        Ok(Self { table })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(path.display()))
    }

    pub fn threads(&self) -> Option<usize> {
        self.table.get("threads").and_then(|v| v.as_integer()).map(|n| n as usize)
    }

    pub fn data_dir(&self) -> Option<PathBuf> {
        self.table.get("data_dir").and_then(|v| v.as_str()).map(PathBuf::from)
    }

    pub fn section(&self, command: &str) -> Option<&toml::Table> {
        self.table.get(command).and_then(|v| v.as_table())
    }
}

/// Overlays the non-null `flags` on the config `section` and deserializes the result.
/// The key `out` is split off and returned separately.
pub fn merge<P: DeserializeOwned>(section: Option<&toml::Table>, flags: &impl Serialize) -> Result<(P, Option<PathBuf>)> {
    let mut merged = match section {
        Some(t) => serde_json::to_value(t).map_err(|e| CliError::Usage(format!("config: {e}")))?,
        None => Value::Object(Default::default()),
    };
    let Value::Object(ref mut map) = merged else {
        unreachable!("a TOML table serializes to an object")
    };
    if let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? {
        for (k, v) in given {
            if !v.is_null() {
                map.insert(k, v);
            }
        }
    }
    let out = match map.remove("out") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(CliError::Usage(format!("`out` must be a path, got {other}"))),
        None => None,
    };
    let params = serde_json::from_value(merged).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((params, out))
}
