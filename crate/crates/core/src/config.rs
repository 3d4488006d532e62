//! JSON system configuration.
//!
//! ```json
//! {
//!   "alphabet": 2,
//!   "transitions": [[1, 1], [1, 0]],
//!   "potentials": {
//!     "psi0": { "memory": 2, "values": { "00": 0.0, "01": -1.0, "10": -1.0 } }
//!   }
//! }
//! ```
//!
//! Block strings use one character per symbol (`0-9`, then `a-z`). Each
//! table must list every admissible block of its memory exactly once.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::error::Error;
use crate::potentials::Potential;
use crate::sft::{admissible_blocks, build_sft, Block, Sft};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{location}: {message}")]
    Validation { location: String, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alphabet: usize,
    transitions: Vec<Vec<u8>>,
    #[serde(default)]
    potentials: BTreeMap<String, RawPotential>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    memory: usize,
    values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub sft: Sft,
    pub potentials: BTreeMap<String, Potential>,
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        location: location.into(),
        message: message.into(),
    }
}

fn build_potential(sft: &Sft, name: &str, raw: &RawPotential) -> Result<Potential, ConfigError> {
    let location = format!("potentials.{name}");
    if raw.memory == 0 {
        return Err(invalid(&location, "memory must be at least 1"));
    }
    let admissible = admissible_blocks(sft, raw.memory).map_err(|e| invalid(&location, e.to_string()))?;
    let mut entries = Vec::with_capacity(raw.values.len());
    for (key, &value) in &raw.values {
        let block = Block::parse(key)
            .filter(|b| b.symbols().iter().all(|&s| s < sft.alphabet_size()))
            .ok_or_else(|| invalid(&location, format!("{key} is not a block over the alphabet")))?;
        if block.len() != raw.memory {
            return Err(invalid(
                &location,
                format!("{key} has length {}, expected {}", block.len(), raw.memory),
            ));
        }
        if !sft.is_admissible(block.symbols()) {
            return Err(invalid(&location, format!("{key} inadmissible")));
        }
        entries.push((block, value));
    }
    let missing: Vec<String> = admissible
        .iter()
        .filter(|b| !raw.values.contains_key(&b.to_string()))
        .map(|b| b.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(invalid(&location, format!("missing block(s) {}", missing.join(", "))));
    }
    Potential::from_blocks(sft, raw.memory, entries).map_err(|e: Error| invalid(&location, e.to_string()))
}

/// Parses and validates a configuration from JSON text.
pub fn parse_config_str(text: &str) -> Result<SystemConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    if raw.alphabet > 36 {
        return Err(invalid("alphabet", "at most 36 symbols can be written as block strings"));
    }
    let sft = build_sft(raw.alphabet, &raw.transitions).map_err(|e| invalid("transitions", e.to_string()))?;
    let potentials = raw
        .potentials
        .iter()
        .map(|(name, p)| build_potential(&sft, name, p).map(|pot| (name.clone(), pot)))
        .collect::<Result<_, _>>()?;
    Ok(SystemConfig { sft, potentials })
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<SystemConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text)
}
