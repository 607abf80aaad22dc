//! Experiment configuration files.

use std::path::{Path, PathBuf};

use lexicase_core::evolve::RunConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Top-level `evolve` configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    /// Directory receiving one subdirectory per experiment.
    pub output: Option<PathBuf>,
    /// Runs per experiment; run `r` uses seed `seed + r`.
    pub runs: usize,
    pub experiments: Vec<Experiment>,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            output: None,
            runs: 1,
            experiments: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    #[serde(default)]
    pub config: RunConfig,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text)
    }

    /// Parses and validates a configuration, rejecting unknown keys.
    pub fn parse(text: &str) -> Result<Self> {
        let mut unknown = Vec::new();
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: CliConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
            .map_err(|e| CliError::Schema(e.to_string()))?;
        if !unknown.is_empty() {
            return Err(CliError::Schema(format!("unknown keys: {}", unknown.join(", "))));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(CliError::Schema("runs must be at least 1".into()));
        }
        if self.experiments.is_empty() {
            return Err(CliError::Schema("experiments must not be empty".into()));
        }
        let mut names: Vec<&str> = Vec::new();
        for e in &self.experiments {
            let safe = !e.name.is_empty()
                && e.name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !safe {
                return Err(CliError::Schema(format!(
                    "experiment name `{}` must be nonempty ASCII letters, digits, `-` or `_`",
                    e.name
                )));
            }
            if names.contains(&e.name.as_str()) {
                return Err(CliError::Schema(format!("duplicate experiment name `{}`", e.name)));
            }
            names.push(&e.name);
            e.config
                .validate()
                .map_err(|err| CliError::Schema(format!("experiment `{}`: {err}", e.name)))?;
        }
        Ok(())
    }
}
