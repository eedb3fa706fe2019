//! Scenario configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stein_lab::FamilySpec;
use thiserror::Error;

use crate::checks;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("scenario {scenario:?}: {message}")]
    Invalid { scenario: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub null_family: FamilySpec,
    pub alt_family: FamilySpec,
    pub eps: f64,
    pub n_max: usize,
    pub checks: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Sample budget for Monte-Carlo diagnostics.
    #[serde(default)]
    pub samples: Option<usize>,
}

impl Scenario {
    fn invalid(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            scenario: self.name.clone(),
            message: message.into(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let name_ok = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !name_ok {
            return Err(self.invalid("name must be nonempty and use [A-Za-z0-9_-]"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(self.invalid(format!("eps={} outside (0,1)", self.eps)));
        }
        if self.n_max == 0 {
            return Err(self.invalid("n_max must be at least 1"));
        }
        for (what, fam) in [("null_family", &self.null_family), ("alt_family", &self.alt_family)] {
            fam.validate().map_err(|e| self.invalid(format!("{what}: {e}")))?;
        }
        let (k0, k1) = (
            self.null_family.alphabet_size().expect("validated"),
            self.alt_family.alphabet_size().expect("validated"),
        );
        if k0 != k1 {
            return Err(self.invalid(format!("families use {k0} and {k1} symbols")));
        }
        if self.checks.is_empty() {
            return Err(self.invalid("no checks listed"));
        }
        for id in &self.checks {
            let check = checks::find(id).ok_or_else(|| self.invalid(format!("unknown check {id:?}")))?;
            (check.applies)(self).map_err(|m| self.invalid(format!("{id}: {m}")))?;
        }
        Ok(())
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(cfg.schema_version));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &cfg.scenarios {
            s.validate()?;
            if !names.insert(s.name.as_str()) {
                return Err(s.invalid("duplicate scenario name"));
            }
        }
        if cfg.scenarios.is_empty() {
            return Err(ConfigError::Invalid {
                scenario: String::new(),
                message: "no scenarios".into(),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "schema_version": 1,
        "scenarios": [{
            "name": "s",
            "null_family": {"kind": "simple_iid", "p": [0.8, 0.2]},
            "alt_family": {"kind": "simple_iid", "p": [0.5, 0.5]},
            "eps": 0.2, "n_max": 3, "checks": ["stein-sequence"], "seed": 4
        }]
    }"#;

    #[test]
    fn parses_good_config() {
        let cfg = Config::parse(GOOD).unwrap();
        assert_eq!(cfg.scenarios[0].seed, 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(Config::parse("{"), Err(ConfigError::Parse(_))));
        let bad_eps = GOOD.replace("0.2, \"n_max\"", "1.5, \"n_max\"");
        assert!(matches!(Config::parse(&bad_eps), Err(ConfigError::Invalid { .. })));
        let bad_check = GOOD.replace("stein-sequence", "nope");
        assert!(matches!(Config::parse(&bad_check), Err(ConfigError::Invalid { .. })));
        let bad_schema = GOOD.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(Config::parse(&bad_schema), Err(ConfigError::Schema(9))));
        let mismatch = GOOD.replace("[0.5, 0.5]", "[0.5, 0.25, 0.25]");
        assert!(Config::parse(&mismatch).is_err());
    }
}
