//! Experiment configuration files (TOML).
//!
//! ```toml
//! name = "dm1"
//! seed = 42
//! replications = 100000
//! alpha = 0.001
//! n_values = [0, 1, 2]
//! claims = ["gw-lower", "gim1-upper", "two-sided"]
//!
//! [model]
//! interarrival = { family = "deterministic", value = 1.0 }
//! service = { family = "exponential", rate = 1.25 }
//!
//! [output]
//! path = "dm1-report.json"
//! format = "json"
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::SystemModel;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::ordering::DEFAULT_ALPHA;

pub const DEFAULT_REPLICATIONS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    GwLower,
    GwUpper,
    Compound,
    Gim1Upper,
    TwoSided,
    #[serde(rename = "lemma-4.1-monotonicity")]
    DistanceMonotonicity,
    WaldConsistency,
    MeanBounds,
}

impl ClaimKind {
    pub const ALL: [ClaimKind; 8] = [
        ClaimKind::GwLower,
        ClaimKind::GwUpper,
        ClaimKind::Compound,
        ClaimKind::Gim1Upper,
        ClaimKind::TwoSided,
        ClaimKind::DistanceMonotonicity,
        ClaimKind::WaldConsistency,
        ClaimKind::MeanBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClaimKind::GwLower => "gw-lower",
            ClaimKind::GwUpper => "gw-upper",
            ClaimKind::Compound => "compound",
            ClaimKind::Gim1Upper => "gim1-upper",
            ClaimKind::TwoSided => "two-sided",
            ClaimKind::DistanceMonotonicity => "lemma-4.1-monotonicity",
            ClaimKind::WaldConsistency => "wald-consistency",
            ClaimKind::MeanBounds => "mean-bounds",
        }
    }
}

impl fmt::Display for ClaimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClaimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClaimKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown claim `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Interarrival and service laws; the buffer size comes from `n_values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub interarrival: DistributionSpec,
    pub service: DistributionSpec,
}

impl ModelConfig {
    pub fn with_buffer(&self, n: u32) -> SystemModel {
        SystemModel::finite(self.interarrival.clone(), self.service.clone(), n)
    }

    /// Reads a model file: either top-level `interarrival`/`service` keys or a
    /// `[model]` table (so experiment configs double as model files).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wrapped {
            model: ModelConfig,
        }
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if table.contains_key("model") {
            toml::from_str::<Wrapped>(text)
                .map(|w| w.model)
                .map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

fn default_replications() -> u64 {
    DEFAULT_REPLICATIONS
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub n_values: Vec<u32>,
    pub claims: Vec<ClaimKind>,
    pub model: ModelConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Parses and validates; parse errors carry the line and column.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate().map_err(|e| anchor(text, e))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.claims.is_empty() {
            return Err(Error::Config("`claims` must list at least one claim".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("`n_values` must list at least one buffer size".into()));
        }
        let mut seen = self.claims.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.claims.len() {
            return Err(Error::Config("`claims` lists a claim more than once".into()));
        }
        let mut ns = self.n_values.clone();
        ns.sort();
        ns.dedup();
        if ns.len() != self.n_values.len() {
            return Err(Error::Config("`n_values` lists a buffer size more than once".into()));
        }
        if self.replications < 2 {
            return Err(Error::Config("`replications` must be at least 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("`alpha` must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// Buffer sizes in increasing order.
    pub fn sorted_n_values(&self) -> Vec<u32> {
        let mut ns = self.n_values.clone();
        ns.sort_unstable();
        ns
    }
}

/// Prefixes a validation message naming `` `key` `` with the line the key is on.
fn anchor(text: &str, err: Error) -> Error {
    let Error::Config(msg) = err else { return err };
    let key = msg.split('`').nth(1).unwrap_or_default();
    let line = text.lines().position(|l| {
        l.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    });
    match line {
        Some(i) if !key.is_empty() => Error::Config(format!("line {}: {msg}", i + 1)),
        _ => Error::Config(msg),
    }
}
