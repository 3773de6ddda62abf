use std::path::Path;

use anyhow::Context;
use chrono::NaiveDate;
use clap::ValueEnum;
use rationale_core::attribution::{Quadrature, DEFAULT_STEPS};
use rationale_core::corpus::CorpusPatterns;
use rationale_core::model::TrainConfig;
use rationale_core::synthetic::SyntheticConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

/// Every tunable of the pipeline. Loaded from TOML, then overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Default seed for every stochastic step whose section sets none.
    pub seed: Option<u64>,
    /// Ordered article labels; the bundled list when absent.
    pub labels: Option<Vec<String>>,
    pub patterns: CorpusPatterns,
    pub split: SplitConfig,
    pub synthetic: SyntheticConfig,
    pub train: TrainConfig,
    pub attribute: AttributeConfig,
    pub binarize: BinarizeConfig,
    pub stats: StatsConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub cut1: Option<NaiveDate>,
    pub cut2: Option<NaiveDate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    #[default]
    Trapezoid,
    LeftRiemann,
}

impl From<Rule> for Quadrature {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Trapezoid => Quadrature::Trapezoid,
            Rule::LeftRiemann => Quadrature::LeftRiemann,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeConfig {
    pub steps: usize,
    pub rule: Rule,
}

impl Default for AttributeConfig {
    fn default() -> Self {
        AttributeConfig {
            steps: DEFAULT_STEPS,
            rule: Rule::Trapezoid,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinarizeConfig {
    /// Fixed share of content words to mark; per-annotator density when absent.
    pub density: Option<f64>,
    /// Seed of the random baseline.
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub welch: bool,
}

const SEEDED_SECTIONS: [&str; 3] = ["synthetic", "train", "binarize"];

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| UsageError(format!("{}: {e:#}", path.display())).into())
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let mut value: toml::Table = toml::from_str(text)?;
        if let Some(seed) = value.get("seed").cloned() {
            for section in SEEDED_SECTIONS {
                let table = value
                    .entry(section)
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .with_context(|| format!("`{section}` must be a table"))?;
                table.entry("seed").or_insert(seed.clone());
            }
        }
        Ok(toml::Value::Table(value).try_into()?)
    }

    /// Canonical JSON of the effective configuration.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_json().to_string().as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
