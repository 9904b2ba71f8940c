//! Plain-text (TOML) configuration: rules, gas schedule, block time, link
//! latency, cross-region predicate, and encryption policy templates.

use std::collections::BTreeMap;

use rccpabe_core::scheme::Metadata;
use serde::{Deserialize, Serialize};

use crate::gas::{CallKind, GasSchedule};
use crate::rules::{ContextRule, RuleTable};
use crate::ChainError;

/// The committed default configuration.
pub const DEFAULT_CONFIG: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/default.toml"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSection {
    pub block_time_ms: u64,
    /// Metadata `key = value` pairs that all must match for a record to be
    /// mirrored to the relay's cross-region index.
    #[serde(default)]
    pub cross_region: BTreeMap<String, String>,
    #[serde(default)]
    pub embed_cross_region: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyTemplates {
    pub strict: String,
    pub minimal: String,
}

impl PolicyTemplates {
    /// Policy text for a flag value, with `<region>` substituted.
    pub fn for_flag(&self, flag: bool, region: &str) -> String {
        let t = if flag { &self.strict } else { &self.minimal };
        t.replace("<region>", region)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub base_ms: u64,
    #[serde(default)]
    pub jitter_ms: u64,
}

impl LinkModel {
    pub fn max_ms(&self) -> u64 {
        self.base_ms + self.jitter_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub chain: ChainSection,
    pub policies: PolicyTemplates,
    #[serde(default)]
    pub rules: Vec<ContextRule>,
    pub links: LinkModel,
    pub gas: GasSchedule,
}

impl ChainConfig {
    pub fn from_toml(text: &str) -> Result<Self, ChainError> {
        let cfg: ChainConfig = toml::from_str(text).map_err(|e| ChainError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.chain.block_time_ms == 0 {
            return Err(ChainError::Config("block_time_ms must be positive".into()));
        }
        if let Some(k) = self.chain.cross_region.keys().find(|k| !matches!(k.as_str(), "event" | "region")) {
            return Err(ChainError::Config(format!("cross_region key `{k}` (expected event or region)")));
        }
        self.gas.validate()?;
        if let Some(k) = CallKind::ALL.iter().find(|k| !self.gas.calls.contains_key(k)) {
            return Err(ChainError::Config(format!("gas schedule lacks {k}")));
        }
        Ok(())
    }

    pub fn rule_table(&self) -> RuleTable {
        RuleTable { rules: self.rules.clone() }
    }

    pub fn is_cross_region(&self, md: &Metadata) -> bool {
        !self.chain.cross_region.is_empty()
            && self.chain.cross_region.iter().all(|(k, v)| match k.as_str() {
                "event" => &md.event == v,
                "region" => &md.region == v,
                _ => false,
            })
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig::from_toml(DEFAULT_CONFIG).expect("committed default config is valid")
    }
}
