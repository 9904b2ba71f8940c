//! Deterministic gas accounting: `gas = base + per_byte·bytes + per_index·updates`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ChainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CallKind {
    #[serde(rename = "evaluatePolicy")]
    EvaluatePolicy,
    #[serde(rename = "uploadCiphertext")]
    UploadCiphertext,
    #[serde(rename = "revokeAttribute")]
    RevokeAttribute,
    #[serde(rename = "publish")]
    Publish,
    #[serde(rename = "search")]
    Search,
}

impl CallKind {
    pub const ALL: [CallKind; 5] =
        [CallKind::EvaluatePolicy, CallKind::UploadCiphertext, CallKind::RevokeAttribute, CallKind::Publish, CallKind::Search];

    pub fn as_str(&self) -> &'static str {
        match self {
            CallKind::EvaluatePolicy => "evaluatePolicy",
            CallKind::UploadCiphertext => "uploadCiphertext",
            CallKind::RevokeAttribute => "revokeAttribute",
            CallKind::Publish => "publish",
            CallKind::Search => "search",
        }
    }
}

impl fmt::Display for CallKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CallKind {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CallKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| ChainError::UnknownCall(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCost {
    pub base: u64,
    #[serde(default)]
    pub per_byte: u64,
    #[serde(default)]
    pub per_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSchedule {
    #[serde(default = "default_gas_price")]
    pub gas_price_gwei: u64,
    pub calls: BTreeMap<CallKind, CallCost>,
}

fn default_gas_price() -> u64 {
    20
}

impl GasSchedule {
    pub fn validate(&self) -> Result<(), ChainError> {
        if self.gas_price_gwei == 0 {
            return Err(ChainError::Config("gas price must be positive".into()));
        }
        match self.calls.iter().find(|(_, c)| c.base == 0) {
            Some((k, _)) => Err(ChainError::Config(format!("base gas for {k} must be positive"))),
            None => Ok(()),
        }
    }

    /// Pure formula evaluation.
    pub fn gas(&self, kind: CallKind, bytes: u64, updates: u64) -> Result<u64, ChainError> {
        let c = self.calls.get(&kind).ok_or_else(|| ChainError::UnknownCall(kind.to_string()))?;
        Ok(c.base + c.per_byte * bytes + c.per_index * updates)
    }

    /// Looks the call up by its contract name.
    pub fn meter(&self, kind: &str, bytes: u64, updates: u64) -> Result<u64, ChainError> {
        self.gas(kind.parse()?, bytes, updates)
    }

    pub fn fee_gwei(&self, gas: u64) -> u64 {
        gas * self.gas_price_gwei
    }
}

/// One applied contract call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub call: u64,
    pub kind: CallKind,
    pub bytes: u64,
    pub updates: u64,
    pub gas: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seq: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CallReceipt {
    pub call: u64,
    pub gas: u64,
    pub fee_gwei: u64,
    /// Requests already queued ahead in the current block slot.
    pub queue_position: u64,
}

/// Schedule plus the journal of every charged call.
#[derive(Debug, Clone, PartialEq)]
pub struct GasMeter {
    pub schedule: GasSchedule,
    journal: Vec<JournalRecord>,
}

impl GasMeter {
    pub fn new(schedule: GasSchedule) -> Self {
        GasMeter { schedule, journal: Vec::new() }
    }

    pub fn charge(
        &mut self,
        kind: CallKind,
        bytes: u64,
        updates: u64,
        queue_position: u64,
        seq: Option<u64>,
    ) -> Result<CallReceipt, ChainError> {
        let gas = self.schedule.gas(kind, bytes, updates)?;
        let call = self.journal.len() as u64;
        self.journal.push(JournalRecord { call, kind, bytes, updates, gas, seq });
        Ok(CallReceipt { call, gas, fee_gwei: self.schedule.fee_gwei(gas), queue_position })
    }

    pub fn journal(&self) -> &[JournalRecord] {
        &self.journal
    }

    pub fn total_gas(&self) -> u64 {
        self.journal.iter().map(|r| r.gas).sum()
    }

    /// Line-delimited JSON, one record per applied call.
    pub fn write_journal<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.journal {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_journal(text: &str) -> Result<Vec<JournalRecord>, ChainError> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| ChainError::Format(format!("journal: {e}"))))
            .collect()
    }

    pub fn restore_journal(&mut self, records: Vec<JournalRecord>) {
        self.journal = records;
    }
}
