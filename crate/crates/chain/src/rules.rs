//! Context rules mapping ciphertext metadata to the security flag.

use std::fmt;
use std::str::FromStr;

use rccpabe_core::scheme::Metadata;
use serde::{Deserialize, Serialize};

use crate::ChainError;

/// `*` (anything), `pre*` (prefix), `a|b` (alternatives), or an exact value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Pattern(String);

impl Pattern {
    pub fn any() -> Self {
        Pattern("*".into())
    }

    pub fn matches(&self, value: &str) -> bool {
        self.0.split('|').any(|alt| match alt.strip_suffix('*') {
            Some(prefix) => value.starts_with(prefix),
            None => alt == value,
        })
    }
}

impl TryFrom<String> for Pattern {
    type Error = ChainError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s.is_empty() || s.split('|').any(|a| a.is_empty() || a[..a.len() - 1].contains('*')) {
            return Err(ChainError::Config(format!("bad pattern `{s}`")));
        }
        Ok(Pattern(s))
    }
}

impl From<Pattern> for String {
    fn from(p: Pattern) -> String {
        p.0
    }
}

/// Hour-of-day window `HH-HH` (start inclusive, end exclusive, may wrap
/// past midnight) or `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HourWindow(Option<(u8, u8)>);

impl HourWindow {
    pub fn any() -> Self {
        HourWindow(None)
    }

    pub fn contains(&self, hour: u8) -> bool {
        match self.0 {
            None => true,
            Some((s, e)) if s <= e => (s..e).contains(&hour),
            Some((s, e)) => hour >= s || hour < e,
        }
    }
}

impl FromStr for HourWindow {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "*" {
            return Ok(HourWindow(None));
        }
        let bad = || ChainError::Config(format!("bad hour window `{s}`"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let (a, b): (u8, u8) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if a > 23 || b > 24 || a == b {
            return Err(bad());
        }
        Ok(HourWindow(Some((a, b))))
    }
}

impl TryFrom<String> for HourWindow {
    type Error = ChainError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<HourWindow> for String {
    fn from(w: HourWindow) -> String {
        w.to_string()
    }
}

impl fmt::Display for HourWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => f.write_str("*"),
            Some((a, b)) => write!(f, "{a:02}-{b:02}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextRule {
    #[serde(default = "Pattern::any")]
    pub event: Pattern,
    #[serde(default = "Pattern::any")]
    pub region: Pattern,
    #[serde(default = "HourWindow::any")]
    pub hours: HourWindow,
    pub flag: bool,
}

impl ContextRule {
    pub fn matches(&self, md: &Metadata) -> bool {
        self.event.matches(&md.event) && self.region.matches(&md.region) && self.hours.contains(hour_of_day(md.time))
    }
}

/// UTC hour for a timestamp in seconds.
pub fn hour_of_day(time: u64) -> u8 {
    ((time / 3600) % 24) as u8
}

/// Ordered rule list with first-match semantics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTable {
    pub rules: Vec<ContextRule>,
}

impl RuleTable {
    /// First matching rule's flag; `true` when nothing matches.
    pub fn evaluate(&self, md: &Metadata) -> Result<bool, ChainError> {
        md.validate().map_err(|e| ChainError::Query(e.to_string()))?;
        Ok(self.rules.iter().find(|r| r.matches(md)).map_or(true, |r| r.flag))
    }
}
