//! Relay chain: context rules, attribute registry, revocation list,
//! cross-region index and the gas meter.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rccpabe_core::scheme::{KeyId, Metadata, RevocationEntry, RevocationTarget};
use serde::{Deserialize, Serialize};

use crate::gas::{CallKind, CallReceipt, GasMeter, GasSchedule, JournalRecord};
use crate::rules::RuleTable;
use crate::ChainError;

pub type ContentId = [u8; 32];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexEntry {
    Pointer { region: String, record_id: ContentId },
    Embedded(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevocationRecord {
    pub seq: u64,
    pub entry: RevocationEntry,
}

impl RevocationRecord {
    fn encoded_len(&self) -> u64 {
        let target = match &self.entry.target {
            RevocationTarget::Key(k) => k.0.len(),
            RevocationTarget::User(u) => u.len(),
        };
        (8 + 1 + target + self.entry.reason.len()) as u64
    }
}

#[derive(Debug, Clone)]
pub struct RelayChain {
    pub rules: RuleTable,
    attributes: BTreeSet<String>,
    revocations: Vec<RevocationRecord>,
    by_target: HashMap<RevocationTarget, u64>,
    index: BTreeMap<ContentId, IndexEntry>,
    pp_store: Option<Vec<u8>>,
    meter: GasMeter,
    /// Calls already accepted in the current block slot.
    pending: u64,
}

impl RelayChain {
    pub fn new(rules: RuleTable, schedule: GasSchedule) -> Self {
        RelayChain {
            rules,
            attributes: BTreeSet::new(),
            revocations: Vec::new(),
            by_target: HashMap::new(),
            index: BTreeMap::new(),
            pp_store: None,
            meter: GasMeter::new(schedule),
            pending: 0,
        }
    }

    pub fn meter(&self) -> &GasMeter {
        &self.meter
    }

    /// Every call pays `per_index` for its own index writes plus one per
    /// request already queued ahead of it in the block slot.
    pub(crate) fn charge(
        &mut self,
        kind: CallKind,
        bytes: u64,
        updates: u64,
        seq: Option<u64>,
    ) -> Result<CallReceipt, ChainError> {
        let position = self.pending;
        let r = self.meter.charge(kind, bytes, updates + position, position, seq)?;
        self.pending += 1;
        Ok(r)
    }

    /// Block boundary: the ordering queue drains.
    pub fn end_block(&mut self) {
        self.pending = 0;
    }

    pub fn publish_pp(&mut self, pp_bytes: Vec<u8>) -> Result<CallReceipt, ChainError> {
        let r = self.charge(CallKind::Publish, pp_bytes.len() as u64, 1, None)?;
        self.pp_store = Some(pp_bytes);
        Ok(r)
    }

    pub fn public_params(&self) -> Option<&[u8]> {
        self.pp_store.as_deref()
    }

    pub fn register_attributes<I: IntoIterator<Item = String>>(&mut self, labels: I) {
        self.attributes.extend(labels);
    }

    pub fn attributes(&self) -> &BTreeSet<String> {
        &self.attributes
    }

    /// Read-only policy query, metered as a view call.
    pub fn evaluate_policy(&mut self, md: &Metadata) -> Result<(bool, CallReceipt), ChainError> {
        let flag = self.rules.evaluate(md)?;
        let r = self.charge(CallKind::EvaluatePolicy, md.to_record().len() as u64, 0, None)?;
        Ok((flag, r))
    }

    /// Appends an entry; a duplicate target returns the original sequence
    /// number and charges nothing.
    pub fn revoke(&mut self, entry: RevocationEntry) -> Result<(u64, Option<CallReceipt>), ChainError> {
        if let Some(&seq) = self.by_target.get(&entry.target) {
            return Ok((seq, None));
        }
        let seq = self.revocations.len() as u64 + 1;
        let rec = RevocationRecord { seq, entry };
        let r = self.charge(CallKind::RevokeAttribute, rec.encoded_len(), 1, Some(seq))?;
        self.by_target.insert(rec.entry.target.clone(), seq);
        self.revocations.push(rec);
        Ok((seq, Some(r)))
    }

    pub fn revocations(&self) -> &[RevocationRecord] {
        &self.revocations
    }

    pub fn revocation_seq(&self, target: &RevocationTarget) -> Option<u64> {
        self.by_target.get(target).copied()
    }

    pub fn is_key_revoked(&self, key: &KeyId) -> bool {
        self.by_target.contains_key(&RevocationTarget::Key(*key))
    }

    /// Mirrors a record into the cross-region index. Pointers must resolve.
    pub fn publish_cross_region(
        &mut self,
        content_id: ContentId,
        entry: IndexEntry,
        locator_exists: impl Fn(&str, &ContentId) -> bool,
    ) -> Result<CallReceipt, ChainError> {
        let bytes = match &entry {
            IndexEntry::Pointer { region, record_id } => {
                if !locator_exists(region, record_id) {
                    return Err(ChainError::Dangling { region: region.clone(), record: hex::encode(record_id) });
                }
                (region.len() + 32) as u64
            }
            IndexEntry::Embedded(ct) => ct.len() as u64,
        };
        let r = self.charge(CallKind::Publish, bytes, 1, None)?;
        self.index.insert(content_id, entry);
        Ok(r)
    }

    pub fn lookup(&self, content_id: &ContentId) -> Option<&IndexEntry> {
        self.index.get(content_id)
    }

    pub fn index_len(&self) -> usize {
        self.index.len()
    }

    pub fn to_json(&self) -> String {
        let snap = Snapshot {
            rules: self.rules.clone(),
            attributes: self.attributes.iter().cloned().collect(),
            revocations: self.revocations.iter().map(SnapRevocation::from).collect(),
            index: self.index.iter().map(|(k, v)| (hex::encode(k), SnapIndex::from(v))).collect(),
            pp: self.pp_store.as_ref().map(hex::encode),
            schedule: self.meter.schedule.clone(),
            journal: self.meter.journal().to_vec(),
        };
        serde_json::to_string_pretty(&snap).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ChainError> {
        let bad = |m: String| ChainError::Format(format!("relay state: {m}"));
        let snap: Snapshot = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let mut relay = RelayChain::new(snap.rules, snap.schedule);
        relay.attributes = snap.attributes.into_iter().collect();
        for (i, r) in snap.revocations.into_iter().enumerate() {
            let rec = r.into_record().ok_or_else(|| bad("revocation entry".into()))?;
            if rec.seq != i as u64 + 1 {
                return Err(bad(format!("revocation sequence gap at {}", rec.seq)));
            }
            relay.by_target.insert(rec.entry.target.clone(), rec.seq);
            relay.revocations.push(rec);
        }
        for (k, v) in snap.index {
            let id: ContentId = hex::decode(&k).ok().and_then(|b| b.try_into().ok()).ok_or_else(|| bad(k.clone()))?;
            relay.index.insert(id, v.into_entry().ok_or_else(|| bad(format!("index entry {k}")))?);
        }
        relay.pp_store = snap.pp.map(|h| hex::decode(h).map_err(|e| bad(e.to_string()))).transpose()?;
        relay.meter.restore_journal(snap.journal);
        Ok(relay)
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    rules: RuleTable,
    attributes: Vec<String>,
    revocations: Vec<SnapRevocation>,
    index: BTreeMap<String, SnapIndex>,
    pp: Option<String>,
    schedule: GasSchedule,
    journal: Vec<JournalRecord>,
}

#[derive(Serialize, Deserialize)]
struct SnapRevocation {
    seq: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    key: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    user: Option<String>,
    reason: String,
}

impl From<&RevocationRecord> for SnapRevocation {
    fn from(r: &RevocationRecord) -> Self {
        let (key, user) = match &r.entry.target {
            RevocationTarget::Key(k) => (Some(k.to_hex()), None),
            RevocationTarget::User(u) => (None, Some(hex::encode(u))),
        };
        SnapRevocation { seq: r.seq, key, user, reason: r.entry.reason.clone() }
    }
}

impl SnapRevocation {
    fn into_record(self) -> Option<RevocationRecord> {
        let target = match (self.key, self.user) {
            (Some(k), None) => RevocationTarget::Key(KeyId::from_hex(&k)?),
            (None, Some(u)) => RevocationTarget::User(hex::decode(u).ok()?),
            _ => return None,
        };
        Some(RevocationRecord { seq: self.seq, entry: RevocationEntry { target, reason: self.reason } })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SnapIndex {
    Pointer { region: String, record_id: String },
    Embedded { ciphertext: String },
}

impl From<&IndexEntry> for SnapIndex {
    fn from(e: &IndexEntry) -> Self {
        match e {
            IndexEntry::Pointer { region, record_id } => {
                SnapIndex::Pointer { region: region.clone(), record_id: hex::encode(record_id) }
            }
            IndexEntry::Embedded(ct) => SnapIndex::Embedded { ciphertext: hex::encode(ct) },
        }
    }
}

impl SnapIndex {
    fn into_entry(self) -> Option<IndexEntry> {
        Some(match self {
            SnapIndex::Pointer { region, record_id } => {
                IndexEntry::Pointer { region, record_id: hex::decode(record_id).ok()?.try_into().ok()? }
            }
            SnapIndex::Embedded { ciphertext } => IndexEntry::Embedded(hex::decode(ciphertext).ok()?),
        })
    }
}
