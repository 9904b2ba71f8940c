//! Per-region ledger: stores ciphertext records, runs the search contract,
//! and enforces relay revocations from the last applied sequence number.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use rccpabe_core::lsss::find_reconstruction;
use rccpabe_core::scheme::{
    search, verify_ciphertext, CertStatus, Certificate, CiphertextRecord, KeyId, PublicKeyShadow, PublicParams,
    RevocationEntry, RevocationTarget, SearchResult, Trapdoor, VerifyingKey,
};

use crate::ledger::{audit_ledger, encode_ledger, record_id, AuditReport, Block, StoredEntry};
use crate::relay::{ContentId, RevocationRecord};
use crate::ChainError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub record_id: ContentId,
    pub ciphertext: CiphertextRecord,
    pub uploader: Vec<u8>,
}

impl LedgerEntry {
    pub fn policy_text(&self) -> &str {
        &self.ciphertext.policy.source
    }
}

/// Conjunction of metadata `key=value` constraints (`event`, `region`,
/// `time`, `flag`). The empty filter admits everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScopeFilter {
    pub terms: Vec<(String, String)>,
}

impl ScopeFilter {
    pub fn all() -> Self {
        ScopeFilter::default()
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.terms.push((key.into(), value.into()));
        self
    }

    pub fn admits(&self, ct: &CiphertextRecord) -> bool {
        self.terms.iter().all(|(k, v)| match k.as_str() {
            "event" => &ct.metadata.event == v,
            "region" => &ct.metadata.region == v,
            "time" => ct.metadata.time.to_string() == *v,
            "flag" => ct.flag.to_string() == *v,
            _ => false,
        })
    }
}

impl FromStr for ScopeFilter {
    type Err = ChainError;

    /// Parses `k=v` terms separated by commas or whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut f = ScopeFilter::all();
        for term in s.split([',', ' ']).filter(|t| !t.is_empty()) {
            let (k, v) = term.split_once('=').ok_or_else(|| ChainError::Query(format!("scope term `{term}`")))?;
            if !matches!(k, "event" | "region" | "time" | "flag") {
                return Err(ChainError::Query(format!("unknown scope key `{k}`")));
            }
            f = f.with(k, v);
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub bundles: Vec<(ContentId, SearchResult)>,
    /// Records that passed the scope filter.
    pub scanned: u64,
    /// Total reconstruction rows used across scanned records; drives gas.
    pub plan_rows: u64,
}

#[derive(Debug, Clone)]
pub struct RegionalChain {
    pub region: String,
    pp: PublicParams,
    ta_vk: VerifyingKey,
    blocks: Vec<Block>,
    entries: Vec<LedgerEntry>,
    by_id: HashMap<ContentId, usize>,
    mempool: Vec<LedgerEntry>,
    applied_seq: u64,
    inbox: BTreeMap<u64, RevocationEntry>,
    revoked_keys: BTreeSet<KeyId>,
    revoked_users: BTreeSet<Vec<u8>>,
    /// Revocation seq → block height at which it took effect.
    applied_at: BTreeMap<u64, u64>,
}

impl RegionalChain {
    pub fn new(region: &str, pp: PublicParams, ta_vk: VerifyingKey) -> Self {
        let genesis = Block::seal(region, None, 0, 0, Vec::new());
        RegionalChain {
            region: region.to_owned(),
            pp,
            ta_vk,
            blocks: vec![genesis],
            entries: Vec::new(),
            by_id: HashMap::new(),
            mempool: Vec::new(),
            applied_seq: 0,
            inbox: BTreeMap::new(),
            revoked_keys: BTreeSet::new(),
            revoked_users: BTreeSet::new(),
            applied_at: BTreeMap::new(),
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn head(&self) -> &Block {
        self.blocks.last().expect("genesis block")
    }

    pub fn applied_seq(&self) -> u64 {
        self.applied_seq
    }

    pub fn applied_at(&self, seq: u64) -> Option<u64> {
        self.applied_at.get(&seq).copied()
    }

    pub fn mempool_len(&self) -> usize {
        self.mempool.len()
    }

    pub fn is_key_revoked(&self, key: &KeyId) -> bool {
        self.revoked_keys.contains(key)
    }

    /// Gate checks, then queues the record for the next block.
    pub fn upload(&mut self, ct: &CiphertextRecord, uploader: &Certificate) -> Result<ContentId, ChainError> {
        if !uploader.verify(&self.ta_vk) || uploader.status != CertStatus::Valid {
            return Err(ChainError::Denied("uploader certificate is not valid".into()));
        }
        if self.revoked_users.contains(&uploader.user_id) {
            return Err(ChainError::Denied(format!("uploader `{}` is revoked", uploader.user_id_lossy())));
        }
        if ct.metadata.region != self.region {
            return Err(ChainError::Rejected(format!(
                "record for region `{}` uploaded to `{}`",
                ct.metadata.region, self.region
            )));
        }
        verify_ciphertext(&self.pp, ct).map_err(|e| ChainError::Rejected(e.to_string()))?;
        let id = record_id(&ct.to_bytes());
        if !self.by_id.contains_key(&id) && !self.mempool.iter().any(|e| e.record_id == id) {
            self.mempool.push(LedgerEntry { record_id: id, ciphertext: ct.clone(), uploader: uploader.user_id.clone() });
        }
        Ok(id)
    }

    /// Buffers markers and applies the contiguous run after `applied_seq`.
    /// Markers beyond a gap stay buffered.
    pub fn apply_revocations<I>(&mut self, markers: I) -> u64
    where
        I: IntoIterator<Item = RevocationRecord>,
    {
        for m in markers {
            if m.seq > self.applied_seq {
                self.inbox.insert(m.seq, m.entry);
            }
        }
        while let Some(entry) = self.inbox.remove(&(self.applied_seq + 1)) {
            self.applied_seq += 1;
            self.applied_at.insert(self.applied_seq, self.head().height + 1);
            match entry.target {
                RevocationTarget::Key(k) => {
                    self.revoked_keys.insert(k);
                }
                RevocationTarget::User(u) => {
                    self.revoked_users.insert(u);
                }
            }
        }
        self.applied_seq
    }

    /// Markers that arrived but are waiting for a gap to fill.
    pub fn buffered_markers(&self) -> usize {
        self.inbox.len()
    }

    /// Seals the mempool into a new block.
    pub fn seal_block(&mut self, timestamp_ms: u64) -> &Block {
        let pending = std::mem::take(&mut self.mempool);
        let stored = pending
            .iter()
            .map(|e| StoredEntry {
                record_id: e.record_id,
                uploader: e.uploader.clone(),
                ct_bytes: e.ciphertext.to_bytes(),
            })
            .collect();
        let ts = timestamp_ms.max(self.head().timestamp_ms);
        let block = Block::seal(&self.region, Some(self.head()), ts, self.applied_seq, stored);
        self.blocks.push(block);
        for e in pending {
            self.by_id.insert(e.record_id, self.entries.len());
            self.entries.push(e);
        }
        self.head()
    }

    /// Sealed record lookup.
    pub fn get(&self, id: &ContentId) -> Option<&LedgerEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Plaintext-mode records are openly readable.
    pub fn read_plain(&self, id: &ContentId) -> Option<&[u8]> {
        self.get(id).filter(|e| !e.ciphertext.flag).map(|e| e.ciphertext.enc_payload.as_slice())
    }

    /// Search contract over sealed records in scope. A revoked requester is
    /// refused before any record is touched.
    pub fn execute_search(
        &self,
        td: &Trapdoor,
        pk: &PublicKeyShadow,
        scope: &ScopeFilter,
    ) -> Result<SearchOutcome, ChainError> {
        if self.revoked_keys.contains(&td.key_id()) || self.revoked_keys.contains(&pk.key_id) {
            return Err(ChainError::Denied(format!("key {} is revoked", td.key_id())));
        }
        if td.key_id() != pk.key_id {
            return Err(ChainError::Rejected("trapdoor and key shadow belong to different keys".into()));
        }
        let attrs = pk.attrs();
        let mut out = SearchOutcome { bundles: Vec::new(), scanned: 0, plan_rows: 0 };
        for e in self.entries.iter().filter(|e| scope.admits(&e.ciphertext)) {
            out.scanned += 1;
            let plan = find_reconstruction(&e.ciphertext.policy, &attrs);
            out.plan_rows += plan.as_ref().map_or(0, |p| p.rows.len() as u64);
            if let Some(bundle) = search(td, pk, &e.ciphertext, plan.as_ref())? {
                out.bundles.push((e.record_id, bundle));
            }
        }
        Ok(out)
    }

    pub fn to_ledger_bytes(&self) -> Vec<u8> {
        encode_ledger(&self.region, &self.blocks)
    }

    pub fn verify_chain(&self) -> AuditReport {
        audit_ledger(&self.to_ledger_bytes()).0
    }

    /// Rebuilds a chain from its ledger file. Revocation state is replayed
    /// from the relay list up to the sequence the head block recorded.
    pub fn from_ledger_bytes(
        bytes: &[u8],
        pp: PublicParams,
        ta_vk: VerifyingKey,
        relay_revocations: &[RevocationRecord],
    ) -> Result<Self, ChainError> {
        let (report, blocks) = audit_ledger(bytes);
        if let Some(d) = report.damage {
            return Err(ChainError::Format(format!("ledger audit failed: {d:?}")));
        }
        let region = report.region.expect("intact header");
        let mut chain = RegionalChain::new(&region, pp, ta_vk);
        if blocks.first() != chain.blocks.first() {
            return Err(ChainError::Format("genesis block mismatch".into()));
        }
        let mut last_seq = 0;
        for b in &blocks[1..] {
            let wanted: Vec<_> =
                relay_revocations.iter().filter(|r| r.seq > last_seq && r.seq <= b.applied_revocation_seq).cloned().collect();
            if wanted.len() as u64 != b.applied_revocation_seq - last_seq {
                return Err(ChainError::Format(format!("relay list lacks revocations up to {}", b.applied_revocation_seq)));
            }
            chain.apply_revocations(wanted);
            last_seq = b.applied_revocation_seq;
            for r in &b.records {
                let ciphertext = CiphertextRecord::from_bytes(&r.ct_bytes)?;
                chain.by_id.insert(r.record_id, chain.entries.len());
                chain.entries.push(LedgerEntry { record_id: r.record_id, ciphertext, uploader: r.uploader.clone() });
            }
            chain.blocks.push(b.clone());
        }
        // Heights recorded during replay are off by the batching; restore from blocks.
        chain.applied_at.clear();
        let mut prev = 0;
        for b in &chain.blocks {
            for s in prev + 1..=b.applied_revocation_seq {
                chain.applied_at.insert(s, b.height);
            }
            prev = b.applied_revocation_seq;
        }
        Ok(chain)
    }
}
