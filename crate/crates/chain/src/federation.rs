//! Relay plus regional chains on one virtual clock, connected by ordered
//! links with seeded latency.

use std::collections::BTreeMap;

use rand::Rng;
use rccpabe_core::pairing::{rng_from_seed, SeededRng};
use rccpabe_core::scheme::{
    Certificate, CiphertextRecord, Metadata, PublicKeyShadow, PublicParams, RevocationEntry, SearchResult, Trapdoor,
    VerifyingKey,
};

use crate::config::ChainConfig;
use crate::gas::{CallKind, CallReceipt};
use crate::regional::{RegionalChain, ScopeFilter};
use crate::relay::{ContentId, IndexEntry, RelayChain, RevocationRecord};
use crate::ChainError;

#[derive(Debug, Clone)]
struct InFlight {
    arrival_ms: u64,
    region: String,
    record: RevocationRecord,
}

#[derive(Debug, Clone)]
pub struct Federation {
    pub config: ChainConfig,
    pub relay: RelayChain,
    regions: BTreeMap<String, RegionalChain>,
    clock_ms: u64,
    next_boundary_ms: u64,
    in_flight: Vec<InFlight>,
    pending_publish: Vec<(String, ContentId)>,
    issued_at: BTreeMap<u64, u64>,
    link_rng: SeededRng,
}

impl Federation {
    pub fn new(config: ChainConfig, pp: &PublicParams, ta_vk: VerifyingKey, regions: &[&str], seed: &[u8]) -> Self {
        let mut relay = RelayChain::new(config.rule_table(), config.gas.clone());
        relay.publish_pp(pp.to_bytes()).expect("publish is in every validated schedule");
        let regions = regions.iter().map(|r| (r.to_string(), RegionalChain::new(r, pp.clone(), ta_vk))).collect();
        let mut link_seed = b"links/".to_vec();
        link_seed.extend_from_slice(seed);
        Federation {
            next_boundary_ms: config.chain.block_time_ms,
            config,
            relay,
            regions,
            clock_ms: 0,
            in_flight: Vec::new(),
            pending_publish: Vec::new(),
            issued_at: BTreeMap::new(),
            link_rng: rng_from_seed(&link_seed),
        }
    }

    /// Resumes from persisted relay and regional state. The clock restarts at
    /// the latest sealed block; nothing is in flight.
    pub fn restore(config: ChainConfig, relay: RelayChain, regions: Vec<RegionalChain>, seed: &[u8]) -> Self {
        let clock_ms = regions.iter().map(|r| r.head().timestamp_ms).max().unwrap_or(0);
        let block = config.chain.block_time_ms;
        let mut link_seed = b"links/".to_vec();
        link_seed.extend_from_slice(seed);
        Federation {
            next_boundary_ms: (clock_ms / block + 1) * block,
            config,
            relay,
            regions: regions.into_iter().map(|r| (r.region.clone(), r)).collect(),
            clock_ms,
            in_flight: Vec::new(),
            pending_publish: Vec::new(),
            issued_at: BTreeMap::new(),
            link_rng: rng_from_seed(&link_seed),
        }
    }

    pub fn now_ms(&self) -> u64 {
        self.clock_ms
    }

    pub fn block_time_ms(&self) -> u64 {
        self.config.chain.block_time_ms
    }

    pub fn region(&self, name: &str) -> Result<&RegionalChain, ChainError> {
        self.regions.get(name).ok_or_else(|| ChainError::UnknownRegion(name.into()))
    }

    fn region_mut(&mut self, name: &str) -> Result<&mut RegionalChain, ChainError> {
        self.regions.get_mut(name).ok_or_else(|| ChainError::UnknownRegion(name.into()))
    }

    pub fn regions(&self) -> impl Iterator<Item = &RegionalChain> {
        self.regions.values()
    }

    /// Runs every block boundary up to `t`: deliver arrived markers, apply
    /// them, seal, then publish cross-region pointers for sealed records.
    pub fn advance_to(&mut self, t: u64) {
        while self.next_boundary_ms <= t {
            let b = self.next_boundary_ms;
            let (arrived, later): (Vec<_>, Vec<_>) = self.in_flight.drain(..).partition(|m| m.arrival_ms <= b);
            self.in_flight = later;
            for m in arrived {
                if let Some(r) = self.regions.get_mut(&m.region) {
                    r.apply_revocations([m.record]);
                }
            }
            for r in self.regions.values_mut() {
                r.seal_block(b);
            }
            self.relay.end_block();
            for (region, id) in std::mem::take(&mut self.pending_publish) {
                let regions = &self.regions;
                let _ = self.relay.publish_cross_region(
                    id,
                    IndexEntry::Pointer { region: region.clone(), record_id: id },
                    |reg, rid| regions.get(reg).is_some_and(|c| c.get(rid).is_some()),
                );
            }
            self.next_boundary_ms += self.config.chain.block_time_ms;
        }
        self.clock_ms = self.clock_ms.max(t);
    }

    pub fn advance_blocks(&mut self, n: u64) {
        self.advance_to(self.next_boundary_ms + (n.max(1) - 1) * self.config.chain.block_time_ms);
    }

    pub fn evaluate_policy(&mut self, md: &Metadata) -> Result<(bool, CallReceipt), ChainError> {
        self.relay.evaluate_policy(md)
    }

    /// Uploads to `region`; records matching the cross-region predicate are
    /// indexed on the relay (embedded now, or as a pointer once sealed).
    pub fn upload(
        &mut self,
        region: &str,
        ct: &CiphertextRecord,
        uploader: &Certificate,
    ) -> Result<(ContentId, CallReceipt), ChainError> {
        if self.relay.revocation_seq(&rccpabe_core::scheme::RevocationTarget::User(uploader.user_id.clone())).is_some() {
            return Err(ChainError::Denied(format!("uploader `{}` is revoked", uploader.user_id_lossy())));
        }
        let id = self.region_mut(region)?.upload(ct, uploader)?;
        let bytes = ct.to_bytes();
        let receipt = self.relay.charge(CallKind::UploadCiphertext, bytes.len() as u64, 1, None)?;
        if self.config.is_cross_region(&ct.metadata) {
            if self.config.chain.embed_cross_region {
                self.relay.publish_cross_region(id, IndexEntry::Embedded(bytes), |_, _| true)?;
            } else {
                self.pending_publish.push((region.to_owned(), id));
            }
        }
        Ok((id, receipt))
    }

    /// Appends to the relay list and sends a marker to every region.
    pub fn revoke(&mut self, entry: RevocationEntry) -> Result<(u64, Option<CallReceipt>), ChainError> {
        let (seq, receipt) = self.relay.revoke(entry)?;
        if receipt.is_some() {
            let record = self.relay.revocations()[seq as usize - 1].clone();
            self.issued_at.insert(seq, self.clock_ms);
            let links = self.config.links;
            for region in self.regions.keys() {
                let delay = links.base_ms + self.link_rng.gen_range(0..=links.jitter_ms);
                self.in_flight.push(InFlight { arrival_ms: self.clock_ms + delay, region: region.clone(), record: record.clone() });
            }
        }
        Ok((seq, receipt))
    }

    pub fn search(
        &mut self,
        region: &str,
        td: &Trapdoor,
        pk: &PublicKeyShadow,
        scope: &ScopeFilter,
    ) -> Result<(Vec<(ContentId, SearchResult)>, CallReceipt), ChainError> {
        let outcome = self.region(region)?.execute_search(td, pk, scope)?;
        let receipt = self.relay.charge(CallKind::Search, 0, outcome.plan_rows, None)?;
        Ok((outcome.bundles, receipt))
    }

    /// Resolves a cross-region index entry from any region.
    pub fn resolve(&self, id: &ContentId) -> Result<Option<CiphertextRecord>, ChainError> {
        match self.relay.lookup(id) {
            None => Ok(None),
            Some(IndexEntry::Embedded(bytes)) => Ok(Some(CiphertextRecord::from_bytes(bytes)?)),
            Some(IndexEntry::Pointer { region, record_id }) => {
                let entry = self.region(region)?.get(record_id).ok_or_else(|| ChainError::Dangling {
                    region: region.clone(),
                    record: hex::encode(record_id),
                })?;
                Ok(Some(entry.ciphertext.clone()))
            }
        }
    }

    /// Virtual time from issuing revocation `seq` until the last region
    /// sealed a block enforcing it.
    pub fn enforcement_delay_ms(&self, seq: u64) -> Option<u64> {
        let issued = *self.issued_at.get(&seq)?;
        let mut worst = 0;
        for r in self.regions.values() {
            let h = r.applied_at(seq)?;
            let ts = r.blocks().get(h as usize).map(|b| b.timestamp_ms)?;
            worst = worst.max(ts - issued);
        }
        Some(worst)
    }

    /// Upper bound the design guarantees: one block interval plus the
    /// slowest link.
    pub fn liveness_bound_ms(&self) -> u64 {
        self.config.chain.block_time_ms + self.config.links.max_ms()
    }
}
