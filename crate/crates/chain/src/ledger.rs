//! Hash-chained blocks and the append-only ledger file.
//!
//! File layout: `"RCLG"`, version byte, region name (u32-prefixed), SHA-256
//! of those header bytes, then one frame per block: u32 length followed by
//! the block body and its 32-byte hash.

use sha2::{Digest, Sha256};

use crate::relay::ContentId;
use crate::ChainError;

pub const LEDGER_MAGIC: &[u8; 4] = b"RCLG";
pub const LEDGER_VERSION: u8 = 1;

/// A sealed ledger entry in stored form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredEntry {
    pub record_id: ContentId,
    pub uploader: Vec<u8>,
    pub ct_bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    pub prev_hash: [u8; 32],
    pub timestamp_ms: u64,
    pub applied_revocation_seq: u64,
    pub records: Vec<StoredEntry>,
    pub hash: [u8; 32],
}

pub fn record_id(ct_bytes: &[u8]) -> ContentId {
    Sha256::digest(ct_bytes).into()
}

fn body(height: u64, prev: &[u8; 32], ts: u64, seq: u64, records: &[StoredEntry]) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(&height.to_be_bytes());
    b.extend_from_slice(prev);
    b.extend_from_slice(&ts.to_be_bytes());
    b.extend_from_slice(&seq.to_be_bytes());
    b.extend_from_slice(&(records.len() as u32).to_be_bytes());
    for r in records {
        b.extend_from_slice(&r.record_id);
        b.extend_from_slice(&(r.uploader.len() as u32).to_be_bytes());
        b.extend_from_slice(&r.uploader);
        b.extend_from_slice(&(r.ct_bytes.len() as u32).to_be_bytes());
        b.extend_from_slice(&r.ct_bytes);
    }
    b
}

fn block_hash(region: &str, body: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"RCLG-block-v1");
    h.update((region.len() as u32).to_be_bytes());
    h.update(region.as_bytes());
    h.update(body);
    h.finalize().into()
}

impl Block {
    pub fn seal(region: &str, prev: Option<&Block>, timestamp_ms: u64, seq: u64, records: Vec<StoredEntry>) -> Block {
        let (height, prev_hash) = match prev {
            Some(p) => (p.height + 1, p.hash),
            None => (0, [0u8; 32]),
        };
        let hash = block_hash(region, &body(height, &prev_hash, timestamp_ms, seq, &records));
        Block { height, prev_hash, timestamp_ms, applied_revocation_seq: seq, records, hash }
    }

    fn frame(&self) -> Vec<u8> {
        let mut b = body(self.height, &self.prev_hash, self.timestamp_ms, self.applied_revocation_seq, &self.records);
        b.extend_from_slice(&self.hash);
        let mut out = (b.len() as u32).to_be_bytes().to_vec();
        out.extend_from_slice(&b);
        out
    }
}

fn header(region: &str) -> Vec<u8> {
    let mut h = LEDGER_MAGIC.to_vec();
    h.push(LEDGER_VERSION);
    h.extend_from_slice(&(region.len() as u32).to_be_bytes());
    h.extend_from_slice(region.as_bytes());
    let digest: [u8; 32] = Sha256::digest(&h).into();
    h.extend_from_slice(&digest);
    h
}

pub fn encode_ledger(region: &str, blocks: &[Block]) -> Vec<u8> {
    let mut out = header(region);
    for b in blocks {
        out.extend_from_slice(&b.frame());
    }
    out
}

/// Where an audit first found damage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Damage {
    Header(String),
    Block { height: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub region: Option<String>,
    /// Blocks that verified before the first damage (all of them if intact).
    pub verified_blocks: u64,
    pub damage: Option<Damage>,
}

impl AuditReport {
    pub fn accepted(&self) -> bool {
        self.damage.is_none()
    }

    pub fn first_bad_height(&self) -> Option<u64> {
        match &self.damage {
            Some(Damage::Block { height, .. }) => Some(*height),
            _ => None,
        }
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_be_bytes(self.take(4)?.try_into().ok()?))
    }

    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_be_bytes(self.take(8)?.try_into().ok()?))
    }

    fn arr32(&mut self) -> Option<[u8; 32]> {
        self.take(32)?.try_into().ok()
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn parse_body(frame: &[u8]) -> Option<Block> {
    let mut c = Cursor { buf: frame, pos: 0 };
    let height = c.u64()?;
    let prev_hash = c.arr32()?;
    let timestamp_ms = c.u64()?;
    let applied_revocation_seq = c.u64()?;
    let n = c.u32()? as usize;
    let mut records = Vec::new();
    for _ in 0..n {
        let record_id = c.arr32()?;
        let ul = c.u32()? as usize;
        let uploader = c.take(ul)?.to_vec();
        let cl = c.u32()? as usize;
        let ct_bytes = c.take(cl)?.to_vec();
        records.push(StoredEntry { record_id, uploader, ct_bytes });
    }
    let hash = c.arr32()?;
    c.done().then_some(Block { height, prev_hash, timestamp_ms, applied_revocation_seq, records, hash })
}

/// Re-derives every hash and record id from the raw file bytes and stops at
/// the first inconsistency.
pub fn audit_ledger(bytes: &[u8]) -> (AuditReport, Vec<Block>) {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let report = |region, verified, damage| AuditReport { region, verified_blocks: verified, damage: Some(damage) };
    let hdr = (|| {
        if c.take(4)? != LEDGER_MAGIC || c.take(1)? != [LEDGER_VERSION] {
            return None;
        }
        let n = c.u32()? as usize;
        let region = String::from_utf8(c.take(n)?.to_vec()).ok()?;
        let end = c.pos;
        let digest = c.arr32()?;
        (digest == <[u8; 32]>::from(Sha256::digest(&bytes[..end]))).then_some(region)
    })();
    let Some(region) = hdr else {
        return (report(None, 0, Damage::Header("bad magic, version, region or header digest".into())), Vec::new());
    };

    let mut blocks: Vec<Block> = Vec::new();
    while !c.done() {
        let height = blocks.len() as u64;
        let bad = |reason: &str| Damage::Block { height, reason: reason.into() };
        let Some(len) = c.u32() else {
            return (report(Some(region), height, bad("truncated frame length")), blocks);
        };
        let Some(frame) = c.take(len as usize) else {
            return (report(Some(region), height, bad("truncated block")), blocks);
        };
        let Some(b) = parse_body(frame) else {
            return (report(Some(region), height, bad("unparseable block body")), blocks);
        };
        let expect_prev = blocks.last().map_or([0u8; 32], |p| p.hash);
        let reason = if b.height != height {
            Some("height out of sequence")
        } else if b.prev_hash != expect_prev {
            Some("prev_hash does not link")
        } else if b.records.iter().any(|r| r.record_id != record_id(&r.ct_bytes)) {
            Some("record id does not match stored ciphertext")
        } else if block_hash(&region, &frame[..frame.len() - 32]) != b.hash {
            Some("block hash mismatch")
        } else if blocks.last().is_some_and(|p| {
            p.applied_revocation_seq > b.applied_revocation_seq || p.timestamp_ms > b.timestamp_ms
        }) {
            Some("revocation sequence or timestamp regressed")
        } else {
            None
        };
        if let Some(r) = reason {
            return (report(Some(region), height, bad(r)), blocks);
        }
        blocks.push(b);
    }
    (AuditReport { region: Some(region), verified_blocks: blocks.len() as u64, damage: None }, blocks)
}

pub fn decode_ledger(bytes: &[u8]) -> Result<(String, Vec<Block>), ChainError> {
    let (report, blocks) = audit_ledger(bytes);
    match report.damage {
        None => Ok((report.region.expect("intact header"), blocks)),
        Some(d) => Err(ChainError::Format(format!("ledger audit failed: {d:?}"))),
    }
}
