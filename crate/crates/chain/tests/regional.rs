mod common;

use common::*;
use rccpabe_chain::ledger::{audit_ledger, Damage};
use rccpabe_chain::relay::RevocationRecord;
use rccpabe_chain::{ChainError, RegionalChain, ScopeFilter};
use rccpabe_core::scheme::{KeyId, RevocationEntry, RevocationTarget};

fn chain(w: &World) -> RegionalChain {
    RegionalChain::new("R1", w.keys.pp.clone(), w.ta.verifying_key())
}

fn marker(seq: u64, key: KeyId) -> RevocationRecord {
    RevocationRecord { seq, entry: RevocationEntry { target: RevocationTarget::Key(key), reason: "t".into() } }
}

#[test]
fn upload_is_visible_after_seal() {
    let mut w = world("up");
    let u = w.user("veh-001", &POLICE);
    let mut c = chain(&w);
    let ct = w.ct(STRICT, "accident", "accident", "R1", b"crash");
    let id = c.upload(&ct, &u.cert).unwrap();
    assert!(c.get(&id).is_none());
    c.seal_block(2000);
    assert_eq!(c.get(&id).unwrap().ciphertext, ct);
    assert_eq!(c.get(&id).unwrap().policy_text(), STRICT);
    assert_eq!(c.head().height, 1);
}

#[test]
fn upload_gates() {
    let mut w = world("gates");
    let u = w.user("veh-001", &POLICE);
    let mut c = chain(&w);
    let ct = w.ct(STRICT, "accident", "accident", "R1", b"crash");

    let mut revoked = u.cert.clone();
    revoked.status = rccpabe_core::scheme::CertStatus::Revoked;
    assert!(matches!(c.upload(&ct, &revoked), Err(ChainError::Denied(_))));

    c.apply_revocations([RevocationRecord {
        seq: 1,
        entry: RevocationEntry { target: RevocationTarget::User(b"veh-001".to_vec()), reason: "t".into() },
    }]);
    assert!(matches!(c.upload(&ct, &u.cert), Err(ChainError::Denied(_))));
    assert_eq!(c.mempool_len(), 0);

    let v = w.user("veh-002", &POLICE);
    let mut bad = ct.clone();
    bad.enc_payload[0] ^= 1;
    assert!(matches!(c.upload(&bad, &v.cert), Err(ChainError::Rejected(_))));
    let other_region = w.ct(STRICT, "accident", "accident", "R2", b"x");
    assert!(matches!(c.upload(&other_region, &v.cert), Err(ChainError::Rejected(_))));
    assert_eq!(c.mempool_len(), 0);
}

#[test]
fn upload_gas_grows_with_policy_length() {
    let mut w = world("gasl");
    let gas = &w.config.gas.clone();
    let mut last = 0;
    for l in [1, 5, 10, 20] {
        let policy = (0..l).map(|i| format!("A{i}=v")).collect::<Vec<_>>().join(" AND ");
        let ct = w.ct(&policy, "k", "accident", "R1", b"payload");
        let g = gas.gas(rccpabe_chain::CallKind::UploadCiphertext, ct.to_bytes().len() as u64, 1).unwrap();
        assert!(g > last, "L = {l}");
        last = g;
    }
}

#[test]
fn planted_needle_among_fifty() {
    let mut w = world("needle");
    let u = w.user("veh-001", &POLICE);
    let mut c = chain(&w);
    let mut needle = None;
    for i in 0..50 {
        let kw = if i == 31 { "accident" } else { "weather" };
        let ct = w.ct(STRICT, kw, "accident", "R1", format!("record {i}").as_bytes());
        let id = c.upload(&ct, &u.cert).unwrap();
        if i == 31 {
            needle = Some(id);
        }
    }
    c.seal_block(2000);
    let td = w.trapdoor(&u, "accident");
    let out = c.execute_search(&td, &u.pk, &ScopeFilter::all()).unwrap();
    assert_eq!(out.scanned, 50);
    assert_eq!(out.bundles.len(), 1);
    assert_eq!(Some(out.bundles[0].0), needle);
    let plain = rccpabe_core::scheme::decrypt(&out.bundles[0].1, &u.sk).unwrap();
    assert_eq!(plain, b"record 31");
    // Bundles never carry flag=true plaintext.
    assert_ne!(out.bundles[0].1.enc_payload, b"record 31");

    let scoped = c.execute_search(&td, &u.pk, &"event=weather".parse().unwrap()).unwrap();
    assert!(scoped.bundles.is_empty());
    assert_eq!(scoped.scanned, 0);
}

#[test]
fn revoked_requester_is_denied() {
    let mut w = world("deny");
    let u = w.user("veh-001", &POLICE);
    let mut c = chain(&w);
    let ct = w.ct(STRICT, "accident", "accident", "R1", b"crash");
    c.upload(&ct, &u.cert).unwrap();
    c.seal_block(2000);
    let td = w.trapdoor(&u, "accident");
    assert_eq!(c.execute_search(&td, &u.pk, &ScopeFilter::all()).unwrap().bundles.len(), 1);
    c.apply_revocations([marker(1, u.sk.key_id())]);
    assert!(matches!(c.execute_search(&td, &u.pk, &ScopeFilter::all()), Err(ChainError::Denied(_))));
    let fresh = w.trapdoor(&u, "accident");
    assert!(matches!(c.execute_search(&fresh, &u.pk, &ScopeFilter::all()), Err(ChainError::Denied(_))));
}

#[test]
fn revocation_markers_apply_in_order_with_gap_stall() {
    let w = world("gap");
    let mut c = chain(&w);
    assert_eq!(c.apply_revocations([marker(1, KeyId([1; 20])), marker(2, KeyId([2; 20])), marker(3, KeyId([3; 20]))]), 3);

    let mut c = chain(&w);
    assert_eq!(c.apply_revocations([marker(1, KeyId([1; 20])), marker(3, KeyId([3; 20]))]), 1);
    assert_eq!(c.buffered_markers(), 1);
    assert!(!c.is_key_revoked(&KeyId([3; 20])));
    assert_eq!(c.apply_revocations([marker(2, KeyId([2; 20]))]), 3);
    assert!(c.is_key_revoked(&KeyId([3; 20])));
    // Replays are ignored.
    assert_eq!(c.apply_revocations([marker(2, KeyId([2; 20]))]), 3);
}

#[test]
fn scope_filter_parsing() {
    let f: ScopeFilter = "event=accident, region=R1".parse().unwrap();
    assert_eq!(f.terms.len(), 2);
    assert!("colour=red".parse::<ScopeFilter>().is_err());
    assert!("event".parse::<ScopeFilter>().is_err());
    assert_eq!("".parse::<ScopeFilter>().unwrap(), ScopeFilter::all());
}

fn populated(w: &mut World) -> RegionalChain {
    let u = w.user("veh-001", &POLICE);
    let mut c = chain(w);
    for i in 0..3 {
        let ct = w.ct(STRICT, "accident", "accident", "R1", format!("r{i}").as_bytes());
        c.upload(&ct, &u.cert).unwrap();
        c.seal_block(2000 * (i + 1));
    }
    c.apply_revocations([marker(1, KeyId([5; 20]))]);
    c.seal_block(8000);
    c
}

/// Byte offsets where each block's frame starts, plus the file end.
fn frame_starts(bytes: &[u8], region: &str) -> Vec<usize> {
    let mut pos = 4 + 1 + 4 + region.len() + 32;
    let mut out = Vec::new();
    while pos < bytes.len() {
        out.push(pos);
        let len = u32::from_be_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4 + len;
    }
    out.push(bytes.len());
    out
}

#[test]
fn audit_accepts_intact_and_pinpoints_every_single_byte_mutation() {
    let mut w = world("audit");
    let c = populated(&mut w);
    assert!(c.verify_chain().accepted());
    let bytes = c.to_ledger_bytes();
    let starts = frame_starts(&bytes, "R1");
    assert_eq!(starts.len() - 1, c.blocks().len());
    for pos in 0..bytes.len() {
        let mut m = bytes.clone();
        m[pos] ^= 0x01;
        let (report, _) = audit_ledger(&m);
        assert!(!report.accepted(), "mutation at byte {pos} went unnoticed");
        match starts.iter().rposition(|s| *s <= pos) {
            None => assert!(matches!(report.damage, Some(Damage::Header(_))), "byte {pos}"),
            Some(h) => assert_eq!(report.first_bad_height(), Some(h as u64), "byte {pos}"),
        }
    }
}

#[test]
fn audit_rejects_truncation_at_its_height() {
    let mut w = world("trunc");
    let c = populated(&mut w);
    let bytes = c.to_ledger_bytes();
    let starts = frame_starts(&bytes, "R1");
    for h in 0..c.blocks().len() {
        let cut = starts[h] + 10;
        let (report, blocks) = audit_ledger(&bytes[..cut]);
        assert_eq!(report.first_bad_height(), Some(h as u64));
        assert_eq!(blocks.len(), h);
    }
    // Cutting exactly at a frame boundary leaves a shorter, valid chain.
    assert!(audit_ledger(&bytes[..starts[2]]).0.accepted());
}

#[test]
fn ledger_file_roundtrip_restores_state() {
    let mut w = world("reload");
    let c = populated(&mut w);
    let relay_list = [marker(1, KeyId([5; 20]))];
    let back = RegionalChain::from_ledger_bytes(&c.to_ledger_bytes(), w.keys.pp.clone(), w.ta.verifying_key(), &relay_list)
        .unwrap();
    assert_eq!(back.to_ledger_bytes(), c.to_ledger_bytes());
    assert_eq!(back.entries(), c.entries());
    assert_eq!(back.applied_seq(), 1);
    assert!(back.is_key_revoked(&KeyId([5; 20])));
    assert_eq!(back.applied_at(1), c.applied_at(1));
    assert!(RegionalChain::from_ledger_bytes(&c.to_ledger_bytes(), w.keys.pp.clone(), w.ta.verifying_key(), &[]).is_err());
}

#[test]
fn plaintext_records_are_openly_readable() {
    let mut w = world("plain");
    let u = w.user("veh-001", &["Role=Analyst"]);
    let mut c = chain(&w);
    let p = rccpabe_core::lsss::compile_policy("Role=Analyst").unwrap();
    let md = rccpabe_core::scheme::Metadata::new("weather", "R1", 5);
    let ct = rccpabe_core::scheme::encrypt(&w.keys.pp, b"light rain", &p, b"weather", false, &md, &mut w.rng).unwrap();
    let secret = w.ct(STRICT, "accident", "accident", "R1", b"crash");
    let id = c.upload(&ct, &u.cert).unwrap();
    let sid = c.upload(&secret, &u.cert).unwrap();
    c.seal_block(2000);
    assert_eq!(c.read_plain(&id), Some(&b"light rain"[..]));
    assert_eq!(c.read_plain(&sid), None);
    let td = w.trapdoor(&u, "weather");
    assert_eq!(c.execute_search(&td, &u.pk, &ScopeFilter::all()).unwrap().bundles.len(), 1);
}
