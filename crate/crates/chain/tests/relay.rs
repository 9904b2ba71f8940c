mod common;

use proptest::prelude::*;
use rccpabe_chain::gas::{CallKind, GasMeter};
use rccpabe_chain::rules::{ContextRule, HourWindow, Pattern};
use rccpabe_chain::{ChainConfig, ChainError, IndexEntry, RelayChain, RuleTable};
use rccpabe_core::scheme::{KeyId, Metadata, RevocationEntry, RevocationTarget};

const NIGHT: u64 = 1_700_000_000 - (1_700_000_000 % 86_400) + 2 * 3600;
const NOON: u64 = NIGHT + 10 * 3600;

fn relay() -> RelayChain {
    let cfg = ChainConfig::default();
    RelayChain::new(cfg.rule_table(), cfg.gas)
}

fn key_entry(b: u8) -> RevocationEntry {
    RevocationEntry { target: RevocationTarget::Key(KeyId([b; 20])), reason: "test".into() }
}

#[test]
fn default_rules_match_context_examples() {
    let mut r = relay();
    assert!(r.evaluate_policy(&Metadata::new("accident", "RegionA", NIGHT)).unwrap().0);
    assert!(!r.evaluate_policy(&Metadata::new("weather", "LowRisk-1", NOON)).unwrap().0);
    // Weather at night falls through to the fail-secure default.
    assert!(r.evaluate_policy(&Metadata::new("weather", "LowRisk-1", NIGHT)).unwrap().0);
    assert!(!r.evaluate_policy(&Metadata::new("congestion", "LowRisk-1", NIGHT)).unwrap().0);
    assert!(r.evaluate_policy(&Metadata::new("congestion", "Downtown", NIGHT)).unwrap().0);
}

#[test]
fn empty_rule_table_is_fail_secure() {
    let t = RuleTable::default();
    for (e, reg, time) in [("weather", "R1", NOON), ("x", "y", 0)] {
        assert!(t.evaluate(&Metadata::new(e, reg, time)).unwrap());
    }
}

#[test]
fn malformed_metadata_is_query_error() {
    let mut r = relay();
    let err = r.evaluate_policy(&Metadata::new("", "R1", 0)).unwrap_err();
    assert!(matches!(err, ChainError::Query(_)));
}

#[test]
fn first_match_wins_on_overlap() {
    let rule = |ev: &str, flag| ContextRule {
        event: Pattern::try_from(ev.to_string()).unwrap(),
        region: Pattern::any(),
        hours: HourWindow::any(),
        flag,
    };
    let md = Metadata::new("weather", "R1", NOON);
    let a = RuleTable { rules: vec![rule("weather", false), rule("*", true)] };
    let b = RuleTable { rules: vec![rule("*", true), rule("weather", false)] };
    assert!(!a.evaluate(&md).unwrap());
    assert!(b.evaluate(&md).unwrap());
}

#[test]
fn hour_windows_wrap_midnight() {
    let w: HourWindow = "22-06".parse().unwrap();
    assert!(w.contains(23) && w.contains(0) && w.contains(5));
    assert!(!w.contains(6) && !w.contains(12));
    assert!("25-01".parse::<HourWindow>().is_err());
    assert!(Pattern::try_from("a*b".to_string()).is_err());
}

proptest! {
    #[test]
    fn disjoint_rules_are_order_independent(flags in prop::collection::vec(any::<bool>(), 1..6), pick in 0usize..8, seed in any::<u64>()) {
        let rules: Vec<ContextRule> = flags
            .iter()
            .enumerate()
            .map(|(i, f)| ContextRule {
                event: Pattern::try_from(format!("ev{i}")).unwrap(),
                region: Pattern::any(),
                hours: HourWindow::any(),
                flag: *f,
            })
            .collect();
        let mut shuffled = rules.clone();
        let n = shuffled.len();
        shuffled.rotate_left((seed as usize) % n);
        shuffled.swap(0, (seed as usize / 7) % n);
        let md = Metadata::new(format!("ev{pick}"), "R1", seed % 1_000_000);
        prop_assert_eq!(
            RuleTable { rules }.evaluate(&md).unwrap(),
            RuleTable { rules: shuffled }.evaluate(&md).unwrap()
        );
    }
}

#[test]
fn revocation_is_append_only_and_idempotent() {
    let mut r = relay();
    let (s1, rc1) = r.revoke(key_entry(1)).unwrap();
    let (s2, _) = r.revoke(key_entry(2)).unwrap();
    let (again, rc) = r.revoke(key_entry(1)).unwrap();
    assert_eq!((s1, s2, again), (1, 2, 1));
    assert!(rc1.is_some() && rc.is_none());
    assert_eq!(r.revocations().len(), 2);
    assert!(r.is_key_revoked(&KeyId([1; 20])));
    assert!(!r.is_key_revoked(&KeyId([3; 20])));
}

#[test]
fn gas_formula_examples() {
    let cfg = ChainConfig::default();
    let g = &cfg.gas;
    let upload_1k = g.gas(CallKind::UploadCiphertext, 1024, 1).unwrap();
    let revoke = g.gas(CallKind::RevokeAttribute, 8 + 1 + 20 + 16, 1).unwrap();
    assert!(revoke < upload_1k);
    assert!(g.gas(CallKind::UploadCiphertext, 2048, 1).unwrap() > upload_1k);
    let base = g.calls[&CallKind::EvaluatePolicy].base;
    assert_eq!(g.meter("evaluatePolicy", 0, 0).unwrap(), base);
    assert!(matches!(g.meter("mintTokens", 0, 0), Err(ChainError::UnknownCall(_))));
    // Aggregate gas for n users issuing one call each is linear in n.
    let total = |n: u64| (0..n).map(|k| g.gas(CallKind::UploadCiphertext, 1024, 1 + k).unwrap()).sum::<u64>();
    let (t5, t10, t15) = (total(5), total(10), total(15));
    assert!(t5 < t10 && t10 < t15);
    assert_eq!(g.fee_gwei(1000), 20_000);
}

#[test]
fn journal_records_every_call() {
    let mut r = relay();
    r.evaluate_policy(&Metadata::new("accident", "R1", 0)).unwrap();
    r.revoke(key_entry(9)).unwrap();
    let mut out = Vec::new();
    r.meter().write_journal(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 2);
    let parsed = GasMeter::read_journal(&text).unwrap();
    assert_eq!(parsed, r.meter().journal());
    assert_eq!(parsed[1].seq, Some(1));
    assert_eq!(parsed[1].kind, CallKind::RevokeAttribute);
}

#[test]
fn relay_state_json_roundtrip() {
    let mut r = relay();
    r.register_attributes(["Role=TrafficPolice".to_string()]);
    r.revoke(key_entry(4)).unwrap();
    r.revoke(RevocationEntry { target: RevocationTarget::User(b"veh-9".to_vec()), reason: "stolen".into() }).unwrap();
    r.publish_cross_region([7; 32], IndexEntry::Embedded(vec![1, 2, 3]), |_, _| true).unwrap();
    r.publish_cross_region([8; 32], IndexEntry::Pointer { region: "R1".into(), record_id: [8; 32] }, |_, _| true).unwrap();
    let back = RelayChain::from_json(&r.to_json()).unwrap();
    assert_eq!(back.to_json(), r.to_json());
    assert_eq!(back.revocations(), r.revocations());
    assert_eq!(back.lookup(&[8; 32]), r.lookup(&[8; 32]));
}

#[test]
fn cross_region_index_semantics() {
    let mut r = relay();
    let err = r
        .publish_cross_region([1; 32], IndexEntry::Pointer { region: "R1".into(), record_id: [1; 32] }, |_, _| false)
        .unwrap_err();
    assert!(matches!(err, ChainError::Dangling { .. }));
    assert!(r.lookup(&[1; 32]).is_none());
    r.publish_cross_region([2; 32], IndexEntry::Embedded(vec![5]), |_, _| false).unwrap();
    assert_eq!(r.lookup(&[2; 32]), Some(&IndexEntry::Embedded(vec![5])));
}

#[test]
fn config_validation() {
    assert!(ChainConfig::from_toml(rccpabe_chain::config::DEFAULT_CONFIG).is_ok());
    let missing = rccpabe_chain::config::DEFAULT_CONFIG.replace("[gas.calls.search]", "[gas.calls.unused]");
    assert!(ChainConfig::from_toml(&missing).is_err());
    let zero_block = rccpabe_chain::config::DEFAULT_CONFIG.replace("block_time_ms = 2000", "block_time_ms = 0");
    assert!(ChainConfig::from_toml(&zero_block).is_err());
}
