use std::collections::BTreeSet;

use proptest::prelude::*;
use rccpabe_core::lsss::{compile_tree, find_reconstruction, share_secret, PolicyNode};
use rccpabe_core::pairing::{init_group, rng_from_seed, scalar_from_u64, GElem, SecurityLevel};
use rccpabe_core::scheme::*;

const POOL: [&str; 8] =
    ["Role=TrafficPolice", "Role=Analyst", "Region=R1", "Region=R2", "Dept=North", "Dept=South", "Shift=Day", "Lvl=3"];

fn tree() -> impl Strategy<Value = PolicyNode> {
    let leaf = (0..POOL.len()).prop_map(|i| PolicyNode::Leaf(POOL[i].to_string()));
    leaf.prop_recursive(3, 20, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(PolicyNode::And),
            prop::collection::vec(inner, 2..4).prop_map(PolicyNode::Or),
        ]
    })
}

fn attr_subset() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(0..POOL.len(), 1..POOL.len()).prop_map(|s| s.into_iter().map(|i| POOL[i].to_string()).collect())
}

fn setup() -> (SystemKeys, TaRegistry) {
    let group = init_group(SecurityLevel::Ss512, b"prop").unwrap();
    let mut rng = rng_from_seed(b"prop-setup");
    (global_setup(&group, &mut rng), TaRegistry::new(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lsss_plan_exists_iff_tree_satisfied(t in tree(), attrs in attr_subset(), secret in 1u64..u64::MAX) {
        let policy = compile_tree(t.clone());
        let plan = find_reconstruction(&policy, &attrs);
        prop_assert_eq!(plan.is_some(), t.evaluate(&attrs));
        if let Some(plan) = plan {
            let mut rng = rng_from_seed(&secret.to_be_bytes());
            let shares = share_secret(&policy, scalar_from_u64(secret), &mut rng);
            prop_assert_eq!(plan.combine(&shares.shares), scalar_from_u64(secret));
            prop_assert!(plan.rows.iter().all(|r| attrs.contains(&policy.row_labels[*r])));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn search_matches_iff_satisfied_and_same_keyword(
        t in tree(),
        attrs in attr_subset(),
        kw in "[a-z]{1,8}",
        other_kw in "[a-z]{1,8}",
        flag in any::<bool>(),
        data in prop::collection::vec(any::<u8>(), 0..64),
        seed in any::<u64>(),
    ) {
        let (keys, mut ta) = setup();
        let mut rng = rng_from_seed(&seed.to_be_bytes());
        let cert = ta.register(b"veh-p", b"info").unwrap();
        let (sk, pk) = keygen(&keys, &ta, &cert, &attrs, &mut rng).unwrap();
        let policy = compile_tree(t.clone());
        let md = Metadata::new("accident", "R1", seed);
        let ct = encrypt(&keys.pp, &data, &policy, kw.as_bytes(), flag, &md, &mut rng).unwrap();
        let decoded = CiphertextRecord::from_bytes(&ct.to_bytes()).unwrap();
        prop_assert_eq!(&decoded, &ct);
        prop_assert!(verify_ciphertext(&keys.pp, &decoded).is_ok());

        let plan = find_reconstruction(&ct.policy, &pk.attrs());
        let td = trapdoor(&sk, kw.as_bytes(), &mut rng).unwrap();
        let hit = search(&td, &pk, &ct, plan.as_ref()).unwrap();
        prop_assert_eq!(hit.is_some(), t.evaluate(&attrs));
        if let Some(bundle) = hit {
            prop_assert_eq!(decrypt(&bundle, &sk).unwrap(), data);
        }
        if other_kw != kw {
            let td = trapdoor(&sk, other_kw.as_bytes(), &mut rng).unwrap();
            prop_assert!(search(&td, &pk, &ct, plan.as_ref()).unwrap().is_none());
        }
    }

    #[test]
    fn verify_key_rejects_any_single_mutation(which in 0usize..7, seed in any::<u64>()) {
        let (keys, mut ta) = setup();
        let mut rng = rng_from_seed(&seed.to_be_bytes());
        let cert = ta.register(b"veh-m", b"info").unwrap();
        let a = normalize_attributes(["Role=TrafficPolice", "Region=R1"]).unwrap();
        let (mut sk, _) = keygen(&keys, &ta, &cert, &a, &mut rng).unwrap();
        prop_assert!(verify_key(&keys.pp, &sk));
        let bump = scalar_from_u64(seed | 1);
        match which {
            0 => sk.k1 = GElem::hash_to_group(b"mut", &seed.to_be_bytes()),
            1 => sk.k2 += bump,
            2 => *sk.k3.values_mut().next().unwrap() = GElem::hash_to_group(b"mut3", &seed.to_be_bytes()),
            3 => sk.k4 += bump,
            4 => sk.s1 += bump,
            5 => sk.s2 += bump,
            _ => sk.s3 += bump,
        }
        prop_assert!(!verify_key(&keys.pp, &sk));
    }
}
