use rccpabe_bench::cost::*;
use rccpabe_bench::BenchError;
use rccpabe_core::pairing::{init_group, SecurityLevel};

fn c() -> CostConstants {
    CostConstants::default()
}

#[test]
fn proposed_encrypt_is_constant_37_75() {
    for a_s in 1..=20 {
        for l in 1..=20 {
            let t = eval_time(Scheme::Proposed, Operation::Encrypt, a_s, l, &c()).unwrap();
            assert_eq!(t, Micros(37_750));
            assert_eq!(t.to_string(), "37.750");
        }
    }
}

#[test]
fn proposed_decrypt_and_keygen_values() {
    assert_eq!(eval_time(Scheme::Proposed, Operation::Decrypt, 7, 3, &c()).unwrap(), Micros(8_005));
    assert_eq!(eval_time(Scheme::Proposed, Operation::KeyGen, 10, 0, &c()).unwrap(), Micros(88_055));
}

#[test]
fn proposed_sizes() {
    assert_eq!(eval_size(Scheme::Proposed, Object::Pp, 0, 0, 0, &c()), 768);
    assert_eq!(eval_size(Scheme::Proposed, Object::Sk, 10, 0, 0, &c()), 1508);
    assert_eq!(eval_size(Scheme::Proposed, Object::Ct, 0, 10, 0, &c()), 1168);
}

#[test]
fn baseline_formulas() {
    let k = c();
    assert_eq!(eval_time(Scheme::Zhao, Operation::Decrypt, 5, 5, &k).unwrap(), Micros(32_020));
    assert_eq!(eval_time(Scheme::Zhao, Operation::Encrypt, 5, 3, &k).unwrap(), Micros(48_030));
    assert_eq!(eval_time(Scheme::Zeng, Operation::Encrypt, 3, 3, &k).unwrap(), Micros(39_020));
    assert_eq!(eval_time(Scheme::Zeng, Operation::Decrypt, 2, 2, &k).unwrap(), Micros(72_045));
    assert_eq!(eval_size(Scheme::Li, Object::Ct, 0, 4, 0, &k), 11 * 128 + 128);
    assert_eq!(eval_size(Scheme::Zhao, Object::Pp, 0, 0, 10, &k), 13 * 128 + 128 + 40);
}

#[test]
fn unknown_names_and_missing_rows_are_errors() {
    assert!(matches!(eval_time_named("bogus", "encrypt", 1, 1, &c()), Err(BenchError::Unknown { .. })));
    assert!(matches!(eval_time_named("proposed", "sign", 1, 1, &c()), Err(BenchError::Unknown { .. })));
    assert!(matches!(eval_size_named("proposed", "mk", 1, 1, 1, &c()), Err(BenchError::Unknown { .. })));
    assert!(matches!(eval_time(Scheme::Li, Operation::Encrypt, 1, 1, &c()), Err(BenchError::NoFormula { .. })));
    assert_eq!(eval_size_named("PROPOSED", "PP", 0, 0, 0, &c()).unwrap(), 768);
}

#[test]
fn decrypt_is_at_most_a_quarter_of_zhao() {
    for a_s in 2..=20 {
        let p = eval_time(Scheme::Proposed, Operation::Decrypt, a_s, a_s, &c()).unwrap();
        let z = eval_time(Scheme::Zhao, Operation::Decrypt, a_s, a_s, &c()).unwrap();
        assert!(4 * p.0 <= z.0);
        assert!(decrypt_reduction_pct(Scheme::Zhao, a_s, &c()).unwrap() >= 75.0);
    }
}

#[test]
fn constants_file_roundtrip_and_validation() {
    let k = c();
    assert_eq!(CostConstants::from_toml(&k.to_toml()).unwrap(), k);
    let bad = k.to_toml().replace("t_ms = 8.005", "t_ms = 0.0");
    assert!(CostConstants::from_toml(&bad).is_err());
    let fine = k.to_toml().replace("t_ms = 8.005", "t_ms = 8.0001");
    assert!(CostConstants::from_toml(&fine).is_err());
}

#[test]
fn figure_csv_shape() {
    let a_s: Vec<u64> = (2..=20).collect();
    let rows = figure7_rows(&a_s, &c(), None);
    assert_eq!(rows.len(), 19 * 3 * 3);
    let mut out = Vec::new();
    write_figure_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "scheme,item,a_s,l,model_value,measured_value");
    assert!(text.contains("proposed,encrypt,2,2,37.750,"));
    assert_eq!(figure8_rows(&a_s, 20, &c(), None).len(), 19 * 4 * 3);
}

#[test]
fn ordering_violations_are_reported_per_cell() {
    let v = time_orderings(&(3..=20).collect::<Vec<_>>(), &c());
    assert!(v.is_empty(), "{v:?}");
    // At A_s = L = 2 both baselines' encryption formulas evaluate below 37.75 ms.
    let v = time_orderings(&[2], &c());
    assert_eq!(v.len(), 2);
    assert!(v.iter().all(|x| x.op == Operation::Encrypt));
}

#[test]
fn measured_counts_and_sizes_match_the_model() {
    let group = init_group(SecurityLevel::Ss512, b"bench-tests").unwrap();
    let grid = [1, 2, 5, 10, 20];
    let rep = measure_vs_model(&group, &grid, &grid, &c(), b"bench").unwrap();
    assert_eq!(rep.timings.len(), grid.len() * 3);
    assert!(rep.count_mismatches().is_empty(), "{:?}", rep.count_mismatches());
    assert!(rep.size_mismatches().is_empty(), "{:?}", rep.size_mismatches());
    for l in grid {
        let e = rep.timing(Operation::Encrypt, 0, l).unwrap();
        assert_eq!(e.predicted, Micros(37_750));
    }
    let rows = figure7_rows(&[2, 10], &c(), Some(&rep));
    let kg = rows.iter().find(|r| r.scheme == Scheme::Proposed && r.item == "keygen" && r.a_s == 10).unwrap();
    assert_eq!(kg.measured_value.as_deref(), Some("88.055"));
    let sizes = figure8_rows(&[10], 10, &c(), Some(&rep));
    let sk = sizes.iter().find(|r| r.scheme == Scheme::Proposed && r.item == "sk").unwrap();
    assert_eq!(sk.measured_value.as_deref(), Some("1508"));
}

#[test]
fn host_constants_are_positive() {
    let group = init_group(SecurityLevel::Ss512, b"bench-tests").unwrap();
    let h = host_constants(&group, 3, b"host");
    assert!(h.validate().is_ok());
    assert!(h.t_p > h.t_t);
}
