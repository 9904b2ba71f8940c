use proptest::prelude::*;
use rccpabe_bench::cost::*;
use rccpabe_bench::workload::r_squared;

proptest! {
    #[test]
    fn proposed_encrypt_and_decrypt_ignore_sizes(a_s in 0u64..1000, l in 0u64..1000) {
        let c = CostConstants::default();
        prop_assert_eq!(eval_time(Scheme::Proposed, Operation::Encrypt, a_s, l, &c).unwrap(), Micros(37_750));
        prop_assert_eq!(eval_time(Scheme::Proposed, Operation::Decrypt, a_s, l, &c).unwrap(), Micros(8_005));
    }

    #[test]
    fn keygen_and_sk_grow_by_one_element_per_attribute(a_s in 0u64..1000) {
        let c = CostConstants::default();
        let k = |a| eval_time(Scheme::Proposed, Operation::KeyGen, a, 0, &c).unwrap().0;
        prop_assert_eq!(k(a_s + 1) - k(a_s), c.t.0);
        let s = |a| eval_size(Scheme::Proposed, Object::Sk, a, 0, 0, &c);
        prop_assert_eq!(s(a_s + 1) - s(a_s), c.size_g);
    }

    #[test]
    fn affine_series_fit_perfectly(a in -1e6f64..1e6, b in 0.1f64..1e4) {
        let pts: Vec<(f64, f64)> = [5.0, 10.0, 15.0, 20.0].iter().map(|&x| (x, a + b * x)).collect();
        prop_assert!(r_squared(&pts) > 0.999_999);
    }
}
