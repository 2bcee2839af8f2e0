use instascope::stats::{benjamini_hochberg, ks_statistic, mann_whitney_u, MWU_EXACT_MAX};
use proptest::prelude::*;

mod common;

fn small_ints(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-1000i32..1000).prop_map(f64::from), len)
}

proptest! {
    #[test]
    fn ks_invariant_under_increasing_maps(a in small_ints(1..=40), b in small_ints(1..=40)) {
        let t = |v: &f64| v * v * v + 5.0 * v;
        let ta: Vec<f64> = a.iter().map(t).collect();
        let tb: Vec<f64> = b.iter().map(t).collect();
        prop_assert_eq!(ks_statistic(&a, &b).unwrap(), ks_statistic(&ta, &tb).unwrap());
        let ea: Vec<f64> = a.iter().map(|v| (v / 300.0).exp()).collect();
        let eb: Vec<f64> = b.iter().map(|v| (v / 300.0).exp()).collect();
        prop_assert_eq!(ks_statistic(&a, &b).unwrap(), ks_statistic(&ea, &eb).unwrap());
    }

    #[test]
    fn ks_matches_double_loop(a in prop::collection::vec(-3.0f64..3.0, 1..=12), b in small_ints(1..=12)) {
        let b: Vec<f64> = b.iter().map(|v| v / 400.0).collect();
        let d = ks_statistic(&a, &b).unwrap();
        prop_assert!((d - common::ks_distance_naive(&a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn mwu_u_statistics_sum(a in small_ints(3..=40), b in small_ints(3..=40)) {
        let u_ab = mann_whitney_u(&a, &b).unwrap().statistic;
        let u_ba = mann_whitney_u(&b, &a).unwrap().statistic;
        prop_assert_eq!(u_ab + u_ba, (a.len() * b.len()) as f64);
    }

    #[test]
    fn mwu_p_symmetric(a in small_ints(3..=30), b in small_ints(3..=30)) {
        let p_ab = mann_whitney_u(&a, &b).unwrap().p_value;
        let p_ba = mann_whitney_u(&b, &a).unwrap().p_value;
        prop_assert!((p_ab - p_ba).abs() <= 1e-12);
    }

    #[test]
    fn mwu_exact_matches_enumeration(
        a in prop::collection::vec(0i32..5, 3..=6),
        b in prop::collection::vec(0i32..5, 3..=6),
    ) {
        prop_assume!(a.len() + b.len() <= MWU_EXACT_MAX);
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let p = mann_whitney_u(&a, &b).unwrap().p_value;
        prop_assert_eq!(p.to_bits(), common::mwu_exact_p_naive(&a, &b).to_bits());
    }

    #[test]
    fn bh_monotone_in_alpha(p in prop::collection::vec(0.0f64..=1.0, 1..60), lo in 0.001f64..0.2, step in 0.0f64..0.5) {
        let hi = (lo + step).min(0.99);
        let strict = benjamini_hochberg(&p, lo).unwrap().rejected;
        let loose = benjamini_hochberg(&p, hi).unwrap().rejected;
        for (s, l) in strict.iter().zip(&loose) {
            prop_assert!(!s || *l);
        }
    }

    #[test]
    fn bh_contains_bonferroni(p in prop::collection::vec(0.0f64..=0.05, 1..60), alpha in 0.001f64..0.2) {
        let bh = benjamini_hochberg(&p, alpha).unwrap();
        let m = p.len() as f64;
        for (pi, r) in p.iter().zip(&bh.rejected) {
            if *pi <= alpha / m {
                prop_assert!(*r);
            }
        }
    }

    #[test]
    fn bh_matches_definition(p in prop::collection::vec(prop_oneof![0.0f64..=1.0, Just(0.01), Just(0.5)], 1..50), alpha in 0.001f64..0.3) {
        prop_assert_eq!(benjamini_hochberg(&p, alpha).unwrap().rejected, common::bh_naive(&p, alpha));
    }

    #[test]
    fn bh_adjusted_reject_iff_below_alpha(p in prop::collection::vec(0.0f64..=1.0, 1..50), alpha in 0.001f64..0.3) {
        let bh = benjamini_hochberg(&p, alpha).unwrap();
        for (adj, r) in bh.adjusted.iter().zip(&bh.rejected) {
            prop_assert!((0.0..=1.0).contains(adj));
            prop_assert_eq!(*r, *adj <= alpha * (1.0 + 1e-12));
        }
    }
}
