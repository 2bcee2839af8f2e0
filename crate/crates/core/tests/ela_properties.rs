use instascope::doe::{build_doe, lhs_sample, Doe};
use instascope::ela::{compute_all, x_only_features, FeatureValue};
use instascope::suite::ProblemInstance;
use proptest::prelude::*;
use rayon::prelude::*;

fn values_identical(a: &[(String, FeatureValue)], b: &[(String, FeatureValue)]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|((na, va), (nb, vb))| {
            na == nb
                && match (va.value(), vb.value()) {
                    (Some(x), Some(y)) => x.to_bits() == y.to_bits(),
                    _ => va == vb,
                }
        })
}

#[test]
fn features_are_pure() {
    let inst = ProblemInstance::new(7, 3, 5).unwrap();
    let doe = build_doe(&inst, 200, 4).unwrap();
    let a = compute_all(&doe);
    let b = compute_all(&doe.clone());
    assert!(values_identical(a.entries(), b.entries()));
}

#[test]
fn x_only_features_shared_across_instances() {
    for seed in [1, 2] {
        let reference = compute_all(&build_doe(&ProblemInstance::new(1, 1, 5).unwrap(), 150, seed).unwrap());
        for (fid, iid) in [(1, 2), (3, 7), (12, 1), (21, 9), (5, 4)] {
            let fv = compute_all(&build_doe(&ProblemInstance::new(fid, iid, 5).unwrap(), 150, seed).unwrap());
            for name in x_only_features() {
                assert_eq!(
                    fv.value(&name).map(f64::to_bits),
                    reference.value(&name).map(f64::to_bits),
                    "{name} differs on f{fid} i{iid}"
                );
            }
        }
    }
}

#[test]
fn missing_values_carry_reasons() {
    let x = lhs_sample(120, 3, 8, -5.0, 5.0).unwrap();
    let designs = [
        Doe::from_parts(x.clone(), vec![4.0; 120], 8).unwrap(),
        Doe::from_parts(x.clone(), x.iter().map(|r| r[0]).collect(), 8).unwrap(),
        Doe::from_parts(x[..20].to_vec(), (0..20).map(f64::from).collect(), 8).unwrap(),
        build_doe(&ProblemInstance::new(23, 1, 3).unwrap(), 120, 8).unwrap(),
    ];
    for doe in &designs {
        let fv = compute_all(doe);
        for (name, v) in fv.entries() {
            match v {
                FeatureValue::Value(f) => assert!(f.is_finite(), "{name} = {f}"),
                FeatureValue::Missing(r) => assert!(!r.code().is_empty()),
            }
        }
    }
    let constant = compute_all(&designs[0]);
    assert!(constant.get("ela_distr.skewness").unwrap().missing_reason().is_some());
}

#[test]
fn lhs_marginals_within_one_over_n() {
    let n = 1000;
    let x = lhs_sample(n, 3, 21, -5.0, 5.0).unwrap();
    for j in 0..3 {
        let mut col: Vec<f64> = x.iter().map(|r| (r[j] + 5.0) / 10.0).collect();
        col.sort_by(f64::total_cmp);
        for k in 0..=n {
            let edge = k as f64 / n as f64;
            let below = col.iter().filter(|&&v| v < edge).count() as f64 / n as f64;
            assert!((below - edge).abs() <= 1.0 / n as f64 + 1e-12);
        }
        for (i, v) in col.iter().enumerate() {
            let f = (i + 1) as f64 / n as f64;
            assert!((f - v).abs() <= 1.0 / n as f64 + 1e-12);
        }
    }
}

#[test]
fn lhs_seed_isolation() {
    let seeds: Vec<u64> = (1..=20).collect();
    let serial: Vec<_> = seeds.iter().map(|&s| lhs_sample(50, 4, s, -5.0, 5.0).unwrap()).collect();
    let reversed: Vec<_> = seeds.iter().rev().map(|&s| lhs_sample(50, 4, s, -5.0, 5.0).unwrap()).collect();
    let parallel: Vec<_> = seeds.par_iter().map(|&s| lhs_sample(50, 4, s, -5.0, 5.0).unwrap()).collect();
    assert_eq!(serial, parallel);
    assert_eq!(serial, reversed.into_iter().rev().collect::<Vec<_>>());
    assert_ne!(serial[0], serial[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn nbc_and_level_rank_invariant(fid in 1u32..=24, iid in 1u32..=20, seed in 1u64..1000) {
        let inst = ProblemInstance::new(fid, iid, 3).unwrap();
        let doe = build_doe(&inst, 120, seed).unwrap();
        let a = compute_all(&doe);
        let b = compute_all(&doe.with_y(doe.y.iter().map(|v| 2.0 * v + 7.0).collect()));
        for name in a.names().filter(|n| n.starts_with("nbc.") || n.starts_with("ela_level.")) {
            let (u, v) = (a.get(name).unwrap(), b.get(name).unwrap());
            match (u.value(), v.value()) {
                (Some(p), Some(q)) => prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0), "{}: {} vs {}", name, p, q),
                _ => prop_assert_eq!(u, v),
            }
        }
    }

    #[test]
    fn lhs_stratified(n in 2usize..300, dim in 1usize..6, seed in any::<u64>()) {
        let x = lhs_sample(n, dim, seed, 0.0, 1.0).unwrap();
        for j in 0..dim {
            let mut hits = vec![0u32; n];
            for row in &x {
                prop_assert!((0.0..1.0).contains(&row[j]));
                hits[((row[j] * n as f64).floor() as usize).min(n - 1)] += 1;
            }
            prop_assert!(hits.iter().all(|&h| h == 1));
        }
    }
}
