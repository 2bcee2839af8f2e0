use instascope::optim::{checkpoints, run_single, Algorithm};
use instascope::stats::{one_vs_rest_rejection, TestMethod};
use instascope::suite::ProblemInstance;
use proptest::prelude::*;

fn algorithm() -> impl Strategy<Value = Algorithm> {
    prop::sample::select(Algorithm::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_respect_box_budget_and_monotonicity(
        alg in algorithm(),
        fid in 1u32..=24,
        iid in 1u32..=30,
        dim in prop::sample::select(vec![2usize, 3, 5]),
        budget in 2usize..400,
        seed in any::<u64>(),
    ) {
        let inst = ProblemInstance::new(fid, iid, dim).unwrap();
        let mut seen = 0usize;
        let mut outside = 0usize;
        let rec = alg.run_observed(&inst, budget, seed, &mut |x| {
            seen += 1;
            if x.iter().any(|v| !(-5.0..=5.0).contains(v)) {
                outside += 1;
            }
        }).unwrap();
        prop_assert_eq!(outside, 0);
        prop_assert_eq!(seen, rec.evaluations);
        prop_assert!(rec.evaluations <= budget);
        prop_assert!(rec.checkpoints.windows(2).all(|w| w[1].1 <= w[0].1));
        prop_assert!(rec.checkpoints.iter().all(|c| c.1 >= 0.0));
        prop_assert_eq!(rec.checkpoints.iter().map(|c| c.0).collect::<Vec<_>>(), checkpoints(budget));
    }

    #[test]
    fn single_runs_reproduce(alg in algorithm(), fid in 1u32..=24, iid in 1u32..=10, run in 0u32..50) {
        let inst = ProblemInstance::new(fid, iid, 2).unwrap();
        let a = run_single(alg, &inst, run, 150, 1).unwrap();
        let b = run_single(alg, &inst, run, 150, 1).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn spsa_spends_even_budgets_exactly() {
    let inst = ProblemInstance::new(1, 1, 2).unwrap();
    let rec = Algorithm::Spsa.run(&inst, 10, 3).unwrap();
    assert_eq!(rec.evaluations, 10);
}

#[test]
fn random_search_is_instance_invariant_on_ellipsoid() {
    let runs = 15;
    let groups: Vec<Vec<f64>> = (1..=20)
        .map(|iid| {
            let inst = ProblemInstance::new(2, iid, 2).unwrap();
            (0..runs)
                .map(|r| run_single(Algorithm::RandomSearch, &inst, r, 300, 1).unwrap().final_precision())
                .collect()
        })
        .collect();
    let per = one_vs_rest_rejection(&groups, TestMethod::MannWhitneyU, 0.01).unwrap();
    let mean = per.iter().map(|s| s.rate).sum::<f64>() / per.len() as f64;
    assert!(mean <= 0.02, "mean one-vs-all rejection {mean}");
}
