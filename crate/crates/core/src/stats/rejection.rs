use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bh::benjamini_hochberg;
use super::ks::{ks_record_sorted, KS_MIN_SIZE};
use super::{mann_whitney_u, sorted_copy, TestMethod, TestRecord};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionUnit {
    PerFeature,
    PerInstance,
    PerFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub unit: RejectionUnit,
    pub numerator: usize,
    pub denominator: usize,
    pub rate: f64,
}

impl RejectionSummary {
    pub fn new(unit: RejectionUnit, numerator: usize, denominator: usize) -> Result<Self> {
        if denominator == 0 {
            return invalid("rejection summary over zero tests");
        }
        Ok(Self {
            unit,
            numerator,
            denominator,
            rate: numerator as f64 / denominator as f64,
        })
    }
}

/// One corrected test between groups `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTest {
    pub i: usize,
    pub j: usize,
    pub record: TestRecord,
    pub p_adjusted: f64,
    pub rejected: bool,
}

/// All pairwise tests among a set of groups, BH-corrected as one family.
#[derive(Clone, Debug, Default)]
pub struct PairwiseFamily {
    pub groups: usize,
    pub tests: Vec<PairTest>,
    /// Pairs whose test could not run, with the reason.
    pub failed: Vec<(usize, usize, String)>,
}

impl PairwiseFamily {
    pub fn summary(&self, unit: RejectionUnit) -> Result<RejectionSummary> {
        let rejected = self.tests.iter().filter(|t| t.rejected).count();
        RejectionSummary::new(unit, rejected, self.tests.len())
    }

    /// For each group, the fraction of its successful pairwise tests that
    /// rejected under the family-wide correction. `None` when a group has no
    /// successful test.
    pub fn per_group(&self) -> Vec<Option<RejectionSummary>> {
        let mut num = vec![0usize; self.groups];
        let mut den = vec![0usize; self.groups];
        for t in &self.tests {
            for g in [t.i, t.j] {
                den[g] += 1;
                if t.rejected {
                    num[g] += 1;
                }
            }
        }
        num.into_iter()
            .zip(den)
            .map(|(n, d)| RejectionSummary::new(RejectionUnit::PerInstance, n, d).ok())
            .collect()
    }
}

/// Runs one two-sample test by method.
pub fn run_test(method: TestMethod, a: &[f64], b: &[f64]) -> Result<TestRecord> {
    match method {
        TestMethod::KolmogorovSmirnov => super::ks_two_sample(a, b),
        TestMethod::MannWhitneyU => mann_whitney_u(a, b),
        TestMethod::JarqueBera => invalid("Jarque-Bera is a one-sample test"),
    }
}

fn all_pairs(g: usize) -> Vec<(usize, usize)> {
    (0..g).flat_map(|i| (i + 1..g).map(move |j| (i, j))).collect()
}

type RawPair = ((usize, usize), Result<TestRecord>);

fn raw_pairs(groups: &[Vec<f64>], method: TestMethod) -> Result<Vec<RawPair>> {
    if groups.len() < 2 {
        return invalid("pairwise comparison needs at least 2 groups");
    }
    let pairs = all_pairs(groups.len());
    let out = if method == TestMethod::KolmogorovSmirnov {
        let sorted: Vec<Vec<f64>> = groups.iter().map(|g| sorted_copy(g)).collect();
        pairs
            .into_par_iter()
            .map(|(i, j)| {
                let (a, b) = (&sorted[i], &sorted[j]);
                let rec = if a.len() < KS_MIN_SIZE || b.len() < KS_MIN_SIZE {
                    invalid(format!("sample sizes {} and {} below KS minimum", a.len(), b.len()))
                } else if a.iter().chain(b).any(|v| !v.is_finite()) {
                    invalid("non-finite values")
                } else {
                    Ok(ks_record_sorted(a, b))
                };
                ((i, j), rec)
            })
            .collect()
    } else {
        pairs
            .into_par_iter()
            .map(|(i, j)| ((i, j), run_test(method, &groups[i], &groups[j])))
            .collect()
    };
    Ok(out)
}

/// Tests every unordered pair of groups and applies BH across the whole
/// family. Failed pairs are excluded from the family and reported.
pub fn pairwise_tests(groups: &[Vec<f64>], method: TestMethod, alpha: f64) -> Result<PairwiseFamily> {
    let raw = raw_pairs(groups, method)?;
    let mut family = PairwiseFamily {
        groups: groups.len(),
        ..Default::default()
    };
    let mut ok = Vec::new();
    for ((i, j), rec) in raw {
        match rec {
            Ok(r) => ok.push((i, j, r)),
            Err(e) => {
                log::debug!("pair ({i}, {j}) failed: {e}");
                family.failed.push((i, j, e.to_string()));
            }
        }
    }
    let pvals: Vec<f64> = ok.iter().map(|(_, _, r)| r.p_value).collect();
    let bh = benjamini_hochberg(&pvals, alpha)?;
    family.tests = ok
        .into_iter()
        .zip(bh.rejected.into_iter().zip(bh.adjusted))
        .map(|((i, j, record), (rejected, p_adjusted))| PairTest {
            i,
            j,
            record,
            p_adjusted,
            rejected,
        })
        .collect();
    Ok(family)
}

/// Fraction of BH-corrected pairwise tests that reject.
pub fn pairwise_rejection_rate(
    groups: &[Vec<f64>],
    method: TestMethod,
    alpha: f64,
) -> Result<RejectionSummary> {
    pairwise_tests(groups, method, alpha)?.summary(RejectionUnit::PerFeature)
}

/// For each group, tests it against every other group, corrects that
/// group's g-1 tests with BH, and reports its rejection fraction.
pub fn one_vs_rest_rejection(
    groups: &[Vec<f64>],
    method: TestMethod,
    alpha: f64,
) -> Result<Vec<RejectionSummary>> {
    let raw = raw_pairs(groups, method)?;
    let g = groups.len();
    let mut per_group: Vec<Vec<f64>> = vec![Vec::new(); g];
    for ((i, j), rec) in &raw {
        match rec {
            Ok(r) => {
                per_group[*i].push(r.p_value);
                per_group[*j].push(r.p_value);
            }
            Err(e) => log::debug!("pair ({i}, {j}) failed: {e}"),
        }
    }
    per_group
        .iter()
        .map(|pvals| {
            let bh = benjamini_hochberg(pvals, alpha)?;
            RejectionSummary::new(RejectionUnit::PerInstance, bh.rejections(), pvals.len())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_size() {
        let groups: Vec<Vec<f64>> = (0..500).map(|i| vec![i as f64; 5]).collect();
        assert_eq!(all_pairs(groups.len()).len(), 124_750);
    }

    #[test]
    fn disjoint_supports_always_reject() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| 100.0 + i as f64).collect();
        let s = pairwise_rejection_rate(&[a, b], TestMethod::KolmogorovSmirnov, 0.01).unwrap();
        assert_eq!((s.numerator, s.denominator, s.rate), (1, 1, 1.0));
    }

    #[test]
    fn identical_groups_never_reject() {
        let a: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let groups = vec![a.clone(), a.clone(), a];
        let s = one_vs_rest_rejection(&groups, TestMethod::MannWhitneyU, 0.01).unwrap();
        assert!(s.iter().all(|r| r.numerator == 0 && r.denominator == 2));
    }

    #[test]
    fn failed_pairs_are_excluded() {
        let groups = vec![vec![1.0, 2.0], (0..10).map(f64::from).collect(), (0..10).map(f64::from).collect()];
        let fam = pairwise_tests(&groups, TestMethod::KolmogorovSmirnov, 0.01).unwrap();
        assert_eq!(fam.tests.len(), 1);
        assert_eq!(fam.failed.len(), 2);
        assert!(fam.per_group()[0].is_none());
    }
}
