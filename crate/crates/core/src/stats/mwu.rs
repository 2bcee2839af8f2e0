use statrs::distribution::{ContinuousCDF, Normal};

use super::{TestMethod, TestRecord};
use crate::error::{invalid, Result};

/// Pooled sizes up to this bound use the exact permutation distribution.
pub const MWU_EXACT_MAX: usize = 12;

/// Midranks (1-based) of `values`, ties sharing the average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their mean
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Counts, over every choice of `k` positions out of `doubled.len()`, the
/// subsets whose rank-sum deviation from its mean is at least `observed_dev`.
/// Deviations are measured as `|n·Σ(2r) - k·Σ_all(2r)|` to stay in integers.
fn exact_tail(doubled: &[i64], k: usize, observed_dev: i64, total_doubled: i64) -> (u64, u64) {
    fn walk(
        doubled: &[i64],
        start: usize,
        left: usize,
        sum: i64,
        target: &dyn Fn(i64) -> bool,
        counts: &mut (u64, u64),
    ) {
        if left == 0 {
            counts.1 += 1;
            if target(sum) {
                counts.0 += 1;
            }
            return;
        }
        for i in start..=doubled.len() - left {
            walk(doubled, i + 1, left - 1, sum + doubled[i], target, counts);
        }
    }
    let n = doubled.len() as i64;
    let centre = total_doubled * k as i64;
    let is_extreme = |sum: i64| (sum * n - centre).abs() >= observed_dev;
    let mut counts = (0, 0);
    walk(doubled, 0, k, 0, &is_extreme, &mut counts);
    counts
}

/// Two-sided Mann-Whitney U test. The statistic is `U` of the first sample.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestRecord> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 3 || n2 < 3 {
        return invalid(format!("MWU needs at least 3 values per sample, got {n1} and {n2}"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return invalid("MWU needs finite values");
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = n1 + n2;
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let half = (n1 * n2) as f64 / 2.0;

    if pooled.iter().all(|&v| v == pooled[0]) {
        return Ok(TestRecord::new(TestMethod::MannWhitneyU, half, 1.0, n1, n2).with_note("all_tied"));
    }

    if n <= MWU_EXACT_MAX {
        let doubled: Vec<i64> = ranks.iter().map(|r| (2.0 * r) as i64).collect();
        let total: i64 = doubled.iter().sum();
        let observed: i64 = doubled[..n1].iter().sum();
        let observed_dev = (observed * n as i64 - total * n1 as i64).abs();
        let (extreme, count) = exact_tail(&doubled, n1, observed_dev, total);
        return Ok(TestRecord::new(
            TestMethod::MannWhitneyU,
            u,
            extreme as f64 / count as f64,
            n1,
            n2,
        ));
    }

    let ties: f64 = tie_groups(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
    let nf = n as f64;
    let var = (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
    if !(var > 0.0) {
        return Ok(TestRecord::new(TestMethod::MannWhitneyU, u, 1.0, n1, n2).with_note("zero_variance"));
    }
    let z = ((u - half).abs() - 0.5).max(0.0) / var.sqrt();
    let p = 2.0 * Normal::standard().sf(z);
    Ok(TestRecord::new(TestMethod::MannWhitneyU, u, p.min(1.0), n1, n2))
}

fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut start = 0;
    while start < s.len() {
        let mut end = start + 1;
        while end < s.len() && s[end] == s[start] {
            end += 1;
        }
        groups.push(end - start);
        start = end;
    }
    groups
}
