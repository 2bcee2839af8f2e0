//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-sample KS distance by comparing both empirical CDFs at every
/// pooled value.
pub fn ks_distance_naive(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0.0f64;
    for &t in a.iter().chain(b) {
        let fa = a.iter().filter(|&&v| v <= t).count() as f64 / a.len() as f64;
        let fb = b.iter().filter(|&&v| v <= t).count() as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Exact two-sided MWU p-value by enumerating every subset of the pooled
/// sample as a bitmask. Rank sums are kept doubled so midranks stay integral.
pub fn mwu_exact_p_naive(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let n1 = a.len();
    let doubled_rank = |i: usize| -> i64 {
        let below = pooled.iter().filter(|&&v| v < pooled[i]).count() as i64;
        let equal = pooled.iter().filter(|&&v| v == pooled[i]).count() as i64;
        // mean of ranks below+1 ..= below+equal, doubled
        2 * below + equal + 1
    };
    let r2: Vec<i64> = (0..n).map(doubled_rank).collect();
    // centre of the doubled rank sum is n1 * (n + 1)
    let centre = (n1 * (n + 1)) as i64;
    let observed = (r2[..n1].iter().sum::<i64>() - centre).abs();
    let mut extreme = 0u64;
    let mut total = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        total += 1;
        let s: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| r2[i]).sum();
        if (s - centre).abs() >= observed {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// BH rejection set from the definition: find the largest k with
/// p_(k) <= k alpha / m and reject every p-value not above p_(k).
pub fn bh_naive(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut threshold = None;
    for k in (1..=m).rev() {
        if sorted[k - 1] <= k as f64 * alpha / m as f64 {
            threshold = Some(sorted[k - 1]);
            break;
        }
    }
    match threshold {
        Some(t) => p.iter().map(|&v| v <= t).collect(),
        None => vec![false; m],
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small sample, either continuous or drawn from a few integers so that
/// ties are common.
pub fn small_sample(rng: &mut ChaCha8Rng, n: usize, tied: bool) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if tied {
                rng.random_range(0..4) as f64
            } else {
                rng.random::<f64>() * 10.0 - 5.0
            }
        })
        .collect()
}

/// P-values with a mix of very small, moderate, repeated and unit values.
pub fn pvalue_family(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| match rng.random_range(0..4) {
            0 => rng.random::<f64>() * 1e-3,
            1 => (rng.random::<f64>() * 20.0).round() / 100.0,
            2 => 1.0,
            _ => rng.random::<f64>(),
        })
        .collect()
}
