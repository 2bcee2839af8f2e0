use super::{dist, ic_names, FeatureVector, MissingReason};
use crate::doe::Doe;

const EPS_LOG_MIN: f64 = -5.0;
const EPS_LOG_MAX: f64 = 15.0;
const EPS_STEPS: usize = 1000;
/// Entropy level defining the settling sensitivity.
const SETTLING: f64 = 0.05;

/// Greedy nearest-neighbour tour from index 0; ties go to the lowest index.
pub(crate) fn nn_tour(x: &[Vec<f64>]) -> Vec<usize> {
    let n = x.len();
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut cur = 0;
    visited[0] = true;
    tour.push(0);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !visited[j] {
                let d = dist(&x[cur], &x[j]);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        visited[best] = true;
        tour.push(best);
        cur = best;
    }
    tour
}

/// Objective change per unit distance along the tour, skipping zero-length
/// steps.
pub(crate) fn tour_slopes(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let tour = nn_tour(x);
    tour.windows(2)
        .filter_map(|w| {
            let d = dist(&x[w[0]], &x[w[1]]);
            (d > 0.0).then(|| (y[w[1]] - y[w[0]]) / d)
        })
        .collect()
}

fn symbol(r: f64, eps: f64) -> i8 {
    if r > eps {
        1
    } else if r < -eps {
        -1
    } else {
        0
    }
}

/// Entropy (base 6) of consecutive unequal symbol pairs.
pub(crate) fn pair_entropy(slopes: &[f64], eps: f64) -> f64 {
    if slopes.len() < 2 {
        return 0.0;
    }
    let mut counts = [0usize; 9];
    for w in slopes.windows(2) {
        let (a, b) = (symbol(w[0], eps), symbol(w[1], eps));
        if a != b {
            counts[((a + 1) * 3 + (b + 1)) as usize] += 1;
        }
    }
    let total = (slopes.len() - 1) as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log(6.0)
        })
        .sum()
}

/// Fraction of direction changes among nonzero symbols at eps = 0.
pub(crate) fn partial_information(slopes: &[f64]) -> f64 {
    let signs: Vec<i8> = slopes.iter().map(|&r| symbol(r, 0.0)).filter(|&s| s != 0).collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    changes as f64 / (slopes.len() - 1) as f64
}

/// Information content features along a nearest-neighbour tour.
pub fn ic_features(doe: &Doe) -> FeatureVector {
    let names = ic_names();
    if doe.n() < 10 {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let slopes = tour_slopes(&doe.x, &doe.y);
    if slopes.len() < 2 {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let mut h_max = f64::NEG_INFINITY;
    let mut log_eps_max = EPS_LOG_MIN;
    let mut log_eps_s = None;
    for k in 0..=EPS_STEPS {
        let le = EPS_LOG_MIN + (EPS_LOG_MAX - EPS_LOG_MIN) * k as f64 / EPS_STEPS as f64;
        let h = pair_entropy(&slopes, 10f64.powf(le));
        if h > h_max {
            h_max = h;
            log_eps_max = le;
        }
        if h >= SETTLING {
            log_eps_s = Some(le);
        }
    }
    let mut fv = FeatureVector::new();
    fv.push_value(&names[0], h_max);
    match log_eps_s {
        Some(v) => fv.push_value(&names[1], v),
        None => fv.push_missing(&names[1], MissingReason::BelowGrid),
    }
    fv.push_value(&names[2], log_eps_max);
    fv.push_value(&names[3], partial_information(&slopes));
    fv
}
