use super::{sorted_copy, TestMethod, TestRecord};
use crate::error::{invalid, Result};
use std::f64::consts::PI;

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi theta form converges fast for small arguments
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let mut sum = 0.0;
        for k in 1..=50u32 {
            let e = ((2 * k - 1) * (2 * k - 1)) as f64;
            let term = y.powf(e);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100u32 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Two-sample KS distance on ascending slices. Ties across samples are
/// stepped together.
pub(crate) fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// `sup |ECDF_a - ECDF_b|`, for any non-empty samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return invalid("KS statistic needs non-empty samples");
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return invalid("KS statistic needs finite values");
    }
    Ok(ks_sorted(&sorted_copy(a), &sorted_copy(b)))
}

pub(crate) fn ks_record_sorted(a: &[f64], b: &[f64]) -> TestRecord {
    let d = ks_sorted(a, b);
    let (n1, n2) = (a.len(), b.len());
    let en = (n1 * n2) as f64 / (n1 + n2) as f64;
    TestRecord::new(TestMethod::KolmogorovSmirnov, d, kolmogorov_sf(en.sqrt() * d), n1, n2)
}

pub(crate) const KS_MIN_SIZE: usize = 5;

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestRecord> {
    if a.len() < KS_MIN_SIZE || b.len() < KS_MIN_SIZE {
        return invalid(format!(
            "KS test needs at least {KS_MIN_SIZE} values per sample, got {} and {}",
            a.len(),
            b.len()
        ));
    }
    ks_statistic(a, b)?;
    Ok(ks_record_sorted(&sorted_copy(a), &sorted_copy(b)))
}

/// CDF of Uniform(lower, upper).
pub fn uniform_cdf(lower: f64, upper: f64) -> impl Fn(f64) -> f64 {
    move |x| ((x - lower) / (upper - lower)).clamp(0.0, 1.0)
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestRecord> {
    if sample.len() < KS_MIN_SIZE {
        return invalid("one-sample KS needs at least 5 values");
    }
    let s = sorted_copy(sample);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    Ok(TestRecord::new(
        TestMethod::KolmogorovSmirnov,
        d,
        kolmogorov_sf(n.sqrt() * d),
        s.len(),
        0,
    ))
}
