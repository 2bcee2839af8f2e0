use std::f64::consts::PI;

use super::{distr_names, sd, FeatureValue, FeatureVector, MissingReason};
use crate::doe::Doe;
use crate::stats::{moments, quantile_sorted};

const KDE_GRID: usize = 512;
/// Local maxima below this fraction of the peak density are ignored.
pub const KDE_PEAK_THRESHOLD: f64 = 1e-3;

/// Silverman's rule of thumb bandwidth.
fn silverman_bandwidth(y: &[f64]) -> f64 {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let sdev = sd(y);
    let mut lo = sdev.min(iqr / 1.34);
    if !(lo > 0.0) {
        lo = if sdev > 0.0 {
            sdev
        } else if y[0] != 0.0 {
            y[0].abs()
        } else {
            1.0
        };
    }
    0.9 * lo * (y.len() as f64).powf(-0.2)
}

/// Number of modes of a Gaussian KDE of `y` on a 512-point grid.
pub fn kde_peaks(y: &[f64], threshold: f64) -> usize {
    let bw = silverman_bandwidth(y);
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * bw;
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bw;
    let norm = 1.0 / (y.len() as f64 * bw * (2.0 * PI).sqrt());
    let density: Vec<f64> = (0..KDE_GRID)
        .map(|k| {
            let g = lo + (hi - lo) * k as f64 / (KDE_GRID - 1) as f64;
            y.iter()
                .map(|&v| {
                    let u = (g - v) / bw;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    let max = density.iter().copied().fold(0.0, f64::max);
    (1..KDE_GRID - 1)
        .filter(|&k| {
            density[k] > density[k - 1] && density[k] >= density[k + 1] && density[k] >= threshold * max
        })
        .count()
}

/// Skewness, excess kurtosis and number of KDE peaks of the objective values.
pub fn ela_distr(doe: &Doe) -> FeatureVector {
    let names = distr_names();
    let y = &doe.y;
    if y.len() < 10 {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let mut fv = FeatureVector::new();
    let (_, m2, m3, m4) = moments(y);
    if m2 > 0.0 {
        fv.push_value(&names[0], m3 / m2.powf(1.5));
        fv.push_value(&names[1], m4 / (m2 * m2) - 3.0);
        fv.push_value(&names[2], kde_peaks(y, KDE_PEAK_THRESHOLD) as f64);
    } else {
        for n in &names {
            fv.push(n, FeatureValue::Missing(MissingReason::ZeroVariance));
        }
    }
    fv
}
