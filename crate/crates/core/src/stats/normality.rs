use super::{TestMethod, TestRecord};
use crate::error::{invalid, Result};

/// Mean and central moments `(mean, m2, m3, m4)` with divisor n.
pub fn moments(sample: &[f64]) -> (f64, f64, f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in sample {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

/// Jarque-Bera normality test, p-value from χ² with 2 degrees of freedom.
pub fn normality_test(sample: &[f64]) -> Result<TestRecord> {
    let n = sample.len();
    if n < 20 {
        return invalid(format!("normality test needs at least 20 values, got {n}"));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return invalid("normality test needs finite values");
    }
    let (_, m2, m3, m4) = moments(sample);
    if !(m2 > 0.0) {
        return Ok(TestRecord::new(TestMethod::JarqueBera, 0.0, 0.0, n, 0).with_note("zero_variance"));
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2) - 3.0;
    let jb = n as f64 / 6.0 * (skew * skew + kurt * kurt / 4.0);
    // survival of χ²(2) is exp(-x/2)
    Ok(TestRecord::new(TestMethod::JarqueBera, jb, (-jb / 2.0).exp(), n, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_mass_rejected() {
        let s: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let r = normality_test(&s).unwrap();
        // S = 0, K = -2: JB = 100/6 · 1
        assert!((r.statistic - 100.0 / 6.0).abs() < 1e-12);
        assert!(r.p_value < 0.01);
    }

    #[test]
    fn degenerate() {
        let r = normality_test(&[1.0; 30]).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert_eq!(r.note.as_deref(), Some("zero_variance"));
        assert!(normality_test(&[1.0; 5]).is_err());
    }
}
