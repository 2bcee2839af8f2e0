use super::sorted_copy;
use crate::error::{invalid, Result};

/// Right-continuous ECDF as `(value, fraction ≤ value)` steps, ties collapsed.
pub fn ecdf(sample: &[f64]) -> Result<Vec<(f64, f64)>> {
    if sample.is_empty() {
        return invalid("ECDF of an empty sample");
    }
    let s = sorted_copy(sample);
    let n = s.len() as f64;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in s.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match steps.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => steps.push((v, frac)),
        }
    }
    Ok(steps)
}
