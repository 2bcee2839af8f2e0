use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BhResult {
    /// Rejection flags in input order.
    pub rejected: Vec<bool>,
    /// BH-adjusted p-values in input order.
    pub adjusted: Vec<f64>,
}

impl BhResult {
    pub fn rejections(&self) -> usize {
        self.rejected.iter().filter(|&&r| r).count()
    }
}

/// Benjamini-Hochberg step-up procedure at FDR level `alpha`.
pub fn benjamini_hochberg(pvals: &[f64], alpha: f64) -> Result<BhResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return invalid(format!("p-value {p} outside [0, 1]"));
    }
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]));

    let cutoff = order
        .iter()
        .enumerate()
        .rev()
        .find(|(rank, &idx)| pvals[idx] <= (rank + 1) as f64 / m as f64 * alpha)
        .map(|(rank, _)| rank + 1)
        .unwrap_or(0);

    let mut rejected = vec![false; m];
    for &idx in &order[..cutoff] {
        rejected[idx] = true;
    }

    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &idx) in order.iter().enumerate().rev() {
        running = running.min(m as f64 * pvals[idx] / (rank + 1) as f64);
        adjusted[idx] = running.min(1.0);
    }
    Ok(BhResult { rejected, adjusted })
}
