//! Nonparametric two-sample tests, multiple-testing correction and the
//! rejection-rate aggregations built on them.

mod bh;
mod ecdf;
mod ks;
mod mwu;
mod normality;
mod rejection;

use serde::{Deserialize, Serialize};

pub use bh::{benjamini_hochberg, BhResult};
pub use ecdf::ecdf;
pub use ks::{kolmogorov_sf, ks_one_sample, ks_statistic, ks_two_sample, uniform_cdf};
pub use mwu::{mann_whitney_u, midranks, MWU_EXACT_MAX};
pub use normality::{moments, normality_test};
pub use rejection::{
    one_vs_rest_rejection, pairwise_rejection_rate, pairwise_tests, run_test, PairTest,
    PairwiseFamily, RejectionSummary, RejectionUnit,
};

/// Default significance level (99% confidence).
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestMethod {
    #[serde(rename = "KS")]
    KolmogorovSmirnov,
    #[serde(rename = "MWU")]
    MannWhitneyU,
    #[serde(rename = "JB")]
    JarqueBera,
}

impl TestMethod {
    pub fn label(&self) -> &'static str {
        match self {
            TestMethod::KolmogorovSmirnov => "KS",
            TestMethod::MannWhitneyU => "MWU",
            TestMethod::JarqueBera => "JB",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    /// Zero for one-sample tests.
    pub n2: usize,
    pub method: TestMethod,
    /// Set when a degenerate-input convention decided the result.
    pub note: Option<String>,
}

impl TestRecord {
    pub(crate) fn new(method: TestMethod, statistic: f64, p_value: f64, n1: usize, n2: usize) -> Self {
        Self {
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            n1,
            n2,
            method,
            note: None,
        }
    }

    pub(crate) fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

/// Type-7 (linear interpolation) quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let g = h - lo as f64;
    if g == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + g * (sorted[hi] - sorted[lo])
    }
}

pub(crate) fn sorted_copy(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }
}
