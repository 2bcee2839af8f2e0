//! Exploratory landscape analysis features computable from a design alone.
//!
//! Seven groups are covered: y-distribution, meta-model, level set, PCA,
//! nearest-better clustering, dispersion and information content. Every
//! feature has a fixed position in [`catalogue`]; a value that cannot be
//! computed is kept in place as [`FeatureValue::Missing`] with a reason.

mod disp;
mod distr;
mod ic;
mod level;
mod meta;
mod nbc;
mod pca;

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

pub use disp::{disp_features, DEFAULT_DISP_QUANTILES};
pub use distr::{ela_distr, kde_peaks, KDE_PEAK_THRESHOLD};
pub use ic::ic_features;
pub use level::{ela_level, DEFAULT_LEVEL_QUANTILES, LEVEL_FOLDS};
pub use meta::ela_meta;
pub use nbc::nbc_features;
pub use pca::pca_features;

use crate::doe::Doe;
use crate::error::{invalid, Result};
use crate::suite::ProblemId;

/// Bumped whenever a feature name, order or definition changes.
pub const CATALOGUE_VERSION: &str = "instascope-ela/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingReason {
    InsufficientSamples,
    ZeroVariance,
    DivisionByZero,
    Singular,
    NoBetterNeighbor,
    EmptyClass,
    BelowGrid,
    NonFinite,
}

impl MissingReason {
    pub fn code(&self) -> &'static str {
        match self {
            MissingReason::InsufficientSamples => "insufficient_samples",
            MissingReason::ZeroVariance => "zero_variance",
            MissingReason::DivisionByZero => "division_by_zero",
            MissingReason::Singular => "singular",
            MissingReason::NoBetterNeighbor => "no_better_neighbor",
            MissingReason::EmptyClass => "empty_class",
            MissingReason::BelowGrid => "below_grid",
            MissingReason::NonFinite => "non_finite",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeatureValue {
    Value(f64),
    Missing(MissingReason),
}

impl FeatureValue {
    /// Wraps a computed number; non-finite results become missing.
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            FeatureValue::Value(v)
        } else {
            FeatureValue::Missing(MissingReason::NonFinite)
        }
    }

    /// `num / den`, missing when the denominator is zero.
    pub fn ratio(num: f64, den: f64) -> Self {
        if den == 0.0 {
            FeatureValue::Missing(MissingReason::DivisionByZero)
        } else {
            Self::from_f64(num / den)
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            FeatureValue::Value(v) => Some(*v),
            FeatureValue::Missing(_) => None,
        }
    }

    pub fn missing_reason(&self) -> Option<MissingReason> {
        match self {
            FeatureValue::Value(_) => None,
            FeatureValue::Missing(r) => Some(*r),
        }
    }
}

/// Ordered feature name → value map.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(String, FeatureValue)>,
    /// Instance and design seed the values were computed from.
    pub provenance: Option<(ProblemId, u64)>,
    /// Diagnostics such as rank-deficient regression designs.
    pub notes: Vec<String>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: FeatureValue) {
        self.entries.push((name.into(), value));
    }

    pub fn push_value(&mut self, name: impl Into<String>, value: f64) {
        self.push(name, FeatureValue::from_f64(value));
    }

    pub fn push_missing(&mut self, name: impl Into<String>, reason: MissingReason) {
        self.push(name, FeatureValue::Missing(reason));
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.entries.extend(other.entries);
        self.notes.extend(other.notes);
    }

    pub fn get(&self, name: &str) -> Option<FeatureValue> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|v| v.value())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn entries(&self) -> &[(String, FeatureValue)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn non_missing(&self) -> usize {
        self.entries.iter().filter(|(_, v)| v.value().is_some()).count()
    }

    /// Every entry set to missing with one reason, names preserved.
    pub(crate) fn all_missing(names: &[String], reason: MissingReason) -> Self {
        let mut fv = Self::new();
        for n in names {
            fv.push_missing(n.clone(), reason);
        }
        fv
    }
}

fn qlabel(q: f64) -> String {
    format!("{q}")
}

pub(crate) fn distr_names() -> Vec<String> {
    ["skewness", "kurtosis", "number_of_peaks"]
        .iter()
        .map(|s| format!("ela_distr.{s}"))
        .collect()
}

pub(crate) fn meta_names() -> Vec<String> {
    [
        "lin_simple.adj_r2",
        "lin_simple.intercept",
        "lin_simple.coef.min",
        "lin_simple.coef.max",
        "lin_simple.coef.max_by_min",
        "lin_w_interact.adj_r2",
        "quad_simple.adj_r2",
        "quad_simple.cond",
        "quad_w_interact.adj_r2",
    ]
    .iter()
    .map(|s| format!("ela_meta.{s}"))
    .collect()
}

pub(crate) fn level_names(quantiles: &[f64]) -> Vec<String> {
    quantiles
        .iter()
        .flat_map(|&q| {
            ["mmce_lda", "mmce_qda", "lda_qda"]
                .iter()
                .map(move |s| format!("ela_level.{s}_{}", qlabel(q)))
        })
        .collect()
}

pub(crate) fn pca_names() -> Vec<String> {
    ["expl_var", "expl_var_PC1"]
        .iter()
        .flat_map(|k| {
            ["cov_x", "cor_x", "cov_init", "cor_init"]
                .iter()
                .map(move |m| format!("pca.{k}.{m}"))
        })
        .collect()
}

pub(crate) fn nbc_names() -> Vec<String> {
    [
        "nn_nb.sd_ratio",
        "nn_nb.mean_ratio",
        "nn_nb.cor",
        "dist_ratio.coeff_var",
        "nb_fitness.cor",
    ]
    .iter()
    .map(|s| format!("nbc.{s}"))
    .collect()
}

pub(crate) fn disp_names(quantiles: &[f64]) -> Vec<String> {
    ["ratio_mean", "ratio_median", "diff_mean", "diff_median"]
        .iter()
        .flat_map(|s| quantiles.iter().map(move |&q| format!("disp.{s}_{}", qlabel(q))))
        .collect()
}

pub(crate) fn ic_names() -> Vec<String> {
    ["h_max", "eps_s", "eps_max", "m0"]
        .iter()
        .map(|s| format!("ic.{s}"))
        .collect()
}

/// Feature names in output order, for the default quantile settings.
pub fn catalogue() -> Vec<String> {
    let mut names = distr_names();
    names.extend(meta_names());
    names.extend(level_names(&DEFAULT_LEVEL_QUANTILES));
    names.extend(pca_names());
    names.extend(nbc_names());
    names.extend(disp_names(&DEFAULT_DISP_QUANTILES));
    names.extend(ic_names());
    names
}

/// Names of the features that depend on X only.
pub fn x_only_features() -> Vec<String> {
    pca_names().into_iter().filter(|n| n.ends_with("_x")).collect()
}

pub type GroupTimings = Vec<(&'static str, Duration)>;

/// All groups in catalogue order, with per-group wall time.
pub fn compute_all_timed(doe: &Doe) -> (FeatureVector, GroupTimings) {
    type GroupFn = fn(&Doe) -> FeatureVector;
    let groups: [(&'static str, GroupFn); 7] = [
        ("ela_distr", ela_distr),
        ("ela_meta", ela_meta),
        ("ela_level", |d| ela_level(d, &DEFAULT_LEVEL_QUANTILES)),
        ("pca", pca_features),
        ("nbc", nbc_features),
        ("disp", |d| disp_features(d, &DEFAULT_DISP_QUANTILES)),
        ("ic", ic_features),
    ];
    let mut fv = FeatureVector::new();
    let mut timings = Vec::with_capacity(groups.len());
    for (name, f) in groups {
        let start = Instant::now();
        fv.extend(f(doe));
        timings.push((name, start.elapsed()));
    }
    fv.provenance = doe.instance.map(|id| (id, doe.seed));
    (fv, timings)
}

pub fn compute_all(doe: &Doe) -> FeatureVector {
    compute_all_timed(doe).0
}

/// Features that vary across rows, and those dropped for being constant or
/// entirely missing.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedCatalogue {
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
}

pub fn drop_degenerate(rows: &[FeatureVector]) -> Result<ReducedCatalogue> {
    if rows.len() < 2 {
        return invalid("need at least 2 feature vectors to detect constant features");
    }
    let names: Vec<String> = rows[0].names().map(String::from).collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for name in names {
        let distinct: BTreeSet<u64> = rows
            .iter()
            .filter_map(|r| r.value(&name))
            .map(|v| v.to_bits())
            .collect();
        if distinct.len() >= 2 {
            kept.push(name);
        } else {
            dropped.push(name);
        }
    }
    Ok(ReducedCatalogue { kept, dropped })
}

// shared numeric helpers

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (divisor n - 1).
pub(crate) fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Pearson correlation, missing when either side has zero variance.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> FeatureValue {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return FeatureValue::Missing(MissingReason::ZeroVariance);
    }
    FeatureValue::from_f64(sab / (saa * sbb).sqrt())
}
