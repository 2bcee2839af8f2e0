use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::SliceRandom;

use super::{level_names, FeatureValue, FeatureVector, MissingReason};
use crate::doe::Doe;
use crate::rng::{mix_seed, stream_rng};

pub const DEFAULT_LEVEL_QUANTILES: [f64; 3] = [0.1, 0.25, 0.5];
pub const LEVEL_FOLDS: usize = 10;
const FOLD_STREAM: u64 = 0x1e7e1;

/// Class labels: `true` for points at or below the q-th order statistic.
fn level_labels(y: &[f64], q: f64) -> Vec<bool> {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let cut = s[((s.len() - 1) as f64 * q).floor() as usize];
    y.iter().map(|&v| v <= cut).collect()
}

/// Stratified fold ids. Positions are shuffled within each class and dealt
/// round-robin, continuing across classes so fold sizes stay balanced.
fn stratified_folds(labels: &[bool], seed: u64, attempt: u64) -> Vec<usize> {
    let mut rng = stream_rng(mix_seed(&[seed, attempt]), FOLD_STREAM);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[i] = next % LEVEL_FOLDS;
            next += 1;
        }
    }
    folds
}

/// Every training split keeps at least two points of each class.
fn folds_usable(labels: &[bool], folds: &[usize]) -> bool {
    let total_pos = labels.iter().filter(|&&l| l).count();
    let total_neg = labels.len() - total_pos;
    (0..LEVEL_FOLDS).all(|f| {
        let pos = labels.iter().zip(folds).filter(|(&l, &k)| l && k == f).count();
        let neg = labels.iter().zip(folds).filter(|(&l, &k)| !l && k == f).count();
        total_pos - pos >= 2 && total_neg - neg >= 2
    })
}

/// Cholesky factor of `s`, adding a growing ridge when `s` is not positive
/// definite.
fn robust_cholesky(s: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(s.clone()) {
        return Some(c);
    }
    let d = s.nrows();
    let scale = (s.trace() / d as f64).abs().max(f64::MIN_POSITIVE);
    let mut ridge = 1e-10 * scale;
    for _ in 0..12 {
        let mut r = s.clone();
        for i in 0..d {
            r[(i, i)] += ridge;
        }
        if let Some(c) = Cholesky::new(r) {
            return Some(c);
        }
        ridge *= 10.0;
    }
    None
}

struct ClassStats {
    mean: DVector<f64>,
    scatter: DMatrix<f64>,
    count: usize,
}

fn class_stats(x: &[Vec<f64>], members: &[usize]) -> ClassStats {
    let d = x[0].len();
    let mut mean = DVector::zeros(d);
    for &i in members {
        mean += DVector::from_row_slice(&x[i]);
    }
    mean /= members.len() as f64;
    let mut scatter = DMatrix::zeros(d, d);
    for &i in members {
        let c = DVector::from_row_slice(&x[i]) - &mean;
        scatter += &c * c.transpose();
    }
    ClassStats {
        mean,
        scatter,
        count: members.len(),
    }
}

/// Discriminant scores: higher is more likely.
trait Classifier {
    fn score(&self, x: &DVector<f64>, class: usize) -> f64;
    fn predict(&self, x: &DVector<f64>) -> bool {
        // class 0 is the "low" set, ties go to it
        self.score(x, 0) >= self.score(x, 1)
    }
}

struct Lda {
    means: [DVector<f64>; 2],
    chol: Cholesky<f64, Dyn>,
    log_prior: [f64; 2],
}

impl Classifier for Lda {
    fn score(&self, x: &DVector<f64>, k: usize) -> f64 {
        let diff = x - &self.means[k];
        let v = self.chol.solve(&diff);
        -0.5 * diff.dot(&v) + self.log_prior[k]
    }
}

struct Qda {
    means: [DVector<f64>; 2],
    chols: [Cholesky<f64, Dyn>; 2],
    log_det: [f64; 2],
    log_prior: [f64; 2],
}

impl Classifier for Qda {
    fn score(&self, x: &DVector<f64>, k: usize) -> f64 {
        let diff = x - &self.means[k];
        let v = self.chols[k].solve(&diff);
        -0.5 * diff.dot(&v) - 0.5 * self.log_det[k] + self.log_prior[k]
    }
}

fn log_det(c: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * c.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// Cross-validated error rates of (LDA, QDA). `None` if a covariance cannot
/// be factorised even with regularisation.
fn cv_errors(x: &[Vec<f64>], labels: &[bool], folds: &[usize]) -> Option<(f64, f64)> {
    let mut lda_err = 0.0;
    let mut qda_err = 0.0;
    let mut used = 0;
    for f in 0..LEVEL_FOLDS {
        let test: Vec<usize> = (0..x.len()).filter(|&i| folds[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        let low: Vec<usize> = (0..x.len()).filter(|&i| folds[i] != f && labels[i]).collect();
        let high: Vec<usize> = (0..x.len()).filter(|&i| folds[i] != f && !labels[i]).collect();
        let cls = [class_stats(x, &low), class_stats(x, &high)];
        let n_train = (low.len() + high.len()) as f64;
        let log_prior = [
            (low.len() as f64 / n_train).ln(),
            (high.len() as f64 / n_train).ln(),
        ];
        let pooled = (&cls[0].scatter + &cls[1].scatter) / (n_train - 2.0);
        let lda = Lda {
            means: [cls[0].mean.clone(), cls[1].mean.clone()],
            chol: robust_cholesky(&pooled)?,
            log_prior,
        };
        let c0 = robust_cholesky(&(&cls[0].scatter / (cls[0].count as f64 - 1.0)))?;
        let c1 = robust_cholesky(&(&cls[1].scatter / (cls[1].count as f64 - 1.0)))?;
        let qda = Qda {
            means: [cls[0].mean.clone(), cls[1].mean.clone()],
            log_det: [log_det(&c0), log_det(&c1)],
            chols: [c0, c1],
            log_prior,
        };
        let mut wrong_lda = 0;
        let mut wrong_qda = 0;
        for &i in &test {
            let xi = DVector::from_row_slice(&x[i]);
            if lda.predict(&xi) != labels[i] {
                wrong_lda += 1;
            }
            if qda.predict(&xi) != labels[i] {
                wrong_qda += 1;
            }
        }
        lda_err += wrong_lda as f64 / test.len() as f64;
        qda_err += wrong_qda as f64 / test.len() as f64;
        used += 1;
    }
    Some((lda_err / used as f64, qda_err / used as f64))
}

/// Level-set features: LDA and QDA misclassification errors for the
/// sub-level sets at each quantile.
pub fn ela_level(doe: &Doe, quantiles: &[f64]) -> FeatureVector {
    let names = level_names(quantiles);
    if doe.n() < 10 * LEVEL_FOLDS || doe.dim() == 0 {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let mut fv = FeatureVector::new();
    for (k, &q) in quantiles.iter().enumerate() {
        let keys = &names[3 * k..3 * k + 3];
        let labels = level_labels(&doe.y, q);
        let pos = labels.iter().filter(|&&l| l).count();
        if pos == labels.len() {
            for n in keys {
                fv.push_missing(n, MissingReason::EmptyClass);
            }
            continue;
        }
        let mut folds = stratified_folds(&labels, doe.seed, 0);
        if !folds_usable(&labels, &folds) {
            folds = stratified_folds(&labels, doe.seed, 1);
        }
        if !folds_usable(&labels, &folds) {
            for n in keys {
                fv.push_missing(n, MissingReason::EmptyClass);
            }
            continue;
        }
        match cv_errors(&doe.x, &labels, &folds) {
            Some((lda, qda)) => {
                fv.push_value(&keys[0], lda);
                fv.push_value(&keys[1], qda);
                fv.push(&keys[2], FeatureValue::ratio(lda, qda));
            }
            None => {
                for n in keys {
                    fv.push_missing(n, MissingReason::Singular);
                }
            }
        }
    }
    fv
}
