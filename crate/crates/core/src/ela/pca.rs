use nalgebra::DMatrix;

use super::{pca_names, FeatureValue, FeatureVector, MissingReason};
use crate::doe::Doe;

const EXPLAINED: f64 = 0.9;

fn covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows() as f64;
    let means = data.row_mean();
    let mut c = data.clone();
    for mut row in c.row_iter_mut() {
        row -= &means;
    }
    (c.transpose() * &c) / (n - 1.0)
}

/// `None` when some column has zero variance.
fn correlation(cov: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sd: Vec<f64> = cov.diagonal().iter().map(|v| v.sqrt()).collect();
    if sd.iter().any(|&s| !(s > 0.0)) {
        return None;
    }
    Some(DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| {
        if i == j {
            1.0
        } else {
            cov[(i, j)] / (sd[i] * sd[j])
        }
    }))
}

/// (components for 90% / total components, first component's share).
fn explained(m: &DMatrix<f64>) -> (FeatureValue, FeatureValue) {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = ev.iter().sum();
    if !(total > 0.0) {
        let miss = FeatureValue::Missing(MissingReason::ZeroVariance);
        return (miss, miss);
    }
    let mut acc = 0.0;
    let mut k = ev.len();
    for (i, v) in ev.iter().enumerate() {
        acc += v;
        if acc / total >= EXPLAINED {
            k = i + 1;
            break;
        }
    }
    (
        FeatureValue::from_f64(k as f64 / ev.len() as f64),
        FeatureValue::from_f64(ev[0] / total),
    )
}

/// Principal-component features of X and of X joined with y.
pub fn pca_features(doe: &Doe) -> FeatureVector {
    let names = pca_names();
    let (n, d) = (doe.n(), doe.dim());
    if d == 0 || n <= d {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let x = DMatrix::from_fn(n, d, |i, j| doe.x[i][j]);
    let xy = DMatrix::from_fn(n, d + 1, |i, j| if j < d { doe.x[i][j] } else { doe.y[i] });
    let cov_x = covariance(&x);
    let cov_init = covariance(&xy);
    let miss = (
        FeatureValue::Missing(MissingReason::ZeroVariance),
        FeatureValue::Missing(MissingReason::ZeroVariance),
    );
    let results = [
        explained(&cov_x),
        correlation(&cov_x).map_or(miss, |c| explained(&c)),
        explained(&cov_init),
        correlation(&cov_init).map_or(miss, |c| explained(&c)),
    ];
    let mut fv = FeatureVector::new();
    for (name, r) in names[..4].iter().zip(&results) {
        fv.push(name, r.0);
    }
    for (name, r) in names[4..].iter().zip(&results) {
        fv.push(name, r.1);
    }
    fv
}
