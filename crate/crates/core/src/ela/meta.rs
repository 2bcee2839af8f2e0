use nalgebra::{DMatrix, DVector};

use super::{meta_names, FeatureValue, FeatureVector, MissingReason};
use crate::doe::Doe;

struct Fit {
    coef: Vec<f64>,
    adj_r2: FeatureValue,
    rank: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Model {
    Linear,
    LinearInteract,
    Quadratic,
    QuadraticInteract,
}

/// Column layout: intercept, x_i, then squares and/or pairwise products.
fn design(x: &[Vec<f64>], model: Model) -> DMatrix<f64> {
    let d = x[0].len();
    let squares = matches!(model, Model::Quadratic | Model::QuadraticInteract);
    let interactions = matches!(model, Model::LinearInteract | Model::QuadraticInteract);
    let mut cols = 1 + d;
    if squares {
        cols += d;
    }
    if interactions {
        cols += d * (d - 1) / 2;
    }
    DMatrix::from_fn(x.len(), cols, |r, c| {
        let row = &x[r];
        if c == 0 {
            return 1.0;
        }
        let mut c = c - 1;
        if c < d {
            return row[c];
        }
        c -= d;
        if squares {
            if c < d {
                return row[c] * row[c];
            }
            c -= d;
        }
        let mut k = 0;
        for i in 0..d {
            for j in i + 1..d {
                if k == c {
                    return row[i] * row[j];
                }
                k += 1;
            }
        }
        unreachable!("column index within layout")
    })
}

/// Least squares on centred y via SVD (minimum-norm when rank deficient).
fn fit(x: &[Vec<f64>], y: &[f64], model: Model) -> Fit {
    let n = y.len();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
    let a = design(x, model);
    let p = a.ncols() - 1;
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * f64::EPSILON * n.max(p + 1) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let beta = svd
        .solve(&yc, tol)
        .unwrap_or_else(|_| DVector::zeros(p + 1));
    let resid = &yc - &a * &beta;
    let sse = resid.norm_squared();
    let sst = yc.norm_squared();
    let dof = n as f64 - p as f64 - 1.0;
    let adj_r2 = if sst == 0.0 {
        FeatureValue::Missing(MissingReason::ZeroVariance)
    } else if dof <= 0.0 {
        FeatureValue::Missing(MissingReason::InsufficientSamples)
    } else {
        FeatureValue::from_f64(1.0 - (sse / sst) * (n as f64 - 1.0) / dof)
    };
    let mut coef: Vec<f64> = beta.iter().copied().collect();
    coef[0] += ybar;
    Fit { coef, adj_r2, rank }
}

fn abs_extremes(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, 0.0), |(lo, hi), c| (lo.min(c.abs()), hi.max(c.abs())))
}

/// Linear and quadratic regression-model features.
pub fn ela_meta(doe: &Doe) -> FeatureVector {
    let names = meta_names();
    let d = doe.dim();
    let n = doe.n();
    if d == 0 || n <= 2 * d + 2 {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let mut fv = FeatureVector::new();
    let mut fits = Vec::with_capacity(4);
    for (model, label) in [
        (Model::Linear, "lin_simple"),
        (Model::LinearInteract, "lin_w_interact"),
        (Model::Quadratic, "quad_simple"),
        (Model::QuadraticInteract, "quad_w_interact"),
    ] {
        let f = fit(&doe.x, &doe.y, model);
        let cols = f.coef.len();
        if f.rank < cols {
            fv.notes.push(format!(
                "ela_meta.{label}: rank-deficient design (rank {} of {cols})",
                f.rank
            ));
        }
        fits.push(f);
    }
    let lin = &fits[0];
    let (lo, hi) = abs_extremes(&lin.coef[1..]);
    fv.push(&names[0], lin.adj_r2);
    fv.push_value(&names[1], lin.coef[0]);
    fv.push_value(&names[2], lo);
    fv.push_value(&names[3], hi);
    fv.push(&names[4], FeatureValue::ratio(hi, lo));
    fv.push(&names[5], fits[1].adj_r2);
    let quad = &fits[2];
    let (qlo, qhi) = abs_extremes(&quad.coef[1 + d..1 + 2 * d]);
    fv.push(&names[6], quad.adj_r2);
    fv.push(&names[7], FeatureValue::ratio(qhi, qlo));
    fv.push(&names[8], fits[3].adj_r2);
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doe::{build_doe, lhs_sample};
    use crate::suite::ProblemInstance;

    #[test]
    fn exact_linear() {
        let x = lhs_sample(50, 1, 3, -5.0, 5.0).unwrap();
        let y: Vec<f64> = x.iter().map(|r| 2.0 + 3.0 * r[0]).collect();
        let fv = ela_meta(&Doe::from_parts(x, y, 3).unwrap());
        assert!((fv.value("ela_meta.lin_simple.intercept").unwrap() - 2.0).abs() < 1e-10);
        assert!((fv.value("ela_meta.lin_simple.adj_r2").unwrap() - 1.0).abs() < 1e-12);
        assert!((fv.value("ela_meta.lin_simple.coef.max").unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_is_isotropic_quadratic() {
        let inst = ProblemInstance::new(1, 2, 4).unwrap();
        let fv = ela_meta(&build_doe(&inst, 300, 2).unwrap());
        assert!((fv.value("ela_meta.quad_simple.adj_r2").unwrap() - 1.0).abs() < 1e-6);
        assert!((fv.value("ela_meta.quad_simple.cond").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_y() {
        let x = lhs_sample(40, 2, 3, -5.0, 5.0).unwrap();
        let fv = ela_meta(&Doe::from_parts(x, vec![1.5; 40], 3).unwrap());
        assert_eq!(
            fv.get("ela_meta.lin_simple.adj_r2"),
            Some(FeatureValue::Missing(MissingReason::ZeroVariance))
        );
        assert_eq!(fv.len(), 9);
    }

    #[test]
    fn design_layout() {
        let a = design(&[vec![2.0, 3.0, 5.0]], Model::QuadraticInteract);
        let row: Vec<f64> = a.row(0).iter().copied().collect();
        assert_eq!(row, vec![1.0, 2.0, 3.0, 5.0, 4.0, 9.0, 25.0, 6.0, 10.0, 15.0]);
    }
}
