use super::{dist, disp_names, mean, median, FeatureValue, FeatureVector, MissingReason};
use crate::doe::Doe;

pub const DEFAULT_DISP_QUANTILES: [f64; 4] = [0.02, 0.05, 0.1, 0.25];

/// Pairwise distances among `idx`, visited in ascending index order.
fn pair_distances(x: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(idx.len() * idx.len().saturating_sub(1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            out.push(dist(&x[i], &x[j]));
        }
    }
    out
}

/// Number of best points taken for quantile `q`.
pub(crate) fn best_count(q: f64, n: usize) -> usize {
    ((q * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Dispersion of the best points relative to the whole design.
pub fn disp_features(doe: &Doe, quantiles: &[f64]) -> FeatureVector {
    let names = disp_names(quantiles);
    let n = doe.n();
    let nq = quantiles.len();
    if n < 2 {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let all: Vec<usize> = (0..n).collect();
    let mut full = pair_distances(&doe.x, &all);
    let full_mean = mean(&full);
    let full_median = median(&mut full);

    let mut order = all;
    order.sort_by(|&a, &b| doe.y[a].total_cmp(&doe.y[b]).then(a.cmp(&b)));

    let mut values = vec![FeatureValue::Missing(MissingReason::InsufficientSamples); 4 * nq];
    for (k, &q) in quantiles.iter().enumerate() {
        let m = best_count(q, n);
        if m < 2 {
            continue;
        }
        let mut best = order[..m].to_vec();
        best.sort_unstable();
        let mut d = pair_distances(&doe.x, &best);
        let bm = mean(&d);
        let bmed = median(&mut d);
        values[k] = FeatureValue::ratio(bm, full_mean);
        values[nq + k] = FeatureValue::ratio(bmed, full_median);
        values[2 * nq + k] = FeatureValue::from_f64(bm - full_mean);
        values[3 * nq + k] = FeatureValue::from_f64(bmed - full_median);
    }
    let mut fv = FeatureVector::new();
    for (name, v) in names.into_iter().zip(values) {
        fv.push(name, v);
    }
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doe::{build_doe, lhs_sample};
    use crate::rng::stream_rng;
    use crate::suite::ProblemInstance;
    use rand::Rng;

    #[test]
    fn counts() {
        assert_eq!(best_count(0.02, 250), 5);
        assert_eq!(best_count(0.05, 250), 13);
        assert_eq!(best_count(0.1, 1000), 100);
        assert_eq!(best_count(1.0, 7), 7);
    }

    #[test]
    fn whole_design_is_neutral() {
        let x = lhs_sample(40, 3, 5, -5.0, 5.0).unwrap();
        let y: Vec<f64> = x.iter().map(|r| r[1]).collect();
        let fv = disp_features(&Doe::from_parts(x, y, 5).unwrap(), &[1.0]);
        assert_eq!(fv.value("disp.ratio_mean_1"), Some(1.0));
        assert_eq!(fv.value("disp.ratio_median_1"), Some(1.0));
        assert_eq!(fv.value("disp.diff_mean_1"), Some(0.0));
        assert_eq!(fv.value("disp.diff_median_1"), Some(0.0));
    }

    #[test]
    fn tiny_quantile_missing() {
        let x = lhs_sample(40, 2, 5, -5.0, 5.0).unwrap();
        let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
        let fv = disp_features(&Doe::from_parts(x, y, 5).unwrap(), &[0.02, 0.25]);
        assert_eq!(
            fv.get("disp.ratio_mean_0.02"),
            Some(FeatureValue::Missing(MissingReason::InsufficientSamples))
        );
        assert!(fv.value("disp.ratio_mean_0.25").is_some());
    }

    #[test]
    fn noise_is_neutral_on_average() {
        let trials = 100;
        let mut total = 0.0;
        for t in 0..trials {
            let x = lhs_sample(200, 2, t, -5.0, 5.0).unwrap();
            let mut rng = stream_rng(t, 17);
            let y: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
            let fv = disp_features(&Doe::from_parts(x, y, t).unwrap(), &[0.1]);
            total += fv.value("disp.ratio_mean_0.1").unwrap();
        }
        let mean = total / trials as f64;
        assert!((mean - 1.0).abs() < 0.1, "mean ratio {mean}");
    }

    #[test]
    fn sphere_best_points_cluster() {
        let inst = ProblemInstance::new(1, 3, 2).unwrap();
        for s in 0..30 {
            let fv = disp_features(&build_doe(&inst, 250, s).unwrap(), &DEFAULT_DISP_QUANTILES);
            assert!(fv.value("disp.ratio_mean_0.05").unwrap() < 1.0);
        }
    }
}
