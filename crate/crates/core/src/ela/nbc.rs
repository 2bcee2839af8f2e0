use super::{dist, mean, nbc_names, pearson, sd, FeatureValue, FeatureVector, MissingReason};
use crate::doe::Doe;
use crate::stats::midranks;

/// Nearest-neighbour and nearest-better distances. Distance ties resolve to
/// the lowest index. `None` when no point has a strictly better neighbour.
pub(crate) fn nn_nb_distances(x: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let mut nn = vec![f64::INFINITY; n];
    let mut nb: Vec<Option<f64>> = vec![None; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = dist(&x[i], &x[j]);
            if dij < nn[i] {
                nn[i] = dij;
            }
            if y[j] < y[i] && nb[i].is_none_or(|b| dij < b) {
                nb[i] = Some(dij);
            }
        }
    }
    let fallback = nb.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if fallback == f64::NEG_INFINITY {
        return None;
    }
    Some((nn, nb.into_iter().map(|b| b.unwrap_or(fallback)).collect()))
}

/// Nearest-better clustering features.
pub fn nbc_features(doe: &Doe) -> FeatureVector {
    let names = nbc_names();
    if doe.n() < 10 {
        return FeatureVector::all_missing(&names, MissingReason::InsufficientSamples);
    }
    let Some((nn, nb)) = nn_nb_distances(&doe.x, &doe.y) else {
        return FeatureVector::all_missing(&names, MissingReason::NoBetterNeighbor);
    };
    let mut fv = FeatureVector::new();
    fv.push(&names[0], FeatureValue::ratio(sd(&nn), sd(&nb)));
    fv.push(&names[1], FeatureValue::ratio(mean(&nn), mean(&nb)));
    fv.push(&names[2], pearson(&nn, &nb));
    if nn.contains(&0.0) {
        fv.push_missing(&names[3], MissingReason::DivisionByZero);
    } else {
        let ratio: Vec<f64> = nb.iter().zip(&nn).map(|(b, a)| b / a).collect();
        fv.push(&names[3], FeatureValue::ratio(sd(&ratio), mean(&ratio)));
    }
    fv.push(&names[4], pearson(&nb, &midranks(&doe.y)));
    fv
}
