//! Seeded Latin Hypercube designs and 2d evaluation grids.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{invalid, Result};
use crate::rng::stream_rng;
use crate::suite::{ProblemId, ProblemInstance, LOWER_BOUND, UPPER_BOUND};

const LHS_STREAM: u64 = 0x1a5;

/// Jittered Latin Hypercube sample, `n` rows by `dim` columns.
///
/// Each column is an independent random permutation of the `n` strata with a
/// uniform offset inside each stratum. The design depends only on
/// `(n, dim, seed, lower, upper)`.
pub fn lhs_sample(n: usize, dim: usize, seed: u64, lower: f64, upper: f64) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return invalid("LHS needs at least 2 points");
    }
    if dim < 1 {
        return invalid("LHS needs at least one dimension");
    }
    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
        return invalid(format!("invalid bounds [{lower}, {upper}]"));
    }
    let mut rng = stream_rng(seed, LHS_STREAM);
    let width = upper - lower;
    let mut rows = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        strata.shuffle(&mut rng);
        for (row, &k) in rows.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            let v = lower + width * (k as f64 + u) / n as f64;
            // guard against the upper edge after rounding
            row[j] = if v >= upper { upper - width * f64::EPSILON } else { v };
        }
    }
    Ok(rows)
}

/// A design of experiments evaluated on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Doe {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub seed: u64,
    pub instance: Option<ProblemId>,
}

impl Doe {
    /// Wraps precomputed samples. Used for synthetic designs in tests and tools.
    pub fn from_parts(x: Vec<Vec<f64>>, y: Vec<f64>, seed: u64) -> Result<Self> {
        if x.len() != y.len() {
            return invalid(format!("{} rows but {} objective values", x.len(), y.len()));
        }
        let d = x.first().map(|r| r.len()).unwrap_or(0);
        if x.iter().any(|r| r.len() != d) {
            return invalid("ragged design matrix");
        }
        Ok(Self {
            x,
            y,
            seed,
            instance: None,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn with_y(&self, y: Vec<f64>) -> Self {
        Self {
            x: self.x.clone(),
            y,
            seed: self.seed,
            instance: self.instance,
        }
    }

    /// CSV with header `x1..xd,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for (row, y) in self.x.iter().zip(&self.y) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(y.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// LHS design over the suite's domain, evaluated on `inst`.
pub fn build_doe(inst: &ProblemInstance, n: usize, seed: u64) -> Result<Doe> {
    let x = lhs_sample(n, inst.dim(), seed, LOWER_BOUND, UPPER_BOUND)?;
    let y = x.iter().map(|row| inst.evaluate(row)).collect::<Result<Vec<_>>>()?;
    Ok(Doe {
        x,
        y,
        seed,
        instance: Some(inst.id()),
    })
}

/// Equally spaced `resolution × resolution` lattice over `[lower, upper]²`,
/// first coordinate varying fastest.
pub fn grid2d(resolution: usize, lower: f64, upper: f64) -> Result<Vec<[f64; 2]>> {
    if resolution < 2 {
        return invalid("grid resolution must be >= 2");
    }
    let step = |k: usize| lower + (upper - lower) * k as f64 / (resolution - 1) as f64;
    Ok((0..resolution)
        .flat_map(|j| (0..resolution).map(move |i| [step(i), step(j)]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strata_counts(col: &[f64], lower: f64, upper: f64) -> Vec<usize> {
        let n = col.len();
        let mut counts = vec![0; n];
        for v in col {
            let k = (((v - lower) / (upper - lower)) * n as f64).floor() as usize;
            counts[k.min(n - 1)] += 1;
        }
        counts
    }

    #[test]
    fn one_point_per_stratum() {
        let x = lhs_sample(4, 1, 11, 0.0, 1.0).unwrap();
        let col: Vec<f64> = x.iter().map(|r| r[0]).collect();
        assert_eq!(strata_counts(&col, 0.0, 1.0), vec![1, 1, 1, 1]);
    }

    #[test]
    fn bounds_and_determinism() {
        let a = lhs_sample(1000, 5, 3, -5.0, 5.0).unwrap();
        assert!(a.iter().flatten().all(|v| (-5.0..=5.0).contains(v)));
        let b = lhs_sample(1000, 5, 3, -5.0, 5.0).unwrap();
        assert_eq!(a, b);
        let c = lhs_sample(1000, 5, 4, -5.0, 5.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_arguments() {
        assert!(lhs_sample(1, 2, 0, 0.0, 1.0).is_err());
        assert!(lhs_sample(5, 2, 0, 1.0, 1.0).is_err());
        assert!(lhs_sample(5, 2, 0, 2.0, 1.0).is_err());
    }

    #[test]
    fn shared_design_across_instances() {
        let a = ProblemInstance::new(1, 1, 3).unwrap();
        let b = ProblemInstance::new(1, 2, 3).unwrap();
        let da = build_doe(&a, 50, 9).unwrap();
        let db = build_doe(&b, 50, 9).unwrap();
        assert_eq!(da.x, db.x);
        assert_ne!(da.y, db.y);
    }

    #[test]
    fn sphere_doe_closed_form() {
        let inst = ProblemInstance::new(1, 4, 3).unwrap();
        let doe = build_doe(&inst, 3, 1).unwrap();
        for (row, y) in doe.x.iter().zip(&doe.y) {
            let expected: f64 = row
                .iter()
                .zip(inst.xopt())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                + inst.fopt();
            assert!((expected - y).abs() < 1e-9);
        }
    }

    #[test]
    fn doe_shape() {
        let inst = ProblemInstance::new(2, 1, 5).unwrap();
        let doe = build_doe(&inst, 1000, 1).unwrap();
        assert_eq!(doe.n(), 1000);
        assert_eq!(doe.dim(), 5);
    }

    #[test]
    fn grids() {
        assert_eq!(
            grid2d(2, -5.0, 5.0).unwrap(),
            vec![[-5.0, -5.0], [5.0, -5.0], [-5.0, 5.0], [5.0, 5.0]]
        );
        let g = grid2d(3, 0.0, 1.0).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[4], [0.5, 0.5]);
        let g = grid2d(101, -5.0, 5.0).unwrap();
        assert_eq!(g.len(), 10201);
        assert!((g[1][0] - g[0][0] - 0.1).abs() < 1e-12);
        assert!(grid2d(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn csv_header() {
        let doe = Doe::from_parts(vec![vec![1.0, 2.0]], vec![3.0], 0).unwrap();
        let mut buf = Vec::new();
        doe.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,x2,y\n1,2,3\n");
    }
}
