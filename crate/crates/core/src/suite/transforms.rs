//! Coordinate warps, conditioning, rotations and the boundary penalty used to
//! build BBOB instances.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{stream_rng, StreamRng};

/// Highest valid function id.
pub const MAX_FID: u32 = 24;

/// Instance seed: `fid + 10000 * iid`.
pub fn derive_seed(fid: u32, iid: u32) -> Result<u64> {
    if !(1..=MAX_FID).contains(&fid) {
        return invalid(format!("fid {fid} outside [1, {MAX_FID}]"));
    }
    if iid < 1 {
        return invalid("iid must be >= 1");
    }
    Ok(fid as u64 + 10_000 * iid as u64)
}

/// `(i - 1) / (d - 1)` for a 1-based index, with the d = 1 case defined as 0.
#[inline]
pub(crate) fn ramp(i: usize, d: usize) -> f64 {
    if d <= 1 {
        0.0
    } else {
        i as f64 / (d - 1) as f64
    }
}

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return invalid("matrix rows must all have length equal to the row count");
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Mᵀ x`.
    pub fn apply_transposed(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, xi) in x.iter().enumerate() {
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += m * xi;
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// `max |(M Mᵀ - I)_ij|`.
    pub fn orthogonality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let dot: f64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Draws a d×d standard-normal matrix and orthonormalizes its rows.
/// Returns `None` when the draw is numerically rank deficient.
pub(crate) fn rotation_from_rng(dim: usize, rng: &mut StreamRng) -> Option<SquareMatrix> {
    let mut rows: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for i in 0..dim {
        let original: f64 = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        // modified Gram-Schmidt: subtract projections one basis vector at a time
        for j in 0..i {
            let (done, rest) = rows.split_at_mut(i);
            let basis = &done[j];
            let proj: f64 = rest[0].iter().zip(basis).map(|(a, b)| a * b).sum();
            for (v, b) in rest[0].iter_mut().zip(basis) {
                *v -= proj * b;
            }
        }
        let norm: f64 = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-10 * original.max(f64::MIN_POSITIVE)) {
            return None;
        }
        rows[i].iter_mut().for_each(|v| *v /= norm);
    }
    Some(SquareMatrix {
        dim,
        data: rows.into_iter().flatten().collect(),
    })
}

/// Random orthogonal matrix determined by `seed`. A degenerate draw is retried
/// with `seed + 1`.
pub fn rotation_from_seed(dim: usize, seed: u64) -> Result<SquareMatrix> {
    if dim < 1 {
        return invalid("rotation dimension must be >= 1");
    }
    let mut s = seed;
    loop {
        if let Some(m) = rotation_from_rng(dim, &mut stream_rng(s, 0)) {
            return Ok(m);
        }
        log::warn!("rank-deficient rotation draw for seed {s}, retrying with {}", s + 1);
        s = s.wrapping_add(1);
    }
}

/// Scalar oscillation warp.
#[inline]
pub fn t_osz_scalar(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xhat = x.abs().ln();
    let (c1, c2) = if x > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    x.signum() * (xhat + 0.049 * ((c1 * xhat).sin() + (c2 * xhat).sin())).exp()
}

pub fn t_osz(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| t_osz_scalar(x)).collect()
}

/// Asymmetry warp: positive coordinates are raised to `1 + beta * ramp(i) * sqrt(x_i)`.
pub fn t_asy(v: &[f64], beta: f64) -> Vec<f64> {
    let d = v.len();
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x > 0.0 {
                x.powf(1.0 + beta * ramp(i, d) * x.sqrt())
            } else {
                x
            }
        })
        .collect()
}

/// Diagonal of the conditioning matrix Λ^α: `alpha^(0.5 * ramp(i))`.
pub fn lambda_alpha(dim: usize, alpha: f64) -> Vec<f64> {
    (0..dim).map(|i| alpha.powf(0.5 * ramp(i, dim))).collect()
}

/// Boundary penalty `Σ max(0, |x_i| - 5)²`.
pub fn f_pen(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| {
            let over = v.abs() - 5.0;
            if over > 0.0 {
                over * over
            } else {
                0.0
            }
        })
        .sum()
}
