//! Serializable transformation chains.
//!
//! A chain is a list of search-space steps applied in order to the input
//! point, followed by a raw objective formula, an optional boundary penalty on
//! the untransformed input, and the objective shift `fopt`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::transforms::{f_pen, ramp, t_asy, t_osz, t_osz_scalar, SquareMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Step {
    /// `x - v`
    Subtract(Vec<f64>),
    /// `x + v`
    Add(Vec<f64>),
    /// `x + c` on every coordinate
    AddScalar(f64),
    Scale(f64),
    /// Elementwise product with a fixed vector (diagonal matrices).
    ScaleEach(Vec<f64>),
    Rotate(SquareMatrix),
    Oscillate,
    Asymmetric(f64),
    /// Büche-Rastrigin scaling: `√10^ramp(i)`, times 10 on positive
    /// coordinates with even 0-based index.
    BucheRastrigin,
    /// Schwefel coupling `ẑ_{i+1} = x̂_{i+1} + 0.25 (x̂_i - v_i)`.
    SchwefelCouple(Vec<f64>),
}

impl Step {
    fn apply(&self, x: Vec<f64>) -> Vec<f64> {
        match self {
            Step::Subtract(v) => x.iter().zip(v).map(|(a, b)| a - b).collect(),
            Step::Add(v) => x.iter().zip(v).map(|(a, b)| a + b).collect(),
            Step::AddScalar(c) => x.into_iter().map(|a| a + c).collect(),
            Step::Scale(c) => x.into_iter().map(|a| a * c).collect(),
            Step::ScaleEach(v) => x.iter().zip(v).map(|(a, b)| a * b).collect(),
            Step::Rotate(m) => m.apply(&x),
            Step::Oscillate => t_osz(&x),
            Step::Asymmetric(beta) => t_asy(&x, *beta),
            Step::BucheRastrigin => {
                let d = x.len();
                x.iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let mut factor = 10f64.sqrt().powf(ramp(i, d));
                        if v > 0.0 && i % 2 == 0 {
                            factor *= 10.0;
                        }
                        factor * v
                    })
                    .collect()
            }
            Step::SchwefelCouple(v) => {
                let mut out = x.clone();
                for i in 1..x.len() {
                    out[i] = x[i] + 0.25 * (x[i - 1] - v[i - 1]);
                }
                out
            }
        }
    }
}

/// Peak table of the Gallagher functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakTable {
    pub rotation: SquareMatrix,
    /// Peak locations; index 0 is the global optimum.
    pub locations: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Diagonal of `C_i` per peak (already divided by `α_i^(1/4)`).
    pub scales: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RawFunction {
    Sphere,
    /// `Σ cond^ramp(i) z_i²`
    Ellipsoid { condition: f64 },
    Rastrigin,
    LinearSlope { xopt: Vec<f64> },
    AttractiveSector { xopt: Vec<f64> },
    StepEllipsoid { q: SquareMatrix },
    Rosenbrock,
    Discus,
    BentCigar,
    SharpRidge,
    DifferentPowers,
    Weierstrass,
    Schaffers,
    GriewankRosenbrock,
    Schwefel,
    Gallagher(PeakTable),
    Katsuura,
    Lunacek {
        mu0: f64,
        mu1: f64,
        s: f64,
        r: SquareMatrix,
        q: SquareMatrix,
        conditioning: Vec<f64>,
    },
}

const SCHWEFEL_OFFSET: f64 = 4.189828872724339;

fn weierstrass_term(z: f64) -> f64 {
    (0..12)
        .map(|k| 0.5f64.powi(k) * (2.0 * PI * 3f64.powi(k) * (z + 0.5)).cos())
        .sum()
}

fn rastrigin(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    10.0 * (d - z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>())
        + z.iter().map(|v| v * v).sum::<f64>()
}

impl RawFunction {
    fn eval(&self, z: &[f64]) -> f64 {
        let d = z.len();
        let df = d as f64;
        match self {
            RawFunction::Sphere => z.iter().map(|v| v * v).sum(),
            RawFunction::Ellipsoid { condition } => z
                .iter()
                .enumerate()
                .map(|(i, v)| condition.powf(ramp(i, d)) * v * v)
                .sum(),
            RawFunction::Rastrigin => rastrigin(z),
            RawFunction::LinearSlope { xopt } => z
                .iter()
                .zip(xopt)
                .enumerate()
                .map(|(i, (&x, &o))| {
                    let s = o.signum() * 10f64.powf(ramp(i, d));
                    let zi = if x * o < 25.0 { x } else { o };
                    5.0 * s.abs() - s * zi
                })
                .sum(),
            RawFunction::AttractiveSector { xopt } => {
                let sum: f64 = z
                    .iter()
                    .zip(xopt)
                    .map(|(&v, &o)| {
                        let s = if v * o > 0.0 { 100.0 } else { 1.0 };
                        (s * v) * (s * v)
                    })
                    .sum();
                t_osz_scalar(sum).powf(0.9)
            }
            RawFunction::StepEllipsoid { q } => {
                let rounded: Vec<f64> = z
                    .iter()
                    .map(|&v| {
                        if v.abs() > 0.5 {
                            (0.5 + v).floor()
                        } else {
                            (0.5 + 10.0 * v).floor() / 10.0
                        }
                    })
                    .collect();
                let zz = q.apply(&rounded);
                let sum: f64 = zz
                    .iter()
                    .enumerate()
                    .map(|(i, v)| 100f64.powf(ramp(i, d)) * v * v)
                    .sum();
                0.1 * (z[0].abs() / 1e4).max(sum)
            }
            RawFunction::Rosenbrock => z
                .windows(2)
                .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
                .sum(),
            RawFunction::Discus => 1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>(),
            RawFunction::BentCigar => z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>(),
            RawFunction::SharpRidge => {
                z[0] * z[0] + 100.0 * z[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            RawFunction::DifferentPowers => z
                .iter()
                .enumerate()
                .map(|(i, v)| v.abs().powf(2.0 + 4.0 * ramp(i, d)))
                .sum::<f64>()
                .sqrt(),
            RawFunction::Weierstrass => {
                let f0 = weierstrass_term(0.0);
                let mean = z.iter().map(|&v| weierstrass_term(v)).sum::<f64>() / df;
                10.0 * (mean - f0).powi(3)
            }
            RawFunction::Schaffers => {
                let sum: f64 = z
                    .windows(2)
                    .map(|w| {
                        let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
                        let r = s.sqrt();
                        r + r * (50.0 * s.powf(0.2)).sin().powi(2)
                    })
                    .sum();
                (sum / (df - 1.0)).powi(2)
            }
            RawFunction::GriewankRosenbrock => {
                let sum: f64 = z
                    .windows(2)
                    .map(|w| {
                        let s = 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2);
                        s / 4000.0 - s.cos()
                    })
                    .sum();
                10.0 * sum / (df - 1.0) + 10.0
            }
            RawFunction::Schwefel => {
                let sum: f64 = z.iter().map(|v| v * v.abs().sqrt().sin()).sum();
                let scaled: Vec<f64> = z.iter().map(|v| v / 100.0).collect();
                -sum / (100.0 * df) + SCHWEFEL_OFFSET + 100.0 * f_pen(&scaled)
            }
            RawFunction::Gallagher(table) => {
                let best = table
                    .locations
                    .iter()
                    .zip(&table.weights)
                    .zip(&table.scales)
                    .map(|((y, w), c)| {
                        let diff: Vec<f64> = z.iter().zip(y).map(|(a, b)| a - b).collect();
                        let u = table.rotation.apply(&diff);
                        let quad: f64 = u.iter().zip(c).map(|(ui, ci)| ci * ui * ui).sum();
                        w * (-quad / (2.0 * df)).exp()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                t_osz_scalar(10.0 - best).powi(2)
            }
            RawFunction::Katsuura => {
                let exponent = 10.0 / df.powf(1.2);
                let prod: f64 = z
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let inner: f64 = (1..=32)
                            .map(|j| {
                                let p = 2f64.powi(j);
                                (p * v - (p * v).round()).abs() / p
                            })
                            .sum();
                        (1.0 + (i + 1) as f64 * inner).powf(exponent)
                    })
                    .product();
                10.0 / (df * df) * prod - 10.0 / (df * df)
            }
            RawFunction::Lunacek {
                mu0,
                mu1,
                s,
                r,
                q,
                conditioning,
            } => {
                let centered: Vec<f64> = z.iter().map(|v| v - mu0).collect();
                let inner = r.apply(&centered);
                let inner: Vec<f64> = inner.iter().zip(conditioning).map(|(a, b)| a * b).collect();
                let zz = q.apply(&inner);
                let first: f64 = centered.iter().map(|v| v * v).sum();
                let second: f64 = df + s * z.iter().map(|v| (v - mu1).powi(2)).sum::<f64>();
                first.min(second)
                    + 10.0 * (df - zz.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>())
            }
        }
    }
}

/// Ordered transformation chain of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformChain {
    pub steps: Vec<Step>,
    pub raw: RawFunction,
    /// Weight of `f_pen` on the untransformed input; 0 when unused.
    pub penalty: f64,
    pub fopt: f64,
}

impl TransformChain {
    /// Raw objective value including `fopt`. Callers check dimensions.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_unshifted(x) + self.fopt
    }

    /// Same evaluation with `fopt` left out, which avoids cancellation when
    /// computing precision.
    pub fn eval_unshifted(&self, x: &[f64]) -> f64 {
        let z = self
            .steps
            .iter()
            .fold(x.to_vec(), |acc, step| step.apply(acc));
        let pen = if self.penalty != 0.0 {
            self.penalty * f_pen(x)
        } else {
            0.0
        };
        self.raw.eval(&z) + pen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weierstrass_zero_at_origin() {
        assert_eq!(RawFunction::Weierstrass.eval(&[0.0; 5]).abs() < 1e-30, true);
    }

    #[test]
    fn katsuura_zero_at_origin() {
        assert_eq!(RawFunction::Katsuura.eval(&[0.0; 3]), 0.0);
    }

    #[test]
    fn schwefel_offset_matches_minimum() {
        let z = vec![420.968746359982; 4];
        let v = RawFunction::Schwefel.eval(&z);
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn buche_rastrigin_scaling() {
        let out = Step::BucheRastrigin.apply(vec![1.0, 1.0, -1.0]);
        assert_eq!(out[0], 10.0);
        assert!((out[1] - 10f64.sqrt().powf(0.5)).abs() < 1e-12);
        assert!((out[2] + 10f64.sqrt()).abs() < 1e-12);
    }
}
