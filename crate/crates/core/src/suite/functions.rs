//! Per-function chain construction for the 24 noiseless BBOB functions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Cauchy, Distribution};

use super::chain::{PeakTable, RawFunction, Step, TransformChain};
use super::transforms::{lambda_alpha, rotation_from_rng, SquareMatrix};
use crate::rng::{stream_rng, StreamRng};

const STREAM_XOPT: u64 = 0;
const STREAM_FOPT: u64 = 1;
const STREAM_ROT_R: u64 = 2;
const STREAM_ROT_Q: u64 = 3;
const STREAM_PARAMS: u64 = 4;

const SCHWEFEL_XOPT: f64 = 4.2096874637;
const LUNACEK_MU0: f64 = 2.5;

pub(crate) fn function_name(fid: u32) -> &'static str {
    match fid {
        1 => "sphere",
        2 => "ellipsoid",
        3 => "rastrigin",
        4 => "buche_rastrigin",
        5 => "linear_slope",
        6 => "attractive_sector",
        7 => "step_ellipsoid",
        8 => "rosenbrock",
        9 => "rosenbrock_rotated",
        10 => "ellipsoid_rotated",
        11 => "discus",
        12 => "bent_cigar",
        13 => "sharp_ridge",
        14 => "different_powers",
        15 => "rastrigin_rotated",
        16 => "weierstrass",
        17 => "schaffers10",
        18 => "schaffers1000",
        19 => "griewank_rosenbrock",
        20 => "schwefel",
        21 => "gallagher101",
        22 => "gallagher21",
        23 => "katsuura",
        24 => "lunacek",
        _ => "unknown",
    }
}

/// Uniform draw in `[-4, 4]^d`, truncated to 4 decimals, zeros moved to -1e-5.
fn draw_xopt(dim: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let u: f64 = rng.random();
            let v = 8.0 * (1e4 * u).floor() / 1e4 - 4.0;
            if v == 0.0 {
                -1e-5
            } else {
                v
            }
        })
        .collect()
}

/// Cauchy(0, 100) rounded to 2 decimals and clipped to [-1000, 1000].
fn draw_fopt(rng: &mut StreamRng) -> f64 {
    let c: f64 = Cauchy::new(0.0, 100.0).expect("valid scale").sample(rng);
    ((c * 100.0).round() / 100.0).clamp(-1000.0, 1000.0)
}

fn draw_rotation(dim: usize, rng: &mut StreamRng) -> SquareMatrix {
    loop {
        if let Some(m) = rotation_from_rng(dim, rng) {
            return m;
        }
        log::warn!("rank-deficient rotation draw, drawing again");
    }
}

fn random_signs(dim: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..dim)
        .map(|_| if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 })
        .collect()
}

pub(crate) struct Materialized {
    pub xopt: Vec<f64>,
    pub rot_r: SquareMatrix,
    pub rot_q: SquareMatrix,
    pub chain: TransformChain,
}

fn gallagher(
    dim: usize,
    peaks: usize,
    global_condition: f64,
    half_width: f64,
    global_shrink: f64,
    rot: &SquareMatrix,
    rng: &mut StreamRng,
) -> (Vec<f64>, PeakTable) {
    let locals = peaks - 1;
    let mut conditions: Vec<f64> = (0..locals)
        .map(|j| 1000f64.powf(2.0 * j as f64 / (locals - 1) as f64))
        .collect();
    conditions.shuffle(rng);
    conditions.insert(0, global_condition);

    let weights: Vec<f64> = (0..peaks)
        .map(|i| {
            if i == 0 {
                10.0
            } else {
                1.1 + 8.0 * (i - 1) as f64 / (locals - 1) as f64
            }
        })
        .collect();

    let locations: Vec<Vec<f64>> = (0..peaks)
        .map(|i| {
            let width = if i == 0 {
                half_width * global_shrink
            } else {
                half_width
            };
            (0..dim)
                .map(|_| width * (2.0 * rng.random::<f64>() - 1.0))
                .collect()
        })
        .collect();

    let scales: Vec<Vec<f64>> = conditions
        .iter()
        .map(|&alpha| {
            let mut diag = lambda_alpha(dim, alpha);
            diag.shuffle(rng);
            let norm = alpha.powf(0.25);
            diag.into_iter().map(|v| v / norm).collect()
        })
        .collect();

    let xopt = locations[0].clone();
    (
        xopt,
        PeakTable {
            rotation: rot.clone(),
            locations,
            weights,
            scales,
        },
    )
}

pub(crate) fn materialize(fid: u32, dim: usize, rseed: u64) -> Materialized {
    let mut xopt = draw_xopt(dim, &mut stream_rng(rseed, STREAM_XOPT));
    let fopt = draw_fopt(&mut stream_rng(rseed, STREAM_FOPT));
    let r = draw_rotation(dim, &mut stream_rng(rseed, STREAM_ROT_R));
    let q = draw_rotation(dim, &mut stream_rng(rseed, STREAM_ROT_Q));
    let mut params = stream_rng(rseed, STREAM_PARAMS);
    let d = dim as f64;
    let rosen_factor = 1f64.max(d.sqrt() / 8.0);
    let cond = |alpha: f64| Step::ScaleEach(lambda_alpha(dim, alpha));

    let (steps, raw, penalty, uses_r, uses_q) = match fid {
        1 => (vec![Step::Subtract(xopt.clone())], RawFunction::Sphere, 0.0, false, false),
        2 => (
            vec![Step::Subtract(xopt.clone()), Step::Oscillate],
            RawFunction::Ellipsoid { condition: 1e6 },
            0.0,
            false,
            false,
        ),
        3 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Oscillate,
                Step::Asymmetric(0.2),
                cond(10.0),
            ],
            RawFunction::Rastrigin,
            0.0,
            false,
            false,
        ),
        4 => {
            for v in xopt.iter_mut().step_by(2) {
                *v = v.abs();
            }
            (
                vec![Step::Subtract(xopt.clone()), Step::Oscillate, Step::BucheRastrigin],
                RawFunction::Rastrigin,
                100.0,
                false,
                false,
            )
        }
        5 => {
            for v in xopt.iter_mut() {
                *v = if *v < 0.0 { -5.0 } else { 5.0 };
            }
            (vec![], RawFunction::LinearSlope { xopt: xopt.clone() }, 0.0, false, false)
        }
        6 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Rotate(r.clone()),
                cond(10.0),
                Step::Rotate(q.clone()),
            ],
            RawFunction::AttractiveSector { xopt: xopt.clone() },
            0.0,
            true,
            true,
        ),
        7 => (
            vec![Step::Subtract(xopt.clone()), Step::Rotate(r.clone()), cond(10.0)],
            RawFunction::StepEllipsoid { q: q.clone() },
            1.0,
            true,
            true,
        ),
        8 => {
            for v in xopt.iter_mut() {
                *v *= 0.75;
            }
            (
                vec![
                    Step::Subtract(xopt.clone()),
                    Step::Scale(rosen_factor),
                    Step::AddScalar(1.0),
                ],
                RawFunction::Rosenbrock,
                0.0,
                false,
                false,
            )
        }
        9 | 19 => {
            xopt = r.apply_transposed(&vec![0.5 / rosen_factor; dim]);
            let raw = if fid == 9 {
                RawFunction::Rosenbrock
            } else {
                RawFunction::GriewankRosenbrock
            };
            (
                vec![
                    Step::Rotate(r.clone()),
                    Step::Scale(rosen_factor),
                    Step::AddScalar(0.5),
                ],
                raw,
                0.0,
                true,
                false,
            )
        }
        10 | 11 => (
            vec![Step::Subtract(xopt.clone()), Step::Rotate(r.clone()), Step::Oscillate],
            if fid == 10 {
                RawFunction::Ellipsoid { condition: 1e6 }
            } else {
                RawFunction::Discus
            },
            0.0,
            true,
            false,
        ),
        12 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Rotate(r.clone()),
                Step::Asymmetric(0.5),
                Step::Rotate(r.clone()),
            ],
            RawFunction::BentCigar,
            0.0,
            true,
            false,
        ),
        13 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Rotate(r.clone()),
                cond(10.0),
                Step::Rotate(q.clone()),
            ],
            RawFunction::SharpRidge,
            0.0,
            true,
            true,
        ),
        14 => (
            vec![Step::Subtract(xopt.clone()), Step::Rotate(r.clone())],
            RawFunction::DifferentPowers,
            0.0,
            true,
            false,
        ),
        15 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Rotate(r.clone()),
                Step::Oscillate,
                Step::Asymmetric(0.2),
                Step::Rotate(q.clone()),
                cond(10.0),
                Step::Rotate(r.clone()),
            ],
            RawFunction::Rastrigin,
            0.0,
            true,
            true,
        ),
        16 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Rotate(r.clone()),
                Step::Oscillate,
                Step::Rotate(q.clone()),
                cond(0.01),
                Step::Rotate(r.clone()),
            ],
            RawFunction::Weierstrass,
            10.0 / d,
            true,
            true,
        ),
        17 | 18 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Rotate(r.clone()),
                Step::Asymmetric(0.5),
                Step::Rotate(q.clone()),
                cond(if fid == 17 { 10.0 } else { 1000.0 }),
            ],
            RawFunction::Schaffers,
            10.0,
            true,
            true,
        ),
        20 => {
            let signs = random_signs(dim, &mut params);
            xopt = signs.iter().map(|s| s * SCHWEFEL_XOPT / 2.0).collect();
            let two_abs: Vec<f64> = xopt.iter().map(|v| 2.0 * v.abs()).collect();
            (
                vec![
                    Step::ScaleEach(signs.iter().map(|s| 2.0 * s).collect()),
                    Step::SchwefelCouple(two_abs.clone()),
                    Step::Subtract(two_abs.clone()),
                    cond(10.0),
                    Step::Add(two_abs),
                    Step::Scale(100.0),
                ],
                RawFunction::Schwefel,
                0.0,
                false,
                false,
            )
        }
        21 | 22 => {
            let (peaks, global_condition, half_width) = if fid == 21 {
                (101, 1000.0, 5.0)
            } else {
                (21, 1000.0 * 1000.0, 4.9)
            };
            let (x, table) =
                gallagher(dim, peaks, global_condition, half_width, 0.8, &r, &mut params);
            xopt = x;
            (vec![], RawFunction::Gallagher(table), 1.0, true, false)
        }
        23 => (
            vec![
                Step::Subtract(xopt.clone()),
                Step::Rotate(r.clone()),
                cond(100.0),
                Step::Rotate(q.clone()),
            ],
            RawFunction::Katsuura,
            1.0,
            true,
            true,
        ),
        24 => {
            let signs = random_signs(dim, &mut params);
            xopt = signs.iter().map(|s| s * LUNACEK_MU0 / 2.0).collect();
            let s = 1.0 - 1.0 / (2.0 * (d + 20.0).sqrt() - 8.2);
            let mu1 = -((LUNACEK_MU0 * LUNACEK_MU0 - 1.0) / s).sqrt();
            (
                vec![Step::ScaleEach(signs.iter().map(|v| 2.0 * v).collect())],
                RawFunction::Lunacek {
                    mu0: LUNACEK_MU0,
                    mu1,
                    s,
                    r: r.clone(),
                    q: q.clone(),
                    conditioning: lambda_alpha(dim, 100.0),
                },
                1e4,
                true,
                true,
            )
        }
        _ => unreachable!("fid validated by caller"),
    };

    Materialized {
        xopt,
        rot_r: if uses_r { r } else { SquareMatrix::identity(dim) },
        rot_q: if uses_q { q } else { SquareMatrix::identity(dim) },
        chain: TransformChain {
            steps,
            raw,
            penalty,
            fopt,
        },
    }
}
