use rand::Rng;
use rand_distr::StandardNormal;

use super::{clamp_box, Algorithm, Evaluator, RunRecord};
use crate::error::{invalid, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::suite::{ProblemInstance, LOWER_BOUND, UPPER_BOUND};

const WIDTH: f64 = UPPER_BOUND - LOWER_BOUND;

fn uniform_point(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| clamp_box(LOWER_BOUND + WIDTH * rng.random::<f64>()))
        .collect()
}

fn check_budget(budget: usize, min: usize, name: &str) -> Result<()> {
    if budget < min {
        return invalid(format!("{name} needs a budget of at least {min}, got {budget}"));
    }
    Ok(())
}

/// Uniform i.i.d. sampling of the box.
pub fn random_search(inst: &ProblemInstance, budget: usize, seed: u64) -> Result<RunRecord> {
    random_search_with(Evaluator::new(inst, budget), seed)
}

pub(crate) fn random_search_with(mut ev: Evaluator, seed: u64) -> Result<RunRecord> {
    check_budget(ev.budget(), 1, "random search")?;
    let mut rng = stream_rng(seed, 0);
    while ev.remaining() > 0 {
        let x = uniform_point(&mut rng, ev.dim());
        ev.eval(&x);
    }
    Ok(ev.finish(Algorithm::RandomSearch, seed))
}

const ES_SIGMA0: f64 = 1.0;
pub(crate) const ES_SIGMA_MIN: f64 = 1e-12;
pub(crate) const ES_SIGMA_MAX: f64 = 10.0;
const ES_WINDOW: usize = 10;
const ES_FACTOR: f64 = 1.5;

/// (1+1)-ES run that reports the step size after every adaptation.
pub(crate) fn es_with(mut ev: Evaluator, seed: u64, mut on_sigma: impl FnMut(f64)) -> Result<RunRecord> {
    check_budget(ev.budget(), 2, "(1+1)-ES")?;
    let mut rng = stream_rng(seed, 0);
    let d = ev.dim();
    let mut x = uniform_point(&mut rng, d);
    let mut fx = ev.eval(&x);
    let mut sigma = ES_SIGMA0;
    let mut successes = 0;
    let mut iters = 0;
    while ev.remaining() > 0 {
        let y: Vec<f64> = x
            .iter()
            .map(|&v| clamp_box(v + sigma * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let fy = ev.eval(&y);
        if fy <= fx {
            x = y;
            fx = fy;
            successes += 1;
        }
        iters += 1;
        if iters % ES_WINDOW == 0 {
            let rate = successes as f64 / ES_WINDOW as f64;
            if rate > 0.2 {
                sigma *= ES_FACTOR;
            } else if rate < 0.2 {
                sigma /= ES_FACTOR;
            }
            sigma = sigma.clamp(ES_SIGMA_MIN, ES_SIGMA_MAX);
            successes = 0;
            on_sigma(sigma);
        }
    }
    Ok(ev.finish(Algorithm::OnePlusOneEs, seed))
}

/// (1+1)-ES with isotropic Gaussian mutation and the 1/5th success rule.
pub fn one_plus_one_es(inst: &ProblemInstance, budget: usize, seed: u64) -> Result<RunRecord> {
    es_with(Evaluator::new(inst, budget), seed, |_| {})
}

const DE_F: f64 = 0.5;
const DE_CR: f64 = 0.9;

/// Mirror `v` back into `[LOWER_BOUND, UPPER_BOUND]`.
pub(crate) fn reflect(v: f64) -> f64 {
    if (LOWER_BOUND..=UPPER_BOUND).contains(&v) {
        return v;
    }
    let mut t = (v - LOWER_BOUND).rem_euclid(2.0 * WIDTH);
    if t > WIDTH {
        t = 2.0 * WIDTH - t;
    }
    clamp_box(LOWER_BOUND + t)
}

/// Three distinct indices, all different from `i`.
fn pick3(rng: &mut StreamRng, n: usize, i: usize) -> [usize; 3] {
    let mut out = [i; 3];
    for k in 0..3 {
        loop {
            let c = rng.random_range(0..n);
            if c != i && !out[..k].contains(&c) {
                out[k] = c;
                break;
            }
        }
    }
    out
}

/// DE/rand/1/bin with population 10·d.
pub fn differential_evolution(inst: &ProblemInstance, budget: usize, seed: u64) -> Result<RunRecord> {
    de_with(Evaluator::new(inst, budget), seed)
}

pub(crate) fn de_with(mut ev: Evaluator, seed: u64) -> Result<RunRecord> {
    check_budget(ev.budget(), 1, "differential evolution")?;
    let mut rng = stream_rng(seed, 0);
    let d = ev.dim();
    let np = (10 * d).max(4);
    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(np);
    let mut fit = Vec::with_capacity(np);
    for _ in 0..np {
        if ev.remaining() == 0 {
            return Ok(ev.finish(Algorithm::DifferentialEvolution, seed));
        }
        let x = uniform_point(&mut rng, d);
        fit.push(ev.eval(&x));
        pop.push(x);
    }
    'run: loop {
        let mut next_pop = pop.clone();
        let mut next_fit = fit.clone();
        for i in 0..np {
            if ev.remaining() == 0 {
                break 'run;
            }
            let [r1, r2, r3] = pick3(&mut rng, np, i);
            let j_rand = rng.random_range(0..d);
            let trial: Vec<f64> = (0..d)
                .map(|j| {
                    if j == j_rand || rng.random::<f64>() < DE_CR {
                        reflect(pop[r1][j] + DE_F * (pop[r2][j] - pop[r3][j]))
                    } else {
                        pop[i][j]
                    }
                })
                .collect();
            let ft = ev.eval(&trial);
            if ft <= fit[i] {
                next_pop[i] = trial;
                next_fit[i] = ft;
            }
        }
        pop = next_pop;
        fit = next_fit;
    }
    Ok(ev.finish(Algorithm::DifferentialEvolution, seed))
}

const PSO_SWARM: usize = 40;
const PSO_INERTIA: f64 = 0.729;
const PSO_ACCEL: f64 = 1.49445;
pub(crate) const PSO_VMAX: f64 = WIDTH / 2.0;

/// PSO run that reports all velocities after every swarm update.
pub(crate) fn pso_with(
    mut ev: Evaluator,
    seed: u64,
    mut on_velocities: impl FnMut(&[Vec<f64>]),
) -> Result<RunRecord> {
    check_budget(ev.budget(), 1, "particle swarm")?;
    let mut rng = stream_rng(seed, 0);
    let d = ev.dim();
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(PSO_SWARM);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(PSO_SWARM);
    let mut pbest: Vec<Vec<f64>> = Vec::with_capacity(PSO_SWARM);
    let mut pfit = Vec::with_capacity(PSO_SWARM);
    for _ in 0..PSO_SWARM {
        if ev.remaining() == 0 {
            return Ok(ev.finish(Algorithm::Pso, seed));
        }
        let p = uniform_point(&mut rng, d);
        let u = uniform_point(&mut rng, d);
        v.push(p.iter().zip(&u).map(|(a, b)| 0.5 * (b - a)).collect());
        pfit.push(ev.eval(&p));
        pbest.push(p.clone());
        x.push(p);
    }
    let mut g = 0;
    for k in 1..PSO_SWARM {
        if pfit[k] < pfit[g] {
            g = k;
        }
    }
    'run: loop {
        let gbest = pbest[g].clone();
        for k in 0..PSO_SWARM {
            if ev.remaining() == 0 {
                break 'run;
            }
            for j in 0..d {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vj = PSO_INERTIA * v[k][j]
                    + PSO_ACCEL * r1 * (pbest[k][j] - x[k][j])
                    + PSO_ACCEL * r2 * (gbest[j] - x[k][j]);
                v[k][j] = vj.clamp(-PSO_VMAX, PSO_VMAX);
                let pos = x[k][j] + v[k][j];
                if !(LOWER_BOUND..=UPPER_BOUND).contains(&pos) {
                    v[k][j] = 0.0;
                }
                x[k][j] = clamp_box(pos);
            }
            let f = ev.eval(&x[k]);
            if f <= pfit[k] {
                pfit[k] = f;
                pbest[k] = x[k].clone();
            }
        }
        for k in 0..PSO_SWARM {
            if pfit[k] < pfit[g] {
                g = k;
            }
        }
        on_velocities(&v);
    }
    Ok(ev.finish(Algorithm::Pso, seed))
}

/// Global-best particle swarm with a 40-particle swarm.
pub fn pso(inst: &ProblemInstance, budget: usize, seed: u64) -> Result<RunRecord> {
    pso_with(Evaluator::new(inst, budget), seed, |_| {})
}

const SPSA_A_GAIN: f64 = 0.2;
const SPSA_C: f64 = 0.1;
const SPSA_ALPHA: f64 = 0.602;
const SPSA_GAMMA: f64 = 0.101;

/// Simultaneous perturbation stochastic approximation started at the
/// centre of the box.
pub fn spsa(inst: &ProblemInstance, budget: usize, seed: u64) -> Result<RunRecord> {
    spsa_with(Evaluator::new(inst, budget), seed)
}

pub(crate) fn spsa_with(mut ev: Evaluator, seed: u64) -> Result<RunRecord> {
    check_budget(ev.budget(), 2, "SPSA")?;
    let mut rng = stream_rng(seed, 0);
    let d = ev.dim();
    let stability = ev.budget() as f64 / 20.0;
    let mut x = vec![0.0; d];
    let mut k = 0usize;
    while ev.remaining() >= 2 {
        let kf = k as f64;
        let ak = SPSA_A_GAIN / (kf + 1.0 + stability).powf(SPSA_ALPHA);
        let ck = SPSA_C / (kf + 1.0).powf(SPSA_GAMMA);
        let delta: Vec<f64> = (0..d)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, s)| clamp_box(v + ck * s)).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, s)| clamp_box(v - ck * s)).collect();
        let diff = ev.eval(&plus) - ev.eval(&minus);
        for (xi, s) in x.iter_mut().zip(&delta) {
            *xi = clamp_box(*xi - ak * diff / (2.0 * ck * s));
        }
        k += 1;
    }
    Ok(ev.finish(Algorithm::Spsa, seed))
}
