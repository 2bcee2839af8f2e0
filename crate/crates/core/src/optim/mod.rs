//! Baseline derivative-free optimizers and a fixed-budget run harness.
//!
//! Every optimizer works on the closed box `[-5, 5]^d`, minimises precision
//! (objective value minus the optimum) and records best-so-far precision at
//! the checkpoints returned by [`checkpoints`].

mod algorithms;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

pub use algorithms::{differential_evolution, one_plus_one_es, pso, random_search, spsa};

use crate::error::{invalid, Error, Result};
use crate::rng::mix_seed;
use crate::suite::{ProblemId, ProblemInstance, LOWER_BOUND, UPPER_BOUND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "RS")]
    RandomSearch,
    #[serde(rename = "ES")]
    OnePlusOneEs,
    #[serde(rename = "DE")]
    DifferentialEvolution,
    #[serde(rename = "PSO")]
    Pso,
    #[serde(rename = "SPSA")]
    Spsa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::RandomSearch,
        Algorithm::OnePlusOneEs,
        Algorithm::DifferentialEvolution,
        Algorithm::Pso,
        Algorithm::Spsa,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::RandomSearch => "RS",
            Algorithm::OnePlusOneEs => "ES",
            Algorithm::DifferentialEvolution => "DE",
            Algorithm::Pso => "PSO",
            Algorithm::Spsa => "SPSA",
        }
    }

    /// Runs this algorithm once.
    pub fn run(&self, inst: &ProblemInstance, budget: usize, seed: u64) -> Result<RunRecord> {
        self.run_with(Evaluator::new(inst, budget), seed)
    }

    /// Runs once, passing every evaluated point to `observer` first.
    pub fn run_observed(
        &self,
        inst: &ProblemInstance,
        budget: usize,
        seed: u64,
        observer: &mut dyn FnMut(&[f64]),
    ) -> Result<RunRecord> {
        let mut ev = Evaluator::new(inst, budget);
        ev.observer = Some(observer);
        self.run_with(ev, seed)
    }

    fn run_with(&self, ev: Evaluator, seed: u64) -> Result<RunRecord> {
        match self {
            Algorithm::RandomSearch => algorithms::random_search_with(ev, seed),
            Algorithm::OnePlusOneEs => algorithms::es_with(ev, seed, |_| {}),
            Algorithm::DifferentialEvolution => algorithms::de_with(ev, seed),
            Algorithm::Pso => algorithms::pso_with(ev, seed, |_| {}),
            Algorithm::Spsa => algorithms::spsa_with(ev, seed),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

/// One optimizer run: best-so-far precision at each checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub instance: ProblemId,
    pub run: u32,
    pub run_seed: u64,
    pub evaluations: usize,
    pub checkpoints: Vec<(usize, f64)>,
}

impl RunRecord {
    pub fn final_precision(&self) -> f64 {
        self.checkpoints.last().map(|c| c.1).unwrap_or(f64::INFINITY)
    }

    /// Best precision recorded exactly at `budget`.
    pub fn precision_at(&self, budget: usize) -> Option<f64> {
        self.checkpoints.iter().find(|c| c.0 == budget).map(|c| c.1)
    }
}

/// 1, 2, 5, 10, 20, 50, ... up to `budget`, plus `budget` itself.
pub fn checkpoints(budget: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut scale = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            let Some(v) = scale.checked_mul(m) else { break 'outer };
            if v > budget {
                break 'outer;
            }
            out.push(v);
        }
        let Some(next) = scale.checked_mul(10) else { break };
        scale = next;
    }
    if out.last() != Some(&budget) && budget > 0 {
        out.push(budget);
    }
    out
}

/// Budget-limited precision oracle shared by all optimizers.
pub(crate) struct Evaluator<'a> {
    inst: &'a ProblemInstance,
    budget: usize,
    used: usize,
    best: f64,
    grid: Vec<usize>,
    next: usize,
    recorded: Vec<(usize, f64)>,
    observer: Option<&'a mut dyn FnMut(&[f64])>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(inst: &'a ProblemInstance, budget: usize) -> Self {
        Self {
            inst,
            budget,
            used: 0,
            best: f64::INFINITY,
            grid: checkpoints(budget),
            next: 0,
            recorded: Vec::new(),
            observer: None,
        }
    }

    pub(crate) fn budget(&self) -> usize {
        self.budget
    }

    pub(crate) fn dim(&self) -> usize {
        self.inst.dim()
    }

    pub(crate) fn remaining(&self) -> usize {
        self.budget - self.used
    }

    /// Precision at `x`. Panics when the budget is spent or `x` leaves the
    /// box, both of which are optimizer bugs.
    pub(crate) fn eval(&mut self, x: &[f64]) -> f64 {
        assert!(self.used < self.budget, "evaluation budget exceeded");
        assert!(
            x.iter().all(|v| (LOWER_BOUND..=UPPER_BOUND).contains(v)),
            "evaluation outside the box: {x:?}"
        );
        if let Some(obs) = self.observer.as_mut() {
            obs(x);
        }
        let p = self.inst.chain().eval_unshifted(x);
        self.used += 1;
        self.best = self.best.min(p.max(0.0));
        while self.next < self.grid.len() && self.grid[self.next] == self.used {
            self.recorded.push((self.used, self.best));
            self.next += 1;
        }
        p
    }

    pub(crate) fn finish(mut self, algorithm: Algorithm, seed: u64) -> RunRecord {
        for &cp in &self.grid[self.next..] {
            self.recorded.push((cp, self.best));
        }
        RunRecord {
            algorithm,
            instance: self.inst.id(),
            run: 0,
            run_seed: seed,
            evaluations: self.used,
            checkpoints: self.recorded,
        }
    }
}

pub(crate) fn clamp_box(v: f64) -> f64 {
    v.clamp(LOWER_BOUND, UPPER_BOUND)
}

/// Size accounting for a full cross-product of runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunPlan {
    pub algorithms: usize,
    pub fids: usize,
    pub iids: usize,
    pub runs: usize,
}

impl RunPlan {
    pub fn total(&self) -> u64 {
        [self.algorithms, self.fids, self.iids, self.runs]
            .iter()
            .map(|&v| v as u64)
            .product()
    }

    /// Index tuples `(algorithm, fid, iid, run)` in harness order.
    pub fn units(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        (0..self.algorithms).flat_map(move |a| {
            (0..self.fids).flat_map(move |f| {
                (0..self.iids).flat_map(move |i| (0..self.runs).map(move |r| (a, f, i, r)))
            })
        })
    }
}

/// Seed of one run, independent of every other unit in the sweep.
pub fn run_seed(base_seed: u64, algorithm: Algorithm, fid: u32, iid: u32, run: u32) -> u64 {
    mix_seed(&[base_seed, algorithm as u64, fid as u64, iid as u64, run as u64])
}

/// Runs `(algorithm, fid, iid, run)` in isolation.
pub fn run_single(
    algorithm: Algorithm,
    inst: &ProblemInstance,
    run: u32,
    budget: usize,
    base_seed: u64,
) -> Result<RunRecord> {
    let id = inst.id();
    let seed = run_seed(base_seed, algorithm, id.fid(), id.iid(), run);
    let mut rec = catch_unwind(AssertUnwindSafe(|| algorithm.run(inst, budget, seed)))
        .unwrap_or_else(|_| invalid(format!("{algorithm} panicked on {id} run {run}")))?;
    rec.run = run;
    Ok(rec)
}

#[derive(Clone, Debug, Default)]
pub struct RunSet {
    pub records: Vec<RunRecord>,
    /// `(unit label, error)` for runs that failed.
    pub failures: Vec<(String, String)>,
}

/// Runs every `(algorithm, fid, iid, run)` combination for iids `1..=iids`.
/// Records come back sorted by algorithm, fid, iid and run.
pub fn run_experiment(
    algorithms: &[Algorithm],
    fids: &[u32],
    iids: u32,
    dim: usize,
    runs: u32,
    budget: usize,
    base_seed: u64,
) -> Result<RunSet> {
    if algorithms.is_empty() || fids.is_empty() || iids == 0 || runs == 0 {
        return invalid("run_experiment needs algorithms, fids, iids and runs");
    }
    let pairs: Vec<(u32, u32)> = fids
        .iter()
        .flat_map(|&f| (1..=iids).map(move |i| (f, i)))
        .collect();
    let results: Vec<Vec<(String, Result<RunRecord>)>> = pairs
        .par_iter()
        .map(|&(fid, iid)| {
            let inst = match ProblemInstance::new(fid, iid, dim) {
                Ok(i) => i,
                Err(e) => {
                    return vec![(format!("f{fid}_i{iid}_d{dim}"), Err(e))];
                }
            };
            let units: Vec<(Algorithm, u32)> = algorithms
                .iter()
                .flat_map(|&a| (0..runs).map(move |r| (a, r)))
                .collect();
            units
                .into_par_iter()
                .map(|(a, r)| {
                    let label = format!("{a}/{}/run{r}", inst.id());
                    (label, run_single(a, &inst, r, budget, base_seed))
                })
                .collect()
        })
        .collect();
    let mut set = RunSet::default();
    for (label, res) in results.into_iter().flatten() {
        match res {
            Ok(r) => set.records.push(r),
            Err(e) => {
                log::warn!("run {label} failed: {e}");
                set.failures.push((label, e.to_string()));
            }
        }
    }
    set.records.sort_by_key(|r| {
        (r.algorithm, r.instance.fid(), r.instance.iid(), r.run)
    });
    Ok(set)
}

/// Long-format run export, one row per checkpoint.
pub fn write_runs_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.algorithm, r.instance.fid(), r.instance.iid(), r.instance.dim(), r.run));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["algorithm", "fid", "iid", "dim", "run", "budget", "best_precision"])?;
    for r in sorted {
        for &(b, p) in &r.checkpoints {
            w.write_record([
                r.algorithm.label().to_string(),
                r.instance.fid().to_string(),
                r.instance.iid().to_string(),
                r.instance.dim().to_string(),
                r.run.to_string(),
                b.to_string(),
                format!("{p:e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(1), vec![1]);
        assert_eq!(checkpoints(10), vec![1, 2, 5, 10]);
        assert_eq!(checkpoints(1000), vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]);
        assert_eq!(checkpoints(30), vec![1, 2, 5, 10, 20, 30]);
    }

    #[test]
    fn plan_accounting() {
        let plan = RunPlan { algorithms: 2, fids: 1, iids: 10, runs: 5 };
        assert_eq!(plan.total(), 100);
        assert_eq!(plan.units().count(), 100);
    }

    #[test]
    fn small_sweep_counts_and_reproduces() {
        let set = run_experiment(
            &[Algorithm::RandomSearch, Algorithm::Spsa],
            &[3],
            10,
            2,
            5,
            50,
            9,
        )
        .unwrap();
        assert_eq!(set.records.len(), 100);
        assert!(set.failures.is_empty());
        let pick = &set.records[37];
        let inst = ProblemInstance::new(3, pick.instance.iid(), 2).unwrap();
        let again = run_single(pick.algorithm, &inst, pick.run, 50, 9).unwrap();
        assert_eq!(&again, pick);
    }

    #[test]
    fn algorithm_labels_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.label().parse::<Algorithm>().unwrap(), a);
        }
        assert!("cobyla".parse::<Algorithm>().is_err());
    }

    #[test]
    fn runs_csv_layout() {
        let inst = ProblemInstance::new(1, 1, 2).unwrap();
        let rec = random_search(&inst, 5, 1).unwrap();
        let mut buf = Vec::new();
        write_runs_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "algorithm,fid,iid,dim,run,budget,best_precision");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("RS,1,1,2,0,5,"));
    }
}
