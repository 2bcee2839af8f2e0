use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::features::{family_rows, mean_some};
use super::output::{fmt_opt, read_cache, write_cache, CsvTable};
use super::UnitFailure;
use crate::error::Result;
use crate::optim::{run_single, Algorithm, RunRecord};
use crate::stats::{one_vs_rest_rejection, pairwise_tests, PairwiseFamily, RejectionUnit, TestMethod};
use crate::suite::ProblemInstance;

/// Settings of a performance sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct PerfSweep {
    pub algorithms: Vec<Algorithm>,
    pub fids: Vec<u32>,
    pub iids: Vec<u32>,
    pub dim: usize,
    pub runs: u32,
    pub budget: usize,
    pub base_seed: u64,
}

impl PerfSweep {
    fn cache_dir(&self, root: &Path) -> PathBuf {
        let key = format!("{}|{}|{}|{}", self.dim, self.runs, self.budget, self.base_seed);
        let h = hex::encode(Sha256::digest(key.as_bytes()));
        root.join(format!("runs-{}", &h[..16]))
    }
}

/// Runs the sweep, reusing cached `(algorithm, fid, iid)` units from `cache`.
pub fn perf_runs(sweep: &PerfSweep, cache: Option<&Path>) -> (Vec<RunRecord>, Vec<UnitFailure>) {
    let dir = cache.map(|c| sweep.cache_dir(c));
    let units: Vec<(Algorithm, u32, u32)> = sweep
        .algorithms
        .iter()
        .flat_map(|&a| {
            sweep
                .fids
                .iter()
                .flat_map(move |&f| sweep.iids.iter().map(move |&i| (a, f, i)))
        })
        .collect();
    let results: Vec<(String, Result<Vec<RunRecord>>)> = units
        .par_iter()
        .map(|&(alg, fid, iid)| {
            let label = format!("perf/{alg}_f{fid}_i{iid}_d{}", sweep.dim);
            let path = dir.as_ref().map(|d| d.join(format!("{alg}_f{fid}_i{iid}.json")));
            if let Some(recs) = path.as_ref().and_then(|p| read_cache::<Vec<RunRecord>>(p)) {
                if recs.len() == sweep.runs as usize {
                    return (label, Ok(recs));
                }
            }
            let res = super::isolate(|| {
                let inst = ProblemInstance::new(fid, iid, sweep.dim)?;
                (0..sweep.runs)
                    .into_par_iter()
                    .map(|r| run_single(alg, &inst, r, sweep.budget, sweep.base_seed))
                    .collect::<Result<Vec<RunRecord>>>()
            });
            if let (Ok(recs), Some(p)) = (&res, &path) {
                if let Err(e) = write_cache(p, recs) {
                    log::warn!("could not cache {label}: {e}");
                }
            }
            (label, res)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (label, res) in results {
        match res {
            Ok(r) => records.extend(r),
            Err(e) => failures.push(UnitFailure::new(label, e)),
        }
    }
    (records, failures)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerfCell {
    /// Fraction of rejected pairwise tests across instances.
    pub pairwise: Option<f64>,
    /// Mean over instances of the one-vs-rest rejection fraction.
    pub one_vs_all: Option<f64>,
    pub per_instance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerfResult {
    pub budgets: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub fids: Vec<u32>,
    pub cells: BTreeMap<(usize, Algorithm, u32), PerfCell>,
}

/// Final precisions per instance, ordered by iid, for one cell.
fn groups_at(records: &[RunRecord], alg: Algorithm, fid: u32, budget: usize) -> (Vec<u32>, Vec<Vec<f64>>) {
    let mut by_iid: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in records {
        if r.algorithm == alg && r.instance.fid() == fid {
            if let Some(p) = r.precision_at(budget) {
                by_iid.entry(r.instance.iid()).or_default().push(p);
            }
        }
    }
    by_iid.into_iter().unzip()
}

/// MWU comparisons of final precision across instances for every
/// `(budget, algorithm, fid)`.
pub fn perf_analysis(
    records: &[RunRecord],
    algorithms: &[Algorithm],
    fids: &[u32],
    budgets: &[usize],
    alpha: f64,
    mut on_family: impl FnMut(&str, &[u32], &PairwiseFamily) -> Result<()>,
) -> Result<PerfResult> {
    let mut cells = BTreeMap::new();
    for &b in budgets {
        for &alg in algorithms {
            for &fid in fids {
                let (iids, groups) = groups_at(records, alg, fid, b);
                if groups.len() < 2 {
                    continue;
                }
                let fam = pairwise_tests(&groups, TestMethod::MannWhitneyU, alpha)?;
                on_family(&format!("{alg}/f{fid}/b{b}"), &iids, &fam)?;
                let ovr = one_vs_rest_rejection(&groups, TestMethod::MannWhitneyU, alpha)?;
                let per_instance: Vec<f64> = ovr.iter().map(|s| s.rate).collect();
                cells.insert(
                    (b, alg, fid),
                    PerfCell {
                        pairwise: fam.summary(RejectionUnit::PerFunction).ok().map(|s| s.rate),
                        one_vs_all: mean_some(per_instance.iter().map(|&v| Some(v))),
                        per_instance,
                    },
                );
            }
        }
    }
    Ok(PerfResult {
        budgets: budgets.to_vec(),
        algorithms: algorithms.to_vec(),
        fids: fids.to_vec(),
        cells,
    })
}

impl PerfResult {
    pub fn cell(&self, budget: usize, alg: Algorithm, fid: u32) -> Option<&PerfCell> {
        self.cells.get(&(budget, alg, fid))
    }

    /// Algorithms by functions matrix with mean row and column.
    pub fn matrix_csv(&self, budget: usize, one_vs_all: bool) -> Result<CsvTable> {
        let pick = |alg: Algorithm, fid: u32| {
            self.cell(budget, alg, fid)
                .and_then(|c| if one_vs_all { c.one_vs_all } else { c.pairwise })
        };
        let mut header = vec!["algorithm".to_string()];
        header.extend(self.fids.iter().map(|f| format!("f{f}")));
        header.push("mean".into());
        let mut t = CsvTable::new(&header)?;
        for &alg in &self.algorithms {
            let mut row = vec![alg.label().to_string()];
            row.extend(self.fids.iter().map(|&f| fmt_opt(pick(alg, f))));
            row.push(fmt_opt(mean_some(self.fids.iter().map(|&f| pick(alg, f)))));
            t.row(row)?;
        }
        let col_mean = |f: u32| mean_some(self.algorithms.iter().map(|&a| pick(a, f)));
        let mut row = vec!["mean".to_string()];
        row.extend(self.fids.iter().map(|&f| fmt_opt(col_mean(f))));
        row.push(fmt_opt(mean_some(self.fids.iter().map(|&f| col_mean(f)))));
        t.row(row)?;
        Ok(t)
    }
}

pub(crate) fn export_family(t: &mut CsvTable, id: &str, iids: &[u32], fam: &PairwiseFamily) -> Result<()> {
    family_rows(t, id, iids, fam)
}
