//! Experiment orchestration: configuration, cached work units and the
//! plot-ready CSV artifacts.
//!
//! | experiment | artifacts |
//! |---|---|
//! | `ela-dist` | `features.csv`, `feature_missing.csv`, `ela_dist_rejection.csv` |
//! | `repr` | `repr_instances.csv`, `repr_boxplot.csv` |
//! | `ecdf` | `ecdf_curves.csv`, `ecdf_normality.csv` |
//! | `perf` | `runs.csv`, `perf_pairwise_b{B}.csv`, `perf_one_vs_all_b{B}.csv` |
//! | `optima` | `optima_manifest.csv`, `optima_uniformity.csv` |
//! | `avggrid` | `avggrid.csv` |
//!
//! Every CSV has a `.meta.json` sidecar. Units that fail are listed in
//! `failures.csv`; completed units are cached under `.cache/` so a re-run
//! only computes what is missing.

pub mod config;
mod features;
mod landscape;
pub mod output;
mod perf;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

pub use config::{ConfigLayer, ExperimentConfig, ExperimentKind, Profile, DESK_FIDS};
pub use features::{
    box_stats, compute_feature_table, ecdf_curves, ela_dist_analysis, repr_rows, unit_features, BoxStats,
    DistCell, EcdfCurve, ElaDistResult, FeatureTable, ReprRow,
};
pub use landscape::{average_grid, optimum_uniformity, PRECISION_FLOOR};
pub use perf::{perf_analysis, perf_runs, PerfCell, PerfResult, PerfSweep};

use crate::ela::catalogue;
use crate::error::{Error, Result};
use crate::optim::{write_runs_csv, RunPlan};
use crate::suite::{write_manifest, ProblemInstance};
use output::{emit_csv, emit_csv_bytes, fmt_num, CsvTable};

/// A work unit that could not be completed.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitFailure {
    pub unit: String,
    pub error: String,
}

impl UnitFailure {
    pub fn new(unit: String, error: Error) -> Self {
        Self {
            unit,
            error: error.to_string(),
        }
    }
}

/// Runs `f`, turning a panic into an error so one unit cannot abort a sweep.
pub(crate) fn isolate<T>(f: impl FnOnce() -> Result<T>) -> Result<T> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        Err(Error::InvalidArgument(format!("work unit panicked: {msg}")))
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<UnitFailure>,
}

impl Outcome {
    /// 0 on full success, 2 when some units failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Work accounting without running anything: `(quantity, count)` lines.
pub fn dry_run(config: &ExperimentConfig) -> Vec<(String, u64)> {
    let fids = config.fids.len() as u64;
    let iids = config.iids as u64;
    match config.experiment {
        ExperimentKind::ElaDist | ExperimentKind::Repr | ExperimentKind::Ecdf => {
            let pairs = iids * (iids - 1) / 2;
            vec![
                ("feature units (fid, iid)".into(), fids * iids),
                ("designs evaluated".into(), fids * iids * config.doe_count as u64),
                ("objective evaluations".into(), fids * iids * (config.doe_count * config.doe_size) as u64),
                ("pairwise tests per feature".into(), pairs),
                ("pairwise tests".into(), fids * catalogue().len() as u64 * pairs),
            ]
        }
        ExperimentKind::Perf => {
            let plan = RunPlan {
                algorithms: config.algorithms.len(),
                fids: config.fids.len(),
                iids: config.iids as usize,
                runs: config.runs as usize,
            };
            vec![
                ("optimizer runs".into(), plan.total()),
                ("objective evaluations".into(), plan.total() * config.budget as u64),
                ("pairwise tests".into(), plan.algorithms as u64 * fids * config.perf_budgets.len() as u64 * iids * (iids - 1) / 2),
            ]
        }
        ExperimentKind::Optima => vec![("instances".into(), fids * iids)],
        ExperimentKind::Avggrid => {
            let cells = (config.grid_resolution * config.grid_resolution) as u64;
            vec![
                ("grid cells".into(), fids * cells),
                ("objective evaluations".into(), fids * cells * iids),
            ]
        }
    }
}

/// Runs the configured experiment inside a pool of `config.workers` threads.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut outcome = pool.install(|| match config.experiment {
        ExperimentKind::ElaDist | ExperimentKind::Repr | ExperimentKind::Ecdf => run_features(config),
        ExperimentKind::Perf => run_perf(config),
        ExperimentKind::Optima => run_optima(config),
        ExperimentKind::Avggrid => run_avggrid(config),
    })?;
    let failures_path = config.output_dir.join("failures.csv");
    if outcome.failures.is_empty() {
        for stale in [failures_path.clone(), config.output_dir.join("failures.csv.meta.json")] {
            if stale.exists() {
                std::fs::remove_file(stale)?;
            }
        }
    } else {
        let mut t = CsvTable::new(&["unit", "error"])?;
        for f in &outcome.failures {
            t.row([f.unit.as_str(), f.error.as_str()])?;
        }
        outcome.files.push(emit_csv(config, "failures.csv", t)?);
    }
    Ok(outcome)
}

fn cache_root(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.join(".cache")
}

fn run_features(config: &ExperimentConfig) -> Result<Outcome> {
    let cache = cache_root(config);
    let (table, failures) = compute_feature_table(
        &config.fids,
        &config.iid_list(),
        config.dim,
        config.doe_size,
        &config.doe_seeds(),
        Some(&cache),
    );
    let mut out = Outcome {
        failures,
        ..Default::default()
    };
    if table.units.is_empty() {
        return Ok(out);
    }
    match config.experiment {
        ExperimentKind::Ecdf => {
            let mut curves = Vec::new();
            for &fid in &config.fids {
                for feat in &config.ecdf_features {
                    curves.extend(ecdf_curves(&table, fid, feat));
                }
            }
            let (steps, normal) = features::ecdf_tables(&curves, config.alpha)?;
            out.files.push(emit_csv(config, "ecdf_curves.csv", steps)?);
            out.files.push(emit_csv(config, "ecdf_normality.csv", normal)?);
        }
        _ => {
            let names = table.informative_features()?;
            let mut tests = CsvTable::new(&features::TEST_EXPORT_COLUMNS)?;
            let dist = ela_dist_analysis(&table, &names, config.alpha, |fid, feat, iids, fam| {
                if config.export_tests {
                    features::family_rows(&mut tests, &format!("f{fid}/{feat}"), iids, fam)?;
                }
                Ok(())
            })?;
            if config.experiment == ExperimentKind::ElaDist {
                let (matrix, reasons) = table.to_csv()?;
                out.files.push(emit_csv(config, "features.csv", matrix)?);
                out.files.push(emit_csv(config, "feature_missing.csv", reasons)?);
                out.files.push(emit_csv(config, "ela_dist_rejection.csv", dist.matrix_csv()?)?);
            } else {
                let (inst, boxes) = features::repr_tables(&repr_rows(&dist))?;
                out.files.push(emit_csv(config, "repr_instances.csv", inst)?);
                out.files.push(emit_csv(config, "repr_boxplot.csv", boxes)?);
            }
            if config.export_tests {
                out.files.push(emit_csv(config, "tests.csv", tests)?);
            }
        }
    }
    Ok(out)
}

fn run_perf(config: &ExperimentConfig) -> Result<Outcome> {
    let sweep = PerfSweep {
        algorithms: config.algorithms.clone(),
        fids: config.fids.clone(),
        iids: config.iid_list(),
        dim: config.dim,
        runs: config.runs,
        budget: config.budget,
        base_seed: config.base_seed,
    };
    let (records, failures) = perf_runs(&sweep, Some(&cache_root(config)));
    let mut out = Outcome {
        failures,
        ..Default::default()
    };
    let mut buf = Vec::new();
    write_runs_csv(&records, &mut buf)?;
    out.files.push(emit_csv_bytes(config, "runs.csv", &buf)?);
    let mut tests = CsvTable::new(&features::TEST_EXPORT_COLUMNS)?;
    let res = perf_analysis(
        &records,
        &config.algorithms,
        &config.fids,
        &config.perf_budgets,
        config.alpha,
        |id, iids, fam| {
            if config.export_tests {
                perf::export_family(&mut tests, id, iids, fam)?;
            }
            Ok(())
        },
    )?;
    for &b in &config.perf_budgets {
        out.files.push(emit_csv(config, &format!("perf_pairwise_b{b}.csv"), res.matrix_csv(b, false)?)?);
        out.files.push(emit_csv(config, &format!("perf_one_vs_all_b{b}.csv"), res.matrix_csv(b, true)?)?);
    }
    if config.export_tests {
        out.files.push(emit_csv(config, "tests.csv", tests)?);
    }
    Ok(out)
}

fn run_optima(config: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut all = Vec::new();
    let mut summary = CsvTable::new(&["fid", "coordinate", "n", "ks_statistic", "p_value", "rejected"])?;
    for &fid in &config.fids {
        let mut insts = Vec::with_capacity(config.iids as usize);
        for iid in config.iid_list() {
            match ProblemInstance::new(fid, iid, config.dim) {
                Ok(i) => insts.push(i),
                Err(e) => out.failures.push(UnitFailure::new(format!("optima/f{fid}_i{iid}"), e)),
            }
        }
        if insts.len() >= 5 {
            landscape::uniformity_rows(&mut summary, fid, &optimum_uniformity(&insts)?, config.alpha)?;
        }
        all.extend(insts);
    }
    let mut buf = Vec::new();
    write_manifest(&all, &mut buf)?;
    out.files.push(emit_csv_bytes(config, "optima_manifest.csv", &buf)?);
    out.files.push(emit_csv(config, "optima_uniformity.csv", summary)?);
    Ok(out)
}

fn run_avggrid(config: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut t = CsvTable::new(&["fid", "x1", "x2", "log10_mean_precision"])?;
    for &fid in &config.fids {
        match average_grid(fid, &config.iid_list(), config.grid_resolution) {
            Ok(grid) => {
                for (p, v) in grid {
                    t.row([fid.to_string(), fmt_num(p[0]), fmt_num(p[1]), fmt_num(v)])?;
                }
            }
            Err(e) => out.failures.push(UnitFailure::new(format!("avggrid/f{fid}"), e)),
        }
    }
    out.files.push(emit_csv(config, "avggrid.csv", t)?);
    Ok(out)
}
