use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::output::{fmt_num, fmt_opt, read_cache, write_cache, CsvTable};
use super::UnitFailure;
use crate::doe::{lhs_sample, Doe};
use crate::ela::{compute_all, drop_degenerate, FeatureVector, CATALOGUE_VERSION};
use crate::error::{invalid, Result};
use crate::stats::{
    ecdf, normality_test, pairwise_tests, quantile_sorted, sorted_copy, PairwiseFamily, RejectionUnit,
    TestMethod,
};
use crate::suite::{ProblemInstance, LOWER_BOUND, UPPER_BOUND};

/// Feature vectors for every `(fid, iid)` unit, one per design seed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureTable {
    pub dim: usize,
    pub doe_size: usize,
    pub doe_seeds: Vec<u64>,
    pub units: BTreeMap<(u32, u32), Vec<FeatureVector>>,
}

impl FeatureTable {
    /// Values of one feature for one unit, missing entries skipped.
    pub fn sample(&self, fid: u32, iid: u32, feature: &str) -> Vec<f64> {
        self.units
            .get(&(fid, iid))
            .map(|rows| rows.iter().filter_map(|fv| fv.value(feature)).collect())
            .unwrap_or_default()
    }

    pub fn iids(&self, fid: u32) -> Vec<u32> {
        self.units.keys().filter(|k| k.0 == fid).map(|k| k.1).collect()
    }

    pub fn fids(&self) -> Vec<u32> {
        let mut f: Vec<u32> = self.units.keys().map(|k| k.0).collect();
        f.dedup();
        f
    }

    /// Features that vary somewhere in the table.
    pub fn informative_features(&self) -> Result<Vec<String>> {
        let rows: Vec<FeatureVector> = self.units.values().flatten().cloned().collect();
        Ok(drop_degenerate(&rows)?.kept)
    }

    /// Feature matrix export: one row per `(fid, iid, doe_seed)`, missing
    /// values empty, plus the long-format reason table.
    pub fn to_csv(&self) -> Result<(CsvTable, CsvTable)> {
        let names: Vec<String> = self
            .units
            .values()
            .flatten()
            .next()
            .map(|fv| fv.names().map(String::from).collect())
            .unwrap_or_default();
        let mut header = vec!["fid".to_string(), "iid".into(), "dim".into(), "doe_seed".into()];
        header.extend(names.iter().cloned());
        let mut matrix = CsvTable::new(&header)?;
        let mut reasons = CsvTable::new(&["fid", "iid", "dim", "doe_seed", "feature", "reason"])?;
        for (&(fid, iid), rows) in &self.units {
            for (fv, seed) in rows.iter().zip(&self.doe_seeds) {
                let key = [fid.to_string(), iid.to_string(), self.dim.to_string(), seed.to_string()];
                let mut rec: Vec<String> = key.to_vec();
                for (name, v) in fv.entries() {
                    rec.push(fmt_opt(v.value()));
                    if let Some(r) = v.missing_reason() {
                        let mut line = key.to_vec();
                        line.push(name.clone());
                        line.push(r.code().to_string());
                        reasons.row(line)?;
                    }
                }
                matrix.row(rec)?;
            }
        }
        Ok((matrix, reasons))
    }
}

/// Features of one instance on every design seed. Designs depend only on
/// the seed, so all instances of a sweep share their X samples.
pub fn unit_features(fid: u32, iid: u32, dim: usize, doe_size: usize, seeds: &[u64]) -> Result<Vec<FeatureVector>> {
    let inst = ProblemInstance::new(fid, iid, dim)?;
    seeds
        .iter()
        .map(|&seed| {
            let x = lhs_sample(doe_size, dim, seed, LOWER_BOUND, UPPER_BOUND)?;
            let y = x.iter().map(|p| inst.evaluate(p)).collect::<Result<Vec<f64>>>()?;
            let mut doe = Doe::from_parts(x, y, seed)?;
            doe.instance = Some(inst.id());
            Ok(compute_all(&doe))
        })
        .collect()
}

fn feature_cache_dir(root: &Path, dim: usize, doe_size: usize, seeds: &[u64]) -> PathBuf {
    let key = format!("{CATALOGUE_VERSION}|{dim}|{doe_size}|{seeds:?}");
    let h = hex::encode(Sha256::digest(key.as_bytes()));
    root.join(format!("features-{}", &h[..16]))
}

/// Computes (or loads from `cache`) the feature vectors of every unit.
/// Failed units are left out of the table and reported.
pub fn compute_feature_table(
    fids: &[u32],
    iids: &[u32],
    dim: usize,
    doe_size: usize,
    seeds: &[u64],
    cache: Option<&Path>,
) -> (FeatureTable, Vec<UnitFailure>) {
    let dir = cache.map(|c| feature_cache_dir(c, dim, doe_size, seeds));
    let units: Vec<(u32, u32)> = fids
        .iter()
        .flat_map(|&f| iids.iter().map(move |&i| (f, i)))
        .collect();
    let results: Vec<((u32, u32), Result<Vec<FeatureVector>>)> = units
        .par_iter()
        .map(|&(fid, iid)| {
            let path = dir.as_ref().map(|d| d.join(format!("f{fid}_i{iid}.json")));
            if let Some(rows) = path.as_ref().and_then(|p| read_cache::<Vec<FeatureVector>>(p)) {
                if rows.len() == seeds.len() {
                    return ((fid, iid), Ok(rows));
                }
            }
            let res = super::isolate(|| unit_features(fid, iid, dim, doe_size, seeds));
            if let (Ok(rows), Some(p)) = (&res, &path) {
                if let Err(e) = write_cache(p, rows) {
                    log::warn!("could not cache unit f{fid}_i{iid}: {e}");
                }
            }
            ((fid, iid), res)
        })
        .collect();
    let mut table = FeatureTable {
        dim,
        doe_size,
        doe_seeds: seeds.to_vec(),
        units: BTreeMap::new(),
    };
    let mut failures = Vec::new();
    for ((fid, iid), res) in results {
        match res {
            Ok(rows) => {
                table.units.insert((fid, iid), rows);
            }
            Err(e) => failures.push(UnitFailure::new(format!("features/f{fid}_i{iid}_d{dim}"), e)),
        }
    }
    (table, failures)
}

/// Rejection statistics of one `(fid, feature)` family.
#[derive(Clone, Debug, PartialEq)]
pub struct DistCell {
    pub rate: Option<f64>,
    pub tests: usize,
    pub failed_pairs: usize,
    /// Per-instance fraction of rejected tests, aligned with `iids`.
    pub per_instance: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElaDistResult {
    pub fids: Vec<u32>,
    pub features: Vec<String>,
    pub iids: BTreeMap<u32, Vec<u32>>,
    pub cells: BTreeMap<(u32, String), DistCell>,
}

impl ElaDistResult {
    pub fn rate(&self, fid: u32, feature: &str) -> Option<f64> {
        self.cells.get(&(fid, feature.to_string())).and_then(|c| c.rate)
    }

    /// Mean rate across features with a value.
    pub fn row_mean(&self, fid: u32) -> Option<f64> {
        mean_some(self.features.iter().map(|f| self.rate(fid, f)))
    }

    pub fn column_mean(&self, feature: &str) -> Option<f64> {
        mean_some(self.fids.iter().map(|&fid| self.rate(fid, feature)))
    }

    pub fn overall_mean(&self) -> Option<f64> {
        mean_some(self.fids.iter().map(|&fid| self.row_mean(fid)))
    }

    /// Heatmap of functions by features with a mean row and column.
    pub fn matrix_csv(&self) -> Result<CsvTable> {
        let mut header = vec!["fid".to_string()];
        header.extend(self.features.iter().cloned());
        header.push("mean".into());
        let mut t = CsvTable::new(&header)?;
        for &fid in &self.fids {
            let mut row = vec![fid.to_string()];
            row.extend(self.features.iter().map(|f| fmt_opt(self.rate(fid, f))));
            row.push(fmt_opt(self.row_mean(fid)));
            t.row(row)?;
        }
        let mut row = vec!["mean".to_string()];
        row.extend(self.features.iter().map(|f| fmt_opt(self.column_mean(f))));
        row.push(fmt_opt(self.overall_mean()));
        t.row(row)?;
        Ok(t)
    }
}

pub(crate) fn mean_some(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Pairwise KS tests across instances for every `(fid, feature)`, BH
/// corrected per family. `on_family` sees each family before it is reduced.
pub fn ela_dist_analysis(
    table: &FeatureTable,
    features: &[String],
    alpha: f64,
    mut on_family: impl FnMut(u32, &str, &[u32], &PairwiseFamily) -> Result<()>,
) -> Result<ElaDistResult> {
    let fids = table.fids();
    let mut result = ElaDistResult {
        fids: fids.clone(),
        features: features.to_vec(),
        iids: BTreeMap::new(),
        cells: BTreeMap::new(),
    };
    for &fid in &fids {
        let iids = table.iids(fid);
        if iids.len() < 2 {
            continue;
        }
        for feature in features {
            let groups: Vec<Vec<f64>> = iids.iter().map(|&i| table.sample(fid, i, feature)).collect();
            let family = pairwise_tests(&groups, TestMethod::KolmogorovSmirnov, alpha)?;
            on_family(fid, feature, &iids, &family)?;
            let rate = family.summary(RejectionUnit::PerFeature).ok().map(|s| s.rate);
            let per_instance = family.per_group().into_iter().map(|s| s.map(|s| s.rate)).collect();
            result.cells.insert(
                (fid, feature.clone()),
                DistCell {
                    rate,
                    tests: family.tests.len(),
                    failed_pairs: family.failed.len(),
                    per_instance,
                },
            );
        }
        result.iids.insert(fid, iids);
    }
    Ok(result)
}

/// Appends one family to the test export table.
pub(crate) fn family_rows(t: &mut CsvTable, family_id: &str, labels: &[u32], fam: &PairwiseFamily) -> Result<()> {
    for test in &fam.tests {
        t.row([
            family_id.to_string(),
            labels[test.i].to_string(),
            labels[test.j].to_string(),
            fmt_num(test.record.statistic),
            fmt_num(test.record.p_value),
            fmt_num(test.p_adjusted),
            test.rejected.to_string(),
        ])?;
    }
    Ok(())
}

pub(crate) const TEST_EXPORT_COLUMNS: [&str; 7] =
    ["family", "unit_a", "unit_b", "statistic", "p_value", "p_adjusted", "rejected"];

/// Per-instance mean rejection fraction over features.
#[derive(Clone, Debug, PartialEq)]
pub struct ReprRow {
    pub fid: u32,
    pub iid: u32,
    pub mean_rejection_fraction: Option<f64>,
    pub features_used: usize,
    pub features_missing: usize,
}

impl ReprRow {
    pub fn is_first_five(&self) -> bool {
        (1..=5).contains(&self.iid)
    }
}

pub fn repr_rows(dist: &ElaDistResult) -> Vec<ReprRow> {
    let mut out = Vec::new();
    for &fid in &dist.fids {
        let Some(iids) = dist.iids.get(&fid) else { continue };
        for (g, &iid) in iids.iter().enumerate() {
            let vals: Vec<Option<f64>> = dist
                .features
                .iter()
                .filter_map(|f| dist.cells.get(&(fid, f.clone())))
                .map(|c| c.per_instance[g])
                .collect();
            let used = vals.iter().flatten().count();
            out.push(ReprRow {
                fid,
                iid,
                mean_rejection_fraction: mean_some(vals.iter().copied()),
                features_used: used,
                features_missing: vals.len() - used,
            });
        }
    }
    out
}

/// Box-plot summary of one function's per-instance fractions.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub p99: f64,
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return invalid("box statistics of an empty sample");
    }
    let s = sorted_copy(values);
    let q1 = quantile_sorted(&s, 0.25);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let lo = q1 - 1.5 * iqr;
    let hi = q3 + 1.5 * iqr;
    Ok(BoxStats {
        q1,
        median: quantile_sorted(&s, 0.5),
        q3,
        whisker_low: s.iter().copied().find(|&v| v >= lo).unwrap_or(q1),
        whisker_high: s.iter().rev().copied().find(|&v| v <= hi).unwrap_or(q3),
        p99: quantile_sorted(&s, 0.99),
    })
}

pub(crate) fn repr_tables(rows: &[ReprRow]) -> Result<(CsvTable, CsvTable)> {
    let mut inst = CsvTable::new(&[
        "fid",
        "iid",
        "mean_rejection_fraction",
        "is_first_five",
        "features_used",
        "features_missing",
    ])?;
    for r in rows {
        inst.row([
            r.fid.to_string(),
            r.iid.to_string(),
            fmt_opt(r.mean_rejection_fraction),
            r.is_first_five().to_string(),
            r.features_used.to_string(),
            r.features_missing.to_string(),
        ])?;
    }
    let mut boxes = CsvTable::new(&["fid", "q1", "median", "q3", "whisker_low", "whisker_high", "p99"])?;
    let mut fids: Vec<u32> = rows.iter().map(|r| r.fid).collect();
    fids.dedup();
    for fid in fids {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.fid == fid)
            .filter_map(|r| r.mean_rejection_fraction)
            .collect();
        if let Ok(b) = box_stats(&vals) {
            boxes.row([
                fid.to_string(),
                fmt_num(b.q1),
                fmt_num(b.median),
                fmt_num(b.q3),
                fmt_num(b.whisker_low),
                fmt_num(b.whisker_high),
                fmt_num(b.p99),
            ])?;
        }
    }
    Ok((inst, boxes))
}

/// ECDF steps and normality per curve: instances 1 to 5 individually and
/// the remaining instances pooled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcdfCurve {
    pub fid: u32,
    pub feature: String,
    pub curve: String,
    pub steps: Vec<(f64, f64)>,
    pub n: usize,
    pub normality_statistic: Option<f64>,
    pub normality_p: Option<f64>,
    pub note: Option<String>,
}

pub fn ecdf_curves(table: &FeatureTable, fid: u32, feature: &str) -> Vec<EcdfCurve> {
    let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
    let mut rest = Vec::new();
    for iid in table.iids(fid) {
        let s = table.sample(fid, iid, feature);
        if iid <= 5 {
            curves.push((iid.to_string(), s));
        } else {
            rest.extend(s);
        }
    }
    if !rest.is_empty() {
        curves.push(("rest".to_string(), rest));
    }
    curves
        .into_iter()
        .filter(|(_, s)| !s.is_empty())
        .map(|(curve, s)| {
            let (stat, p, note) = match normality_test(&s) {
                Ok(r) => (Some(r.statistic), Some(r.p_value), r.note),
                Err(e) => (None, None, Some(e.to_string())),
            };
            EcdfCurve {
                fid,
                feature: feature.to_string(),
                curve,
                steps: ecdf(&s).unwrap_or_default(),
                n: s.len(),
                normality_statistic: stat,
                normality_p: p,
                note,
            }
        })
        .collect()
}

pub(crate) fn ecdf_tables(curves: &[EcdfCurve], alpha: f64) -> Result<(CsvTable, CsvTable)> {
    let mut steps = CsvTable::new(&["fid", "feature", "curve", "value", "fraction"])?;
    let mut normal = CsvTable::new(&["fid", "feature", "curve", "n", "statistic", "p_value", "normal", "note"])?;
    for c in curves {
        for &(v, f) in &c.steps {
            steps.row([c.fid.to_string(), c.feature.clone(), c.curve.clone(), fmt_num(v), fmt_num(f)])?;
        }
        normal.row([
            c.fid.to_string(),
            c.feature.clone(),
            c.curve.clone(),
            c.n.to_string(),
            fmt_opt(c.normality_statistic),
            fmt_opt(c.normality_p),
            c.normality_p.map(|p| (p >= alpha).to_string()).unwrap_or_default(),
            c.note.clone().unwrap_or_default(),
        ])?;
    }
    Ok((steps, normal))
}
