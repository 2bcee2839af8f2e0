use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::ela::catalogue;
use crate::error::{Error, Result};
use crate::optim::{checkpoints, Algorithm};
use crate::suite::MAX_FID;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ElaDist,
    Repr,
    Ecdf,
    Perf,
    Optima,
    Avggrid,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::ElaDist,
        ExperimentKind::Repr,
        ExperimentKind::Ecdf,
        ExperimentKind::Perf,
        ExperimentKind::Optima,
        ExperimentKind::Avggrid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ElaDist => "ela-dist",
            ExperimentKind::Repr => "repr",
            ExperimentKind::Ecdf => "ecdf",
            ExperimentKind::Perf => "perf",
            ExperimentKind::Optima => "optima",
            ExperimentKind::Avggrid => "avggrid",
        }
    }

    /// Whether the experiment works from ELA feature vectors.
    pub fn uses_features(&self) -> bool {
        matches!(self, ExperimentKind::ElaDist | ExperimentKind::Repr | ExperimentKind::Ecdf)
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Full study scale.
    #[default]
    Paper,
    /// Laptop scale: 50 instances, 30 designs of 250 points, 30 runs of 1000 evaluations.
    Desk,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            _ => Err(Error::Config(format!("unknown profile '{s}' (expected desk or paper)"))),
        }
    }
}

pub const DESK_FIDS: [u32; 8] = [1, 2, 3, 5, 8, 12, 17, 21];

/// Settings layer as read from a config file or command line. Unset fields
/// fall through to the next layer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub experiment: Option<ExperimentKind>,
    pub profile: Option<Profile>,
    pub fids: Option<Vec<u32>>,
    pub iids: Option<u32>,
    pub dim: Option<usize>,
    pub doe_count: Option<usize>,
    pub doe_size: Option<usize>,
    pub runs: Option<u32>,
    pub budget: Option<usize>,
    pub perf_budgets: Option<Vec<usize>>,
    pub algorithms: Option<Vec<String>>,
    pub alpha: Option<f64>,
    pub base_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub grid_resolution: Option<usize>,
    pub ecdf_features: Option<Vec<String>>,
    pub export_tests: Option<bool>,
}

impl ConfigLayer {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// `other` wins wherever it is set.
    pub fn merged(self, other: ConfigLayer) -> ConfigLayer {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigLayer { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            experiment, profile, fids, iids, dim, doe_count, doe_size, runs, budget, perf_budgets,
            algorithms, alpha, base_seed, output_dir, workers, grid_resolution, ecdf_features,
            export_tests
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub profile: Profile,
    pub fids: Vec<u32>,
    pub iids: u32,
    pub dim: usize,
    pub doe_count: usize,
    pub doe_size: usize,
    pub runs: u32,
    pub budget: usize,
    pub perf_budgets: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub alpha: f64,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    pub grid_resolution: usize,
    pub ecdf_features: Vec<String>,
    /// Also write every pairwise test record.
    pub export_tests: bool,
}

impl ExperimentConfig {
    /// Built-in defaults for a profile.
    pub fn preset(experiment: ExperimentKind, profile: Profile) -> Self {
        let dim = if experiment.uses_features() { 5 } else { 2 };
        let mut c = ExperimentConfig {
            experiment,
            profile,
            fids: (1..=MAX_FID).collect(),
            iids: 500,
            dim,
            doe_count: 100,
            doe_size: 1000,
            runs: 50,
            budget: 10_000,
            perf_budgets: vec![1_000, 10_000],
            algorithms: Algorithm::ALL.to_vec(),
            alpha: crate::stats::DEFAULT_ALPHA,
            base_seed: 1,
            output_dir: PathBuf::from("results"),
            workers: 0,
            grid_resolution: 101,
            ecdf_features: vec![
                "ela_meta.lin_simple.intercept".to_string(),
                "ela_distr.kurtosis".to_string(),
            ],
            export_tests: false,
        };
        if profile == Profile::Desk {
            c.fids = DESK_FIDS.to_vec();
            c.iids = 50;
            c.doe_count = 30;
            c.doe_size = 250;
            c.runs = 30;
            c.budget = 1_000;
            c.perf_budgets = vec![100, 1_000];
        }
        c
    }

    /// Resolves a layered configuration. The profile comes from the layer
    /// (or defaults to paper); the experiment must be set.
    pub fn from_layer(layer: ConfigLayer) -> Result<Self> {
        let experiment = layer
            .experiment
            .ok_or_else(|| Error::Config("no experiment given".into()))?;
        let mut c = Self::preset(experiment, layer.profile.unwrap_or_default());
        macro_rules! apply {
            ($($f:ident),*) => { $(if let Some(v) = layer.$f { c.$f = v; })* };
        }
        apply!(
            fids, iids, dim, doe_count, doe_size, runs, budget, perf_budgets, alpha, base_seed,
            output_dir, workers, grid_resolution, ecdf_features, export_tests
        );
        if let Some(names) = layer.algorithms {
            c.algorithms = names
                .iter()
                .map(|n| n.parse::<Algorithm>().map_err(|e| Error::Config(e.to_string())))
                .collect::<Result<_>>()?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.fids.is_empty() {
            return fail("fids must not be empty".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for &f in &self.fids {
            if !(1..=MAX_FID).contains(&f) {
                return fail(format!("fid {f} outside 1..={MAX_FID}"));
            }
            if !seen.insert(f) {
                return fail(format!("fid {f} listed twice"));
            }
        }
        if self.iids < 2 {
            return fail("iids must be at least 2 to compare instances".into());
        }
        if self.dim < 2 {
            return fail(format!("dim must be at least 2, got {}", self.dim));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        match self.experiment {
            ExperimentKind::ElaDist | ExperimentKind::Repr | ExperimentKind::Ecdf => {
                if self.doe_count < 5 {
                    return fail("doe_count must be at least 5 for two-sample tests".into());
                }
                if self.doe_size < 10 {
                    return fail("doe_size must be at least 10".into());
                }
                let cat = catalogue();
                if let Some(bad) = self.ecdf_features.iter().find(|f| !cat.contains(f)) {
                    return fail(format!("unknown feature '{bad}' in ecdf_features"));
                }
            }
            ExperimentKind::Perf => {
                if self.algorithms.is_empty() {
                    return fail("algorithms must not be empty".into());
                }
                if self.runs < 1 || self.budget < 2 {
                    return fail("perf needs runs >= 1 and budget >= 2".into());
                }
                let grid = checkpoints(self.budget);
                if self.perf_budgets.is_empty() {
                    return fail("perf_budgets must not be empty".into());
                }
                if let Some(b) = self.perf_budgets.iter().find(|b| !grid.contains(b)) {
                    return fail(format!(
                        "perf budget {b} is not a checkpoint of budget {} (1, 2, 5 x 10^k or the budget)",
                        self.budget
                    ));
                }
            }
            ExperimentKind::Avggrid => {
                if self.dim != 2 {
                    return fail(format!("avggrid needs dim = 2, got {}", self.dim));
                }
                if self.grid_resolution < 2 {
                    return fail("grid_resolution must be at least 2".into());
                }
            }
            ExperimentKind::Optima => {}
        }
        Ok(())
    }

    /// Hash of every setting that influences results. Output location and
    /// worker count are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.workers = 0;
        let json = serde_json::to_vec(&c).expect("config serialises");
        hex::encode(Sha256::digest(&json))[..16].to_string()
    }

    pub fn iid_list(&self) -> Vec<u32> {
        (1..=self.iids).collect()
    }

    /// Design seeds, consecutive from `base_seed`.
    pub fn doe_seeds(&self) -> Vec<u64> {
        (0..self.doe_count as u64).map(|k| self.base_seed + k).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layers_override_in_order() {
        let file = ConfigLayer::from_toml_str(
            "experiment = \"perf\"\nprofile = \"desk\"\niids = 7\nalgorithms = [\"rs\", \"SPSA\"]\n",
        )
        .unwrap();
        let cli = ConfigLayer {
            iids: Some(9),
            ..Default::default()
        };
        let c = ExperimentConfig::from_layer(file.merged(cli)).unwrap();
        assert_eq!(c.iids, 9);
        assert_eq!(c.runs, 30);
        assert_eq!(c.dim, 2);
        assert_eq!(c.algorithms, vec![Algorithm::RandomSearch, Algorithm::Spsa]);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(ConfigLayer::from_toml_str("bogus = 1").is_err());
        let base = || ConfigLayer {
            experiment: Some(ExperimentKind::Perf),
            profile: Some(Profile::Desk),
            ..Default::default()
        };
        let bad = [
            ConfigLayer { fids: Some(vec![25]), ..base() },
            ConfigLayer { fids: Some(vec![1, 1]), ..base() },
            ConfigLayer { iids: Some(1), ..base() },
            ConfigLayer { alpha: Some(1.5), ..base() },
            ConfigLayer { perf_budgets: Some(vec![300]), ..base() },
            ConfigLayer { algorithms: Some(vec!["cma".into()]), ..base() },
            ConfigLayer {
                experiment: Some(ExperimentKind::Avggrid),
                dim: Some(3),
                ..base()
            },
        ];
        for layer in bad {
            assert!(matches!(ExperimentConfig::from_layer(layer), Err(Error::Config(_))));
        }
    }

    #[test]
    fn paper_defaults() {
        let c = ExperimentConfig::preset(ExperimentKind::ElaDist, Profile::Paper);
        assert_eq!((c.iids, c.doe_count, c.doe_size, c.runs, c.budget), (500, 100, 1000, 50, 10_000));
        assert_eq!(c.fids.len(), 24);
        assert_eq!(c.doe_seeds(), (1..=100).collect::<Vec<u64>>());
    }

    #[test]
    fn hash_ignores_location_and_workers() {
        let a = ExperimentConfig::preset(ExperimentKind::Perf, Profile::Desk);
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        b.workers = 3;
        assert_eq!(a.hash(), b.hash());
        b.runs = 2;
        assert_ne!(a.hash(), b.hash());
    }
}
