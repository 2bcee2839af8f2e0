use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use instascope::experiment::{self, ConfigLayer, ExperimentConfig, ExperimentKind, Profile};

/// Instance-variance experiments on the BBOB suite.
#[derive(Debug, Parser)]
#[command(name = "instascope", version)]
struct Cli {
    /// ela-dist, repr, ecdf, perf, optima or avggrid
    experiment: ExperimentKind,

    /// TOML file with ExperimentConfig fields; flags override it
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    profile: Option<Profile>,

    /// Comma-separated function ids
    #[arg(long, value_delimiter = ',')]
    fids: Option<Vec<u32>>,

    /// Number of instances (iids 1..=N)
    #[arg(long)]
    iids: Option<u32>,

    #[arg(long)]
    dim: Option<usize>,

    #[arg(long = "out")]
    output_dir: Option<PathBuf>,

    /// Worker threads, 0 for all cores
    #[arg(long)]
    workers: Option<usize>,

    /// Base seed for designs and optimizer runs
    #[arg(long = "seed")]
    base_seed: Option<u64>,

    /// Print the work accounting and exit
    #[arg(long)]
    dry_run: bool,
}

impl Cli {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            experiment: Some(self.experiment),
            profile: self.profile,
            fids: self.fids.clone(),
            iids: self.iids,
            dim: self.dim,
            output_dir: self.output_dir.clone(),
            workers: self.workers,
            base_seed: self.base_seed,
            ..ConfigLayer::default()
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let file = match &cli.config {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    if file.experiment.is_some_and(|e| e != cli.experiment) {
        log::warn!("experiment in config file overridden by '{}'", cli.experiment.name());
    }
    Ok(ExperimentConfig::from_layer(file.merged(cli.layer()))?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };

    if cli.dry_run {
        println!("experiment {} (config {})", config.experiment.name(), config.hash());
        for (what, count) in experiment::dry_run(&config) {
            println!("{what}: {count}");
        }
        return ExitCode::SUCCESS;
    }

    log::info!(
        "running {} into {} (config {})",
        config.experiment.name(),
        config.output_dir.display(),
        config.hash()
    );
    let outcome = match experiment::run(&config).context("experiment failed") {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    for f in &outcome.files {
        println!("{}", f.display());
    }
    for failure in &outcome.failures {
        log::error!("unit {} failed: {}", failure.unit, failure.error);
    }
    ExitCode::from(outcome.exit_code() as u8)
}
