//! Command-line parsing. Flags override values from `--config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::error::{Error, Result};
use crate::io::{Manifest, Overrides, RunConfig};
use crate::model::TimeUnit;

#[derive(Debug, Parser)]
#[command(name = "jsmix", version, about = "Jolly-Seber mixture models: simulate, fit, compare and diagnose")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a capture history from a scenario.
    Simulate(Common),
    /// Fit one model by MCMC.
    Fit(Common),
    /// Rank fitted models by WAIC.
    Compare {
        /// Fit directories, or directories containing them.
        #[arg(required = true)]
        fits: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// MAP group assignment from a fit.
    Classify {
        fit: PathBuf,
        /// `id,group` file of known labels.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Convergence diagnostics and overlap from saved draws.
    Diagnose {
        fit: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Simulation study over scenarios, replicas and models.
    Experiment(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitArg {
    Day,
    Week,
    Month,
    Year,
}

impl From<UnitArg> for TimeUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Day => TimeUnit::Day,
            UnitArg::Week => TimeUnit::Week,
            UnitArg::Month => TimeUnit::Month,
            UnitArg::Year => TimeUnit::Year,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Capture matrix CSV (`id,t1..tT`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Occasion table CSV (`t,day_offset` or `t,date`).
    #[arg(long)]
    pub occasions: Option<PathBuf>,
    /// Model name (`rpt`, `m1`..`m10`).
    #[arg(long)]
    pub model: Option<String>,
    /// TOML configuration, or a previous `manifest.json`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// MCMC chains.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Iterations per chain, burn-in included.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Discarded warm-up iterations.
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Keep every n-th draw after burn-in.
    #[arg(long)]
    pub thin: Option<usize>,
    /// Master random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// All-zero rows added for data augmentation.
    #[arg(long)]
    pub augment: Option<usize>,
    /// Time unit of survival probabilities.
    #[arg(long, value_enum)]
    pub unit: Option<UnitArg>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Common {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            data: self.data.clone(),
            occasions: self.occasions.clone(),
            model: self.model.clone(),
            chains: self.chains,
            iters: self.iters,
            burnin: self.burnin,
            thin: self.thin,
            seed: self.seed,
            augment: self.augment,
            unit: self.unit.map(TimeUnit::from),
            out: self.out.clone(),
            jobs: self.jobs,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {n} worker threads: {e}")))?
            .install(f),
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<Manifest> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.config()?;
            with_pool(cfg.jobs, || commands::simulate_command(&cfg))
        }
        Command::Fit(c) => {
            let cfg = c.config()?;
            with_pool(cfg.jobs, || commands::fit_command(&cfg))
        }
        Command::Compare { fits, common } => {
            let cfg = common.config()?;
            commands::compare_command(&cfg, &fits)
        }
        Command::Classify { fit, truth, common } => {
            let cfg = common.config()?;
            commands::classify_command(&cfg, &fit, truth.as_deref())
        }
        Command::Diagnose { fit, common } => {
            let cfg = common.config()?;
            commands::diagnose_command(&cfg, &fit)
        }
        Command::Experiment(c) => {
            let cfg = c.config()?;
            with_pool(cfg.jobs, || commands::experiment_command(&cfg))
        }
    }
}
