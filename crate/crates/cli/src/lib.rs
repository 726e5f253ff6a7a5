//! Argument parsing for the `bfselect` binary.
//!
//! Values are resolved in order: built-in defaults, then `--config FILE`,
//! then explicit flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bfselect_core::experiments::config::{
    load_random_fn, load_rbf_demo, ExperimentConfig, NlpdTarget, RandomFnConfig, RbfDemoConfig,
    EXTENDED_LD_LIST,
};
use bfselect_core::experiments::{output, run_random_fn, run_rbf_demo};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "bfselect",
    version,
    about = "Adaptive basis function selection experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 1-D RBF regression, pruned to the functions relevant on a subdomain.
    RbfDemo(RbfDemoArgs),
    /// 3-D random-function sweep over HGP sizes and retained fractions.
    RandomFn(RandomFnArgs),
}

#[derive(Debug, Args)]
pub struct RbfDemoArgs {
    /// TOML file with any subset of the configuration keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub num_bfs: Option<usize>,
    #[arg(long)]
    pub n_select: Option<usize>,
    /// Prediction subdomain as `lower,upper`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub omega: Option<Vec<f64>>,
    #[arg(long, default_value = "out/rbf-demo")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RandomFnArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub lengthscale: Option<f64>,
    #[arg(long)]
    pub kernel_var: Option<f64>,
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Modes per dimension, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "extended")]
    pub ld_list: Option<Vec<usize>>,
    /// Sweep modes per dimension up to 20 (L = 8000).
    #[arg(long)]
    pub extended: bool,
    /// Retained fractions in (0, 1], comma-separated.
    #[arg(long, alias = "rho", value_delimiter = ',')]
    pub rho_list: Option<Vec<f64>>,
    #[arg(long)]
    pub nlpd_target: Option<NlpdTarget>,
    /// Timed repetitions per prediction; the median is reported.
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub memory_budget_mb: Option<u64>,
    #[arg(long, default_value = "out/random-fn")]
    pub out: PathBuf,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl RbfDemoArgs {
    pub fn resolve(&self) -> Result<RbfDemoConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                load_rbf_demo(path).with_context(|| format!("reading {}", path.display()))?
            }
            None => RbfDemoConfig::default(),
        };
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.num_bfs, self.num_bfs);
        set(&mut cfg.n_select, self.n_select);
        if let Some(o) = &self.omega {
            let [lo, hi] = o[..] else {
                anyhow::bail!("--omega takes exactly two values, got {}", o.len());
            };
            cfg.omega = [lo, hi];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RandomFnArgs {
    pub fn resolve(&self) -> Result<RandomFnConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                load_random_fn(path).with_context(|| format!("reading {}", path.display()))?
            }
            None => RandomFnConfig::default(),
        };
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.n_train, self.n_train);
        set(&mut cfg.lengthscale, self.lengthscale);
        set(&mut cfg.kernel_var, self.kernel_var);
        set(&mut cfg.noise_var, self.noise_var);
        set(&mut cfg.ld_list, self.ld_list.clone());
        if self.extended {
            cfg.ld_list = EXTENDED_LD_LIST.to_vec();
        }
        set(&mut cfg.rho_list, self.rho_list.clone());
        set(&mut cfg.nlpd_target, self.nlpd_target);
        set(&mut cfg.repetitions, self.repetitions);
        set(&mut cfg.memory_budget_mb, self.memory_budget_mb);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Resolved configuration and output directory of a command line.
pub fn parse_config<I, T>(argv: I) -> Result<(ExperimentConfig, PathBuf)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(match cli.command {
        Command::RbfDemo(a) => (ExperimentConfig::RbfDemo(a.resolve()?), a.out),
        Command::RandomFn(a) => (ExperimentConfig::RandomFn(a.resolve()?), a.out),
    })
}

/// Runs the experiment and writes its files into `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let paths = match config {
        ExperimentConfig::RbfDemo(c) => {
            let result = run_rbf_demo(c)?;
            output::write_rbf_demo(out, config, &result)?
        }
        ExperimentConfig::RandomFn(c) => {
            let result = run_random_fn(c)?;
            output::write_random_fn(out, config, &result)?
        }
    };
    Ok(paths)
}
