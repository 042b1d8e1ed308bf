//! Command-line flags, the optional TOML config file, and their resolution
//! into concrete run parameters. Flags override the file; the file
//! overrides per-subcommand defaults.

use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use awtc_polar::Strategy;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "awtc", version, about = "Secure polar coding for the adversarial wiretap channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the index partition for one configuration and report rates.
    Construct(RunArgs),
    /// Monte Carlo sweep of the reliability and leakage bounds.
    Bounds(RunArgs),
    /// End-to-end encode, attack and decode sweep for Bob and Eve.
    Simulate(RunArgs),
    /// Re-render SVG charts from an aggregate CSV.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Uniform,
    Bernoulli,
    Prefix,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Uniform => Strategy::Uniform,
            StrategyArg::Bernoulli => Strategy::Bernoulli,
            StrategyArg::Prefix => Strategy::Prefix,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Polarization stages; block length N = 2^n.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<u32>,
    /// Comma-separated list of stages for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u32>>,
    /// Polarization exponent: delta_N = 2^(-N^beta).
    #[arg(long, conflicts_with = "beta_list")]
    pub beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub beta_list: Option<Vec<f64>>,
    /// Writing fraction.
    #[arg(long)]
    pub rho_w: Option<f64>,
    /// Reading fraction.
    #[arg(long)]
    pub rho_r: Option<f64>,
    /// Number of chained blocks T.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Monte Carlo trials per grid cell.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed for all per-trial generators.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Emit SVG charts (default).
    #[arg(long, overrides_with = "no_plot")]
    pub plot: bool,
    #[arg(long, overrides_with = "plot")]
    pub no_plot: bool,
    /// Maximum number of concurrent trials.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// TOML file with any of the above keys (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Aggregate CSV written by `bounds` or `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<u32>,
    pub n_list: Option<Vec<u32>>,
    pub beta: Option<f64>,
    pub beta_list: Option<Vec<f64>>,
    pub rho_w: Option<f64>,
    pub rho_r: Option<f64>,
    pub blocks: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub strategy: Option<StrategyArg>,
    pub out_dir: Option<PathBuf>,
    pub plot: Option<bool>,
    pub parallelism: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Construct,
    Bounds,
    Simulate,
}

struct Defaults {
    stages: &'static [u32],
    betas: &'static [f64],
    blocks: usize,
    trials: usize,
}

impl Mode {
    fn defaults(self) -> Defaults {
        match self {
            Mode::Construct => Defaults {
                stages: &[10],
                betas: &[0.25],
                blocks: 1,
                trials: 1,
            },
            Mode::Bounds => Defaults {
                stages: &[8, 10, 12, 14],
                betas: &[0.20, 0.26, 0.32],
                blocks: 300,
                trials: 200,
            },
            Mode::Simulate => Defaults {
                stages: &[8, 9, 10, 11, 12],
                betas: &[0.22, 0.26, 0.30],
                blocks: 50,
                trials: 20,
            },
        }
    }
}

/// Fully resolved parameters of one run; echoed into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSpec {
    pub command: String,
    pub stages: Vec<u32>,
    pub betas: Vec<f64>,
    pub rho_w: f64,
    pub rho_r: f64,
    pub blocks: usize,
    pub trials: usize,
    pub seed: u64,
    pub strategy: StrategyArg,
    pub out_dir: PathBuf,
    pub plot: bool,
    pub parallelism: usize,
}

fn pick_list<T: Clone>(single: Option<T>, list: Option<Vec<T>>) -> Option<Vec<T>> {
    list.or_else(|| single.map(|v| vec![v]))
}

impl RunSpec {
    pub fn resolve(mode: Mode, args: RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let d = mode.defaults();
        let stages = pick_list(args.n, args.n_list)
            .or_else(|| pick_list(file.n, file.n_list))
            .unwrap_or_else(|| d.stages.to_vec());
        let betas = pick_list(args.beta, args.beta_list)
            .or_else(|| pick_list(file.beta, file.beta_list))
            .unwrap_or_else(|| d.betas.to_vec());
        let plot = if args.no_plot {
            false
        } else if args.plot {
            true
        } else {
            file.plot.unwrap_or(true)
        };
        let default_parallelism = std::thread::available_parallelism().map_or(1, NonZeroUsize::get);
        let spec = RunSpec {
            command: match mode {
                Mode::Construct => "construct",
                Mode::Bounds => "bounds",
                Mode::Simulate => "simulate",
            }
            .to_string(),
            stages,
            betas,
            rho_w: args.rho_w.or(file.rho_w).unwrap_or(0.2),
            rho_r: args.rho_r.or(file.rho_r).unwrap_or(0.4),
            blocks: args.blocks.or(file.blocks).unwrap_or(d.blocks),
            trials: args.trials.or(file.trials).unwrap_or(d.trials),
            seed: args.seed.or(file.seed).unwrap_or(1),
            strategy: args.strategy.or(file.strategy).unwrap_or(StrategyArg::Uniform),
            out_dir: args.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("out")),
            plot,
            parallelism: args.parallelism.or(file.parallelism).unwrap_or(default_parallelism),
        };
        spec.validate(mode)?;
        Ok(spec)
    }

    fn validate(&self, mode: Mode) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        if self.stages.is_empty() || self.betas.is_empty() {
            return fail("n and beta lists must be non-empty".into());
        }
        if mode == Mode::Construct && (self.stages.len() > 1 || self.betas.len() > 1) {
            return fail("construct takes a single --n and --beta".into());
        }
        if self.trials == 0 {
            return fail("--trials must be at least 1".into());
        }
        if self.parallelism == 0 {
            return fail("--parallelism must be at least 1".into());
        }
        for &n in &self.stages {
            for &beta in &self.betas {
                awtc_polar::CodeConfig::new(n, beta, self.rho_w, self.rho_r, self.blocks)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
            }
        }
        Ok(())
    }
}
