//! `volpo` command-line pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand};
use volpo_core::RiskClass;

pub mod commands;
pub mod config;
pub mod formats;

pub use config::RunConfig;

static QUIET: AtomicBool = AtomicBool::new(false);

/// Whether progress output is suppressed.
pub fn quiet() -> bool {
    QUIET.load(Ordering::Relaxed)
}

/// Progress line on stdout, silenced by `--quiet`.
macro_rules! say {
    ($($arg:tt)*) => {
        if !$crate::quiet() {
            println!($($arg)*);
        }
    };
}
pub(crate) use say;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<volpo_core::Error> for CliError {
    fn from(e: volpo_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "volpo",
    version,
    about = "Volatility-classified portfolios with PPO allocation"
)]
struct Cli {
    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for all artifacts.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Directory of per-ticker CSVs.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Override any configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align the per-ticker CSVs into the panel cache.
    Ingest {
        #[command(flatten)]
        common: Common,
    },
    /// Fit GARCH per asset on the training window and write the partition.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_top: Option<usize>,
        #[arg(long)]
        k_bottom: Option<usize>,
    },
    /// Train PPO policies for one risk class.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "aggressive|moderate|conservative")]
        class: RiskClass,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        updates: Option<usize>,
    },
    /// Run one model over the test window and write its daily ledger.
    Backtest {
        #[command(flatten)]
        common: Common,
        /// Aggressive-DRL, Moderate-DRL, Conservative-DRL, MVO, Index-proxy or Equal-Weighted.
        #[arg(long)]
        model: String,
    },
    /// Evaluate every model on the test window and write the comparison.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Re-partition the universe every DAYS test days.
        #[arg(long, value_name = "DAYS")]
        reclassify: Option<usize>,
    },
    /// Write synthetic GARCH price CSVs into the data directory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// CSV of `ticker,omega,alpha,beta,drift[,initial_price]`.
        #[arg(long, value_name = "FILE")]
        specs: PathBuf,
        #[arg(long, value_name = "T")]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(data) = &common.data {
        cfg.data_dir = data.clone();
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest { common } => {
            let cfg = load_config(&common)?;
            commands::cmd_ingest(&cfg)?;
        }
        Command::Classify {
            common,
            k_top,
            k_bottom,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.k_top = k_top.unwrap_or(cfg.k_top);
            cfg.k_bottom = k_bottom.unwrap_or(cfg.k_bottom);
            cfg.validate()?;
            commands::cmd_classify(&cfg)?;
        }
        Command::Train {
            common,
            class,
            seeds,
            updates,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.seeds = seeds.unwrap_or(cfg.seeds);
            cfg.ppo.total_updates = updates.unwrap_or(cfg.ppo.total_updates);
            cfg.validate()?;
            commands::cmd_train(&cfg, class)?;
        }
        Command::Backtest { common, model } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            commands::cmd_backtest(&cfg, &model)?;
        }
        Command::Compare { common, reclassify } => {
            let mut cfg = load_config(&common)?;
            cfg.reclassify_days = reclassify.unwrap_or(cfg.reclassify_days);
            cfg.validate()?;
            commands::cmd_compare(&cfg)?;
        }
        Command::Simulate {
            common,
            specs,
            days,
            seed,
        } => {
            let cfg = load_config(&common)?;
            let specs = commands::read_asset_specs(&specs)?;
            commands::cmd_simulate(&cfg, &specs, days, seed)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    QUIET.store(cli.quiet, Ordering::Relaxed);
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["volpo"]), 1);
        assert_eq!(run(["volpo", "train", "--class", "risky"]), 1);
        assert_eq!(run(["volpo", "ingest", "--set", "bogus=1"]), 1);
        assert_eq!(run(["volpo", "--help"]), 0);
    }

    #[test]
    fn error_mapping() {
        let num: CliError = volpo_core::Error::Numerical("x".into()).into();
        let data: CliError = volpo_core::Error::InvalidData("x".into()).into();
        assert_eq!((num.exit_code(), data.exit_code()), (3, 2));
    }
}
