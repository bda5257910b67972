//! Run configuration: a flat `key = value` file layered over built-in
//! defaults, then command-line overrides. `#` starts a comment.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use volpo_core::benchmarks::MvoConfig;
use volpo_core::garch::DEFAULT_HORIZON;
use volpo_core::market_data::{IndicatorConfig, DATE_FORMAT};
use volpo_core::{EnvConfig, PpoConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Directory of per-ticker CSVs read by `ingest` and written by `simulate`.
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    pub k_top: usize,
    pub k_bottom: usize,
    /// GARCH forecast horizon in days.
    pub horizon: usize,
    pub seeds: usize,
    /// Seed `i` trains with `base_seed + i`.
    pub base_seed: u64,
    /// Re-partition the universe every this many test days; 0 keeps one split.
    pub reclassify_days: usize,
    /// Random-search trials before training; 0 trains with the PPO fields as given.
    pub search_trials: usize,
    /// Annual risk-free rate for the Sharpe ratio, as a fraction.
    pub risk_free_rate: f64,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub mvo: MvoConfig,
    pub indicators: IndicatorConfig,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            train_start: date(2010, 1, 1),
            train_end: date(2022, 12, 31),
            test_start: date(2023, 1, 1),
            test_end: date(2024, 12, 31),
            k_top: 10,
            k_bottom: 10,
            horizon: DEFAULT_HORIZON,
            seeds: 5,
            base_seed: 0,
            reclassify_days: 0,
            search_trials: 0,
            risk_free_rate: 0.0,
            env: EnvConfig::default(),
            ppo: PpoConfig::default(),
            mvo: MvoConfig::default(),
            indicators: IndicatorConfig::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| CliError::Usage(format!("{key}: cannot parse `{value}`: {e}")))
}

fn parse_date(key: &str, value: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(value, DATE_FORMAT)
        .map_err(|e| CliError::Usage(format!("{key}: bad date `{value}`: {e}")))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected `key = value`", no + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Usage(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "data_dir" => self.data_dir = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "train_start" => self.train_start = parse_date(key, value)?,
            "train_end" => self.train_end = parse_date(key, value)?,
            "test_start" => self.test_start = parse_date(key, value)?,
            "test_end" => self.test_end = parse_date(key, value)?,
            "k_top" => self.k_top = parse(key, value)?,
            "k_bottom" => self.k_bottom = parse(key, value)?,
            "horizon" => self.horizon = parse(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "base_seed" => self.base_seed = parse(key, value)?,
            "reclassify_days" => self.reclassify_days = parse(key, value)?,
            "search_trials" => self.search_trials = parse(key, value)?,
            "risk_free_rate" => self.risk_free_rate = parse(key, value)?,

            "initial_capital" => self.env.initial_capital = parse(key, value)?,
            "cost_rate" => self.env.cost_rate = parse(key, value)?,
            "lookback" => self.env.lookback = parse(key, value)?,
            "reward_scale" => self.env.reward_scale = parse(key, value)?,
            "log_reward" => self.env.log_reward = parse(key, value)?,

            "gamma" => self.ppo.gamma = parse(key, value)?,
            "lambda" => self.ppo.lambda = parse(key, value)?,
            "clip_eps" => self.ppo.clip_eps = parse(key, value)?,
            "epochs_per_update" => self.ppo.epochs_per_update = parse(key, value)?,
            "minibatch_size" => self.ppo.minibatch_size = parse(key, value)?,
            "learning_rate" => self.ppo.learning_rate = parse(key, value)?,
            "entropy_coef" => self.ppo.entropy_coef = parse(key, value)?,
            "value_coef" => self.ppo.value_coef = parse(key, value)?,
            "rollout_length" => self.ppo.rollout_length = parse(key, value)?,
            "total_updates" => self.ppo.total_updates = parse(key, value)?,
            "normalize_advantages" => self.ppo.normalize_advantages = parse(key, value)?,
            "max_grad_norm" => self.ppo.max_grad_norm = parse(key, value)?,
            "hidden" => {
                self.ppo.hidden = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<_, _>>()?
            }

            "mvo_window" => self.mvo.window = parse(key, value)?,
            "mvo_rebalance_every" => self.mvo.rebalance_every = parse(key, value)?,
            "mvo_kappa" => self.mvo.kappa = parse(key, value)?,
            "mvo_iterations" => self.mvo.iterations = parse(key, value)?,

            "macd_fast" => self.indicators.macd_fast = parse(key, value)?,
            "macd_slow" => self.indicators.macd_slow = parse(key, value)?,
            "rsi_period" => self.indicators.rsi_period = parse(key, value)?,
            "sma_short" => self.indicators.sma_short = parse(key, value)?,
            "sma_long" => self.indicators.sma_long = parse(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.train_start > self.train_end || self.test_start > self.test_end {
            return usage("window start must not be after its end");
        }
        if self.train_end >= self.test_start {
            return usage("train_end must be before test_start");
        }
        if self.seeds == 0 {
            return usage("seeds must be >= 1");
        }
        if self.horizon == 0 {
            return usage("horizon must be >= 1");
        }
        self.env
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        self.ppo
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(())
    }

    pub fn seed_for(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    pub fn ppo_for(&self, index: usize) -> PpoConfig {
        PpoConfig {
            seed: self.seed_for(index),
            ..self.ppo.clone()
        }
    }
}
