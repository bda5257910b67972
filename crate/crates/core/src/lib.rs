//! Volatility-guided portfolio allocation.
//!
//! The pipeline fits a GARCH(1,1) model per asset, ranks assets by forecast
//! volatility into aggressive / moderate / conservative universes, and trains
//! a PPO allocation policy on each universe. Every strategy, learned or not,
//! is backtested through the same [`portfolio_env`] so that costs and wealth
//! accounting are identical across the comparison.

// Negated comparisons are how NaN gets rejected; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod benchmarks;
pub mod error;
pub mod garch;
pub mod market_data;
pub mod metrics;
pub mod policy_core;
pub mod portfolio_env;
pub mod ppo_agent;

mod linalg;
mod optim;

pub use error::{Error, Result};
pub use garch::{GarchFit, GarchParams, RiskClass, UniversePartition, VolatilityScore};
pub use market_data::{FeatureSet, PricePanel, PriceSeries, ReturnPanel};
pub use metrics::MetricSet;
pub use policy_core::{ApproximatorSpec, ParameterVector, PolicyOutput};
pub use portfolio_env::{EnvConfig, EnvState, EpisodeLedger, PortfolioEnv, StepResult};
pub use ppo_agent::{PpoConfig, TrainReport};

/// Trading days per year used for every annualization.
pub const TRADING_DAYS: f64 = 252.0;
