//! Daily-rebalancing market simulator shared by the learned policy and every
//! benchmark.
//!
//! At day `t` the portfolio holds the previous target weights drifted by the
//! day's price moves. A step picks new target weights `w'`, pays
//! `cost_rate * sum|w' - w_drift| * wealth`, then grows by
//! `sum_i w'_i * p[t+1,i] / p[t,i]`. There is no cash asset, no shorting and
//! no leverage.
//!
//! Observation layout at day `t`, episode start `s`:
//!
//! | block | length | content |
//! |---|---|---|
//! | prices | n | `p[t,i] / p[s,i]` |
//! | covariance | n(n+1)/2 | lower triangle, row-major, of the annualized (x252) trailing covariance of log returns |
//! | indicators | 4n | per asset: MACD / close, RSI / 100, close / SMA short, close / SMA long |
//! | weights | n | current drifted weights |

use std::io::Write;

use chrono::NaiveDate;

use crate::error::{check_dim, Error, Result};
use crate::market_data::{self, FeatureSet, PricePanel, ReturnPanel, DATE_FORMAT};
use crate::TRADING_DAYS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub initial_capital: f64,
    /// Fraction of traded notional paid per trade.
    pub cost_rate: f64,
    /// Trailing days used for the covariance observation.
    pub lookback: usize,
    pub reward_scale: f64,
    /// Use `ln(W'/W)` instead of the simple net return as reward.
    pub log_reward: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            initial_capital: 1_000_000.0,
            cost_rate: 0.0005,
            lookback: 60,
            reward_scale: 1.0,
            log_reward: false,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_capital > 0.0 && self.initial_capital.is_finite()) {
            return Err(Error::InvalidParameter(
                "initial capital must be > 0".into(),
            ));
        }
        // turnover can reach 2, so anything at or above one half can wipe out wealth
        if !(self.cost_rate >= 0.0 && self.cost_rate < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "cost rate must lie in [0, 0.5), got {}",
                self.cost_rate
            )));
        }
        if self.lookback < 2 {
            return Err(Error::InvalidParameter("lookback must be >= 2".into()));
        }
        if !self.reward_scale.is_finite() {
            return Err(Error::InvalidParameter(
                "reward scale must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Unconstrained policy output, mapped to weights by [`action_to_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct ActionVector(pub Vec<f64>);

/// Softmax, shifted by the max entry.
pub fn action_to_weights(action: &ActionVector) -> Result<Vec<f64>> {
    let a = &action.0;
    if a.is_empty() || a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidData(
            "action must be non-empty and finite".into(),
        ));
    }
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = a.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub t: usize,
    /// Episode start; prices in the observation are relative to this day.
    pub start: usize,
    /// Final day of the episode.
    pub end: usize,
    pub wealth: f64,
    /// Current holdings as fractions of wealth, drifted to day `t`.
    pub weights: Vec<f64>,
    pub observation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next: EnvState,
    pub reward: f64,
    pub net_return: f64,
    pub cost_paid: f64,
    /// Weights traded into at day `t`.
    pub target_weights: Vec<f64>,
    pub done: bool,
}

pub struct PortfolioEnv<'a> {
    panel: &'a PricePanel,
    features: &'a FeatureSet,
    returns: ReturnPanel,
    cfg: EnvConfig,
}

impl<'a> PortfolioEnv<'a> {
    pub fn new(panel: &'a PricePanel, features: &'a FeatureSet, cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        if features.tickers != panel.tickers() || features.dates != panel.dates() {
            return Err(Error::InvalidData(
                "features are not aligned with the price panel".into(),
            ));
        }
        Ok(Self {
            panel,
            features,
            returns: market_data::log_returns(panel)?,
            cfg,
        })
    }

    pub fn panel(&self) -> &PricePanel {
        self.panel
    }

    pub fn returns(&self) -> &ReturnPanel {
        &self.returns
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn n_assets(&self) -> usize {
        self.panel.n_assets()
    }

    /// First day an episode may start on.
    pub fn warmup(&self) -> usize {
        self.cfg.lookback.max(self.features.warmup)
    }

    pub fn observation_dim(&self) -> usize {
        observation_dim(self.n_assets())
    }

    pub fn reset(&self, start: usize, end: usize) -> Result<EnvState> {
        let n = self.n_assets();
        self.reset_with(
            start,
            end,
            self.cfg.initial_capital,
            vec![1.0 / n as f64; n],
        )
    }

    /// Starts an episode from an explicit wealth and holding.
    pub fn reset_with(
        &self,
        start: usize,
        end: usize,
        wealth: f64,
        weights: Vec<f64>,
    ) -> Result<EnvState> {
        if start < self.warmup() {
            return Err(Error::InsufficientData(format!(
                "episode start {start} is inside the warm-up of {} days",
                self.warmup()
            )));
        }
        if end <= start || end >= self.panel.len() {
            return Err(Error::InvalidParameter(format!(
                "episode window [{start}, {end}] invalid for {} days",
                self.panel.len()
            )));
        }
        if !(wealth > 0.0 && wealth.is_finite()) {
            return Err(Error::InvalidParameter("wealth must be > 0".into()));
        }
        check_simplex(&weights, self.n_assets())?;
        let observation = self.observation(start, start, &weights)?;
        Ok(EnvState {
            t: start,
            start,
            end,
            wealth,
            weights,
            observation,
        })
    }

    pub fn observation(&self, t: usize, start: usize, weights: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_assets();
        let mut obs = Vec::with_capacity(self.observation_dim());
        obs.extend((0..n).map(|i| self.panel.price(t, i) / self.panel.price(start, i)));
        let cov = market_data::covariance_window(&self.returns, t, self.cfg.lookback)?;
        obs.extend(cov.lower_triangle().into_iter().map(|c| c * TRADING_DAYS));
        for i in 0..n {
            let f = self.features.at(t, i);
            let close = self.panel.price(t, i);
            obs.extend([
                f.macd / close,
                f.rsi / 100.0,
                f.sma_ratio_short,
                f.sma_ratio_long,
            ]);
        }
        obs.extend_from_slice(weights);
        if obs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite observation at day {t}"
            )));
        }
        Ok(obs)
    }

    pub fn step(&self, state: &EnvState, action: &ActionVector) -> Result<StepResult> {
        check_dim(self.n_assets(), action.0.len())?;
        let target = action_to_weights(action)?;
        self.step_weights(state, &target)
    }

    /// One trading day: trade into `target` at day `t`, hold to `t + 1`.
    pub fn step_weights(&self, state: &EnvState, target: &[f64]) -> Result<StepResult> {
        let n = self.n_assets();
        check_simplex(target, n)?;
        let t = state.t;
        if t >= state.end || state.end >= self.panel.len() {
            return Err(Error::InvalidParameter(format!(
                "day {t} is past the episode end {}",
                state.end
            )));
        }
        let turnover: f64 = target
            .iter()
            .zip(&state.weights)
            .map(|(a, b)| (a - b).abs())
            .sum();
        let cost_paid = self.cfg.cost_rate * turnover * state.wealth;
        let relative: Vec<f64> = (0..n)
            .map(|i| self.panel.price(t + 1, i) / self.panel.price(t, i))
            .collect();
        let growth: f64 = target.iter().zip(&relative).map(|(w, r)| w * r).sum();
        let wealth = (state.wealth - cost_paid) * growth;
        if !(wealth > 0.0 && wealth.is_finite()) {
            return Err(Error::Numerical(format!(
                "wealth became {wealth} at day {t}"
            )));
        }
        let net_return = (wealth - state.wealth) / state.wealth;
        let reward = if self.cfg.log_reward {
            (wealth / state.wealth).ln()
        } else {
            net_return
        } * self.cfg.reward_scale;
        let drifted: Vec<f64> = target
            .iter()
            .zip(&relative)
            .map(|(w, r)| w * r / growth)
            .collect();
        let observation = self.observation(t + 1, state.start, &drifted)?;
        Ok(StepResult {
            next: EnvState {
                t: t + 1,
                start: state.start,
                end: state.end,
                wealth,
                weights: drifted,
                observation,
            },
            reward,
            net_return,
            cost_paid,
            target_weights: target.to_vec(),
            done: t + 1 == state.end,
        })
    }
}

pub fn observation_dim(n: usize) -> usize {
    n * (n + 1) / 2 + 6 * n
}

fn check_simplex(w: &[f64], n: usize) -> Result<()> {
    check_dim(n, w.len())?;
    let sum: f64 = w.iter().sum();
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidData(format!(
            "weights are not on the simplex (sum {sum})"
        )));
    }
    Ok(())
}

/// Decides target weights at each day of an episode.
pub trait WeightRule {
    fn target_weights(&mut self, env: &PortfolioEnv<'_>, state: &EnvState) -> Result<Vec<f64>>;
}

impl<F> WeightRule for F
where
    F: FnMut(&PortfolioEnv<'_>, &EnvState) -> Result<Vec<f64>>,
{
    fn target_weights(&mut self, env: &PortfolioEnv<'_>, state: &EnvState) -> Result<Vec<f64>> {
        self(env, state)
    }
}

/// Daily record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLedger {
    pub tickers: Vec<String>,
    /// Days `start ..= end`.
    pub dates: Vec<NaiveDate>,
    /// Wealth at each date; `wealth[0]` is the starting wealth.
    pub wealth: Vec<f64>,
    /// Target weights traded into on `dates[k]`, one row per step.
    pub weights: Vec<Vec<f64>>,
    pub net_returns: Vec<f64>,
    pub costs: Vec<f64>,
    pub total_cost: f64,
    pub initial_capital: f64,
    pub cost_rate: f64,
}

impl EpisodeLedger {
    fn start(env: &PortfolioEnv<'_>, state: &EnvState) -> Self {
        Self {
            tickers: env.panel.tickers().to_vec(),
            dates: vec![env.panel.dates()[state.t]],
            wealth: vec![state.wealth],
            weights: Vec::new(),
            net_returns: Vec::new(),
            costs: Vec::new(),
            total_cost: 0.0,
            initial_capital: state.wealth,
            cost_rate: env.cfg.cost_rate,
        }
    }

    fn record(&mut self, env: &PortfolioEnv<'_>, step: &StepResult) {
        self.dates.push(env.panel.dates()[step.next.t]);
        self.wealth.push(step.next.wealth);
        self.weights.push(step.target_weights.clone());
        self.net_returns.push(step.net_return);
        self.costs.push(step.cost_paid);
        self.total_cost += step.cost_paid;
    }

    /// Number of daily steps.
    pub fn days(&self) -> usize {
        self.net_returns.len()
    }

    pub fn terminal_wealth(&self) -> f64 {
        *self.wealth.last().expect("ledger always holds the start")
    }

    /// `100 * (W_t / W_0 - 1)` for every date.
    pub fn cumulative_return_pct(&self) -> Vec<f64> {
        let w0 = self.wealth[0];
        self.wealth.iter().map(|w| 100.0 * (w / w0 - 1.0)).collect()
    }

    /// Appends `next`, which must start on this ledger's final date.
    /// `transition_cost` is charged at the junction and folded into the first
    /// step of `next` so the wealth identity keeps holding.
    pub fn extend(&mut self, next: &EpisodeLedger, transition_cost: f64) -> Result<()> {
        if next.dates.first() != self.dates.last() {
            return Err(Error::InvalidData(
                "ledgers do not join on a common date".into(),
            ));
        }
        let mut prev = self.terminal_wealth();
        for k in 0..next.days() {
            let w = next.wealth[k + 1];
            let cost = next.costs[k] + if k == 0 { transition_cost } else { 0.0 };
            self.dates.push(next.dates[k + 1]);
            self.wealth.push(w);
            self.net_returns.push((w - prev) / prev);
            self.costs.push(cost);
            self.total_cost += cost;
            prev = w;
        }
        self.weights.extend(next.weights.iter().cloned());
        Ok(())
    }

    /// `date,wealth,net_return,cost_paid`; the first row is the start.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::InvalidData(e.to_string());
        w.write_record(["date", "wealth", "net_return", "cost_paid"])
            .map_err(wrap)?;
        for (k, d) in self.dates.iter().enumerate() {
            let (r, c) = if k == 0 {
                (0.0, 0.0)
            } else {
                (self.net_returns[k - 1], self.costs[k - 1])
            };
            w.write_record([
                d.format(DATE_FORMAT).to_string(),
                self.wealth[k].to_string(),
                r.to_string(),
                c.to_string(),
            ])
            .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io("<writer>", e))
    }

    /// `date,<TICKER>...`, one row per trade date.
    pub fn write_weights_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::InvalidData(e.to_string());
        let mut header = vec!["date".to_string()];
        header.extend(self.tickers.iter().cloned());
        w.write_record(&header).map_err(wrap)?;
        for (d, row) in self.dates.iter().zip(&self.weights) {
            let mut rec = vec![d.format(DATE_FORMAT).to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io("<writer>", e))
    }
}

/// Runs `rule` over days `start ..= end` from a fresh [`PortfolioEnv::reset`].
pub fn run_episode(
    env: &PortfolioEnv<'_>,
    rule: &mut dyn WeightRule,
    start: usize,
    end: usize,
) -> Result<EpisodeLedger> {
    let state = env.reset(start, end)?;
    run_from(env, rule, state)
}

/// Runs `rule` from an arbitrary state until the episode ends.
pub fn run_from(
    env: &PortfolioEnv<'_>,
    rule: &mut dyn WeightRule,
    mut state: EnvState,
) -> Result<EpisodeLedger> {
    let mut ledger = EpisodeLedger::start(env, &state);
    loop {
        let target = rule.target_weights(env, &state)?;
        let step = env.step_weights(&state, &target)?;
        ledger.record(env, &step);
        let done = step.done;
        state = step.next;
        if done {
            return Ok(ledger);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{business_days, compute_indicators, IndicatorConfig};
    use proptest::prelude::*;

    pub(crate) fn panel_from(cols: &[Vec<f64>]) -> PricePanel {
        let t = cols[0].len();
        let tickers = (0..cols.len()).map(|i| format!("A{i:02}")).collect();
        let prices = (0..t)
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect();
        PricePanel::new(tickers, business_days(t), prices).unwrap()
    }

    fn wiggle(t: usize, seed: f64, drift: f64) -> Vec<f64> {
        (0..t)
            .map(|k| 100.0 * (drift * k as f64 + 0.02 * (seed * k as f64).sin()).exp())
            .collect()
    }

    fn features(p: &PricePanel) -> FeatureSet {
        compute_indicators(p, &IndicatorConfig::default()).unwrap()
    }

    fn zero_cost() -> EnvConfig {
        EnvConfig {
            cost_rate: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(
            action_to_weights(&ActionVector(vec![0.0; 4])).unwrap(),
            vec![0.25; 4]
        );
        let w = action_to_weights(&ActionVector(vec![2f64.ln(), 0.0])).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 3.0).abs() < 1e-15);
        let a = vec![0.3, -1.2, 2.0];
        let b: Vec<f64> = a.iter().map(|x| x + 7.0).collect();
        let (wa, wb) = (
            action_to_weights(&ActionVector(a)).unwrap(),
            action_to_weights(&ActionVector(b)).unwrap(),
        );
        for (x, y) in wa.iter().zip(&wb) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(action_to_weights(&ActionVector(vec![f64::NAN])).is_err());
    }

    #[test]
    fn reset_state() {
        let cols: Vec<Vec<f64>> = (0..5).map(|i| wiggle(100, 0.3 + i as f64, 0.0)).collect();
        let p = panel_from(&cols);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let s = env.reset(60, 99).unwrap();
        assert_eq!(s.wealth, 1_000_000.0);
        assert_eq!(s.weights, vec![0.2; 5]);
        assert_eq!(s.observation.len(), 15 + 30);
        assert!(env.reset(59, 99).is_err());
        assert!(env.reset(60, 100).is_err());
    }

    #[test]
    fn single_asset_reward_is_price_relative() {
        let p = panel_from(&[wiggle(90, 0.7, 0.001)]);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, zero_cost()).unwrap();
        let s = env.reset(60, 80).unwrap();
        let r = env.step(&s, &ActionVector(vec![3.3])).unwrap();
        assert!((r.reward - (p.price(61, 0) / p.price(60, 0) - 1.0)).abs() < 1e-15);
        assert_eq!(r.cost_paid, 0.0);
        assert!(!r.done);
    }

    #[test]
    fn full_switch_costs_two_cost_rates() {
        let p = panel_from(&[wiggle(90, 0.7, 0.0), wiggle(90, 1.3, 0.0)]);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let s = env.reset_with(60, 80, 2_500_000.0, vec![1.0, 0.0]).unwrap();
        let r = env.step_weights(&s, &[0.0, 1.0]).unwrap();
        assert!((r.cost_paid - 0.001 * 2_500_000.0).abs() < 1e-12 * 2_500.0);
    }

    #[test]
    fn holding_drifted_weights_is_free() {
        let p = panel_from(&[wiggle(90, 0.7, 0.001), wiggle(90, 1.3, -0.001)]);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let s = env.reset(60, 80).unwrap();
        let s1 = env.step_weights(&s, &[0.7, 0.3]).unwrap().next;
        let r = env.step_weights(&s1, &s1.weights.clone()).unwrap();
        assert_eq!(r.cost_paid, 0.0);
    }

    #[test]
    fn buy_and_hold_single_asset() {
        let p = panel_from(&[wiggle(150, 0.4, 0.002)]);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, zero_cost()).unwrap();
        let mut rule = |_: &PortfolioEnv<'_>, _: &EnvState| Ok(vec![1.0]);
        let l = run_episode(&env, &mut rule, 60, 149).unwrap();
        let expect = 1e6 * p.price(149, 0) / p.price(60, 0);
        assert!((l.terminal_wealth() / expect - 1.0).abs() < 1e-9);
        assert_eq!(l.days(), 89);
        assert_eq!(l.dates.len(), 90);
    }

    #[test]
    fn uniform_with_equal_growth_pays_nothing() {
        let g: f64 = 1.001;
        let col: Vec<f64> = (0..120).map(|k| 50.0 * g.powi(k)).collect();
        let p = panel_from(&[col.clone(), col.iter().map(|x| 2.0 * x).collect()]);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let mut rule = |_: &PortfolioEnv<'_>, _: &EnvState| Ok(vec![0.5, 0.5]);
        let l = run_episode(&env, &mut rule, 60, 110).unwrap();
        assert!(l.total_cost < 1e-9);
        assert!((l.terminal_wealth() / (1e6 * g.powi(50)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn costs_only_subtract() {
        let p = panel_from(&[wiggle(120, 0.7, 0.001), wiggle(120, 1.9, 0.0)]);
        let f = features(&p);
        let switching = |_: &PortfolioEnv<'_>, s: &EnvState| {
            Ok(if s.t.is_multiple_of(2) {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            })
        };
        let run = |cfg| {
            let env = PortfolioEnv::new(&p, &f, cfg).unwrap();
            run_episode(&env, &mut switching.clone(), 60, 119).unwrap()
        };
        assert!(run(zero_cost()).terminal_wealth() > run(EnvConfig::default()).terminal_wealth());
    }

    #[test]
    fn ledger_csv_layout() {
        let p = panel_from(&[wiggle(70, 0.7, 0.001), wiggle(70, 1.9, 0.0)]);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let mut rule = |_: &PortfolioEnv<'_>, _: &EnvState| Ok(vec![0.5, 0.5]);
        let l = run_episode(&env, &mut rule, 60, 62).unwrap();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "date,wealth,net_return,cost_paid");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",1000000,0,0"));
        let mut buf = Vec::new();
        l.write_weights_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "date,A00,A01");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn observation_is_deterministic() {
        let p = panel_from(&[
            wiggle(80, 0.7, 0.001),
            wiggle(80, 1.9, 0.0),
            wiggle(80, 2.1, 0.0),
        ]);
        let f = features(&p);
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let a = env.observation(70, 60, &[0.2, 0.3, 0.5]).unwrap();
        let b = env.observation(70, 60, &[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), observation_dim(3));
        assert_eq!(&a[a.len() - 3..], &[0.2, 0.3, 0.5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn accounting_identity_and_simplex(
            actions in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 3), 30),
            seed in 0.1f64..5.0,
            cost in 0.0f64..0.01,
        ) {
            let p = panel_from(&[wiggle(100, seed, 0.001), wiggle(100, seed * 1.7, -0.002), wiggle(100, seed * 0.3, 0.0)]);
            let f = features(&p);
            let cfg = EnvConfig { cost_rate: cost, ..Default::default() };
            let env = PortfolioEnv::new(&p, &f, cfg).unwrap();
            let mut s = env.reset(60, 90).unwrap();
            for a in &actions {
                let r = env.step(&s, &ActionVector(a.clone())).unwrap();
                let growth: f64 = (0..3).map(|i| r.target_weights[i] * p.price(s.t + 1, i) / p.price(s.t, i)).sum();
                let expect = (s.wealth - r.cost_paid) * growth;
                prop_assert!((r.next.wealth / expect - 1.0).abs() < 1e-12);
                prop_assert!((r.next.wealth / (s.wealth * (1.0 + r.net_return)) - 1.0).abs() < 1e-12);
                prop_assert!(r.next.wealth > 0.0 && r.cost_paid >= 0.0);
                prop_assert!((r.next.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                prop_assert!(r.next.weights.iter().all(|&w| w >= 0.0));
                let done = r.done;
                s = r.next;
                if done { break; }
            }
        }

        #[test]
        fn terminal_wealth_non_increasing_in_cost(
            actions in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), 40),
            c1 in 0.0f64..0.01, c2 in 0.0f64..0.01,
        ) {
            let p = panel_from(&[wiggle(101, 0.9, 0.001), wiggle(101, 2.3, 0.0)]);
            let f = features(&p);
            let run = |c: f64| {
                let env = PortfolioEnv::new(&p, &f, EnvConfig { cost_rate: c, ..Default::default() }).unwrap();
                let mut k = 0;
                let mut rule = |_: &PortfolioEnv<'_>, _: &EnvState| {
                    k += 1;
                    action_to_weights(&ActionVector(actions[k - 1].clone()))
                };
                run_episode(&env, &mut rule, 60, 100).unwrap().terminal_wealth()
            };
            let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            prop_assert!(run(hi) <= run(lo));
        }
    }
}
