//! Baseline strategies run through the same [`PortfolioEnv`] as the learned
//! policy: long-only mean-variance, daily equal-weight, and a price-weighted
//! buy-and-hold index proxy.

use crate::error::{Error, Result};
use crate::linalg;
use crate::market_data::{covariance_window, ReturnPanel};
use crate::portfolio_env::{run_episode, EnvState, EpisodeLedger, PortfolioEnv};

#[derive(Debug, Clone, PartialEq)]
pub struct MvoInputs {
    /// Expected daily returns.
    pub mu: Vec<f64>,
    /// Row-major `n x n` covariance of daily returns.
    pub sigma: Vec<f64>,
    /// Risk aversion.
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvoConfig {
    /// Trailing estimation window in days.
    pub window: usize,
    pub rebalance_every: usize,
    pub kappa: f64,
    pub iterations: usize,
}

impl Default for MvoConfig {
    fn default() -> Self {
        Self {
            window: 252,
            rebalance_every: 63,
            kappa: 10.0,
            iterations: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyLedger {
    pub name: String,
    pub ledger: EpisodeLedger,
}

/// `mu' w - kappa/2 * w' Sigma w`.
pub fn mvo_objective(inputs: &MvoInputs, w: &[f64]) -> f64 {
    let n = inputs.mu.len();
    linalg::dot(&inputs.mu, w) - 0.5 * inputs.kappa * linalg::quad_form(&inputs.sigma, n, w)
}

/// Long-only, fully invested mean-variance weights by projected gradient
/// ascent from the uniform portfolio, with the Gershgorin bound of
/// `kappa * Sigma` as the Lipschitz constant. Returns the best iterate seen.
pub fn mvo_weights(inputs: &MvoInputs) -> Result<Vec<f64>> {
    mvo_weights_iter(inputs, MvoConfig::default().iterations)
}

pub fn mvo_weights_iter(inputs: &MvoInputs, iterations: usize) -> Result<Vec<f64>> {
    let n = inputs.mu.len();
    crate::error::check_dim(n * n, inputs.sigma.len())?;
    if n == 0 {
        return Err(Error::InvalidParameter("no assets".into()));
    }
    if !(inputs.kappa >= 0.0)
        || inputs
            .mu
            .iter()
            .chain(&inputs.sigma)
            .any(|x| !x.is_finite())
    {
        return Err(Error::InvalidParameter(
            "mvo inputs must be finite with kappa >= 0".into(),
        ));
    }
    let scale = (0..n)
        .map(|i| inputs.sigma[i * n + i].abs())
        .fold(1e-300, f64::max);
    for i in 0..n {
        for j in 0..i {
            if (inputs.sigma[i * n + j] - inputs.sigma[j * n + i]).abs() > 1e-12 * scale {
                return Err(Error::InvalidData("covariance is not symmetric".into()));
            }
        }
    }
    if !linalg::is_psd(&inputs.sigma, n, 1e-10 * scale) {
        return Err(Error::InvalidData(
            "covariance is not positive semi-definite".into(),
        ));
    }

    let lipschitz = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (inputs.kappa * inputs.sigma[i * n + j]).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lipschitz;

    let mut w = vec![1.0 / n as f64; n];
    let mut best = w.clone();
    let mut best_obj = mvo_objective(inputs, &w);
    for _ in 0..iterations {
        let sw = linalg::mat_vec(&inputs.sigma, n, &w);
        let moved: Vec<f64> = (0..n)
            .map(|i| w[i] + step * (inputs.mu[i] - inputs.kappa * sw[i]))
            .collect();
        w = linalg::project_simplex(&moved);
        let obj = mvo_objective(inputs, &w);
        if obj > best_obj {
            best_obj = obj;
            best = w.clone();
        }
    }
    Ok(best)
}

/// Sample mean and ridged covariance of returns rows `[end - window, end)`.
pub fn estimate_inputs(
    rp: &ReturnPanel,
    end: usize,
    window: usize,
    kappa: f64,
) -> Result<MvoInputs> {
    let n = rp.n_assets();
    if window < n + 2 {
        return Err(Error::InvalidParameter(format!(
            "estimation window {window} must be at least n + 2 = {}",
            n + 2
        )));
    }
    let cov = covariance_window(rp, end, window)?;
    let rows = &rp.returns[end - window..end];
    let mu = (0..n)
        .map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / window as f64)
        .collect();
    Ok(MvoInputs {
        mu,
        sigma: cov.matrix,
        kappa,
    })
}

/// Re-estimates every `rebalance_every` days from the trailing window and
/// holds (drifts) in between.
pub fn mvo_backtest(
    env: &PortfolioEnv<'_>,
    start: usize,
    end: usize,
    cfg: &MvoConfig,
) -> Result<StrategyLedger> {
    if start < cfg.window {
        return Err(Error::InsufficientData(format!(
            "MVO needs {} days of history before day {start}",
            cfg.window
        )));
    }
    if cfg.rebalance_every == 0 {
        return Err(Error::InvalidParameter(
            "rebalance interval must be >= 1".into(),
        ));
    }
    let mut rule = |env: &PortfolioEnv<'_>, s: &EnvState| -> Result<Vec<f64>> {
        if (s.t - start).is_multiple_of(cfg.rebalance_every) {
            // returns up to and including day t are known at t
            let inputs = estimate_inputs(env.returns(), s.t, cfg.window, cfg.kappa)?;
            mvo_weights_iter(&inputs, cfg.iterations)
        } else {
            Ok(s.weights.clone())
        }
    };
    Ok(StrategyLedger {
        name: "MVO".into(),
        ledger: run_episode(env, &mut rule, start, end)?,
    })
}

pub fn equal_weight_backtest(
    env: &PortfolioEnv<'_>,
    start: usize,
    end: usize,
) -> Result<StrategyLedger> {
    let n = env.n_assets();
    let mut rule = |_: &PortfolioEnv<'_>, _: &EnvState| Ok(vec![1.0 / n as f64; n]);
    Ok(StrategyLedger {
        name: "Equal-Weighted".into(),
        ledger: run_episode(env, &mut rule, start, end)?,
    })
}

/// Price-weighted at `start`, never rebalanced afterwards.
pub fn index_backtest(env: &PortfolioEnv<'_>, start: usize, end: usize) -> Result<StrategyLedger> {
    let mut rule = |env: &PortfolioEnv<'_>, s: &EnvState| -> Result<Vec<f64>> {
        if s.t == start {
            let p = &env.panel().rows()[start];
            let total: f64 = p.iter().sum();
            Ok(p.iter().map(|x| x / total).collect())
        } else {
            Ok(s.weights.clone())
        }
    };
    Ok(StrategyLedger {
        name: "Index-proxy".into(),
        ledger: run_episode(env, &mut rule, start, end)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{business_days, compute_indicators, IndicatorConfig, PricePanel};
    use crate::portfolio_env::EnvConfig;

    fn inputs(mu: Vec<f64>, sigma: Vec<f64>, kappa: f64) -> MvoInputs {
        MvoInputs { mu, sigma, kappa }
    }

    fn identity(n: usize, c: f64) -> Vec<f64> {
        (0..n * n)
            .map(|k| if k % (n + 1) == 0 { c } else { 0.0 })
            .collect()
    }

    #[test]
    fn symmetric_problem_gives_uniform() {
        let w = mvo_weights(&inputs(vec![0.01; 4], identity(4, 0.3), 10.0)).unwrap();
        for x in w {
            assert!((x - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn two_asset_grid_agreement() {
        let inp = inputs(vec![0.001, 0.0], identity(2, 1e-4), 10.0);
        let w = mvo_weights(&inp).unwrap();
        let grid_best = (0..=1000)
            .map(|k| {
                let a = k as f64 / 1000.0;
                mvo_objective(&inp, &[a, 1.0 - a])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((mvo_objective(&inp, &w) - grid_best).abs() < 1e-3);
        assert!(mvo_objective(&inp, &w) >= grid_best - 1e-12);
    }

    #[test]
    fn return_only_limit() {
        let w = mvo_weights(&inputs(vec![0.05, 0.001], identity(2, 0.01), 1e-6)).unwrap();
        assert!(w[0] > 1.0 - 1e-9);
    }

    #[test]
    fn rejects_indefinite() {
        let bad = inputs(vec![0.0, 0.0], vec![1.0, 2.0, 2.0, 1.0], 1.0);
        assert!(mvo_weights(&bad).is_err());
        let asym = inputs(vec![0.0, 0.0], vec![1.0, 0.5, 0.1, 1.0], 1.0);
        assert!(mvo_weights(&asym).is_err());
    }

    fn panel(cols: &[Vec<f64>]) -> PricePanel {
        let t = cols[0].len();
        let tickers = (0..cols.len()).map(|i| format!("S{i}")).collect();
        let prices = (0..t)
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect();
        PricePanel::new(tickers, business_days(t), prices).unwrap()
    }

    fn wiggle(t: usize, seed: f64, drift: f64) -> Vec<f64> {
        (0..t)
            .map(|k| {
                30.0 * (1.0 + seed) * (drift * k as f64 + 0.03 * (seed * k as f64).sin()).exp()
            })
            .collect()
    }

    #[test]
    fn single_asset_backtests_coincide() {
        let p = panel(&[wiggle(400, 0.8, 0.0005)]);
        let f = compute_indicators(&p, &IndicatorConfig::default()).unwrap();
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let mvo = mvo_backtest(&env, 260, 399, &MvoConfig::default()).unwrap();
        let idx = index_backtest(&env, 260, 399).unwrap();
        let eq = equal_weight_backtest(&env, 260, 399).unwrap();
        assert_eq!(mvo.ledger, idx.ledger);
        assert_eq!(eq.ledger, idx.ledger);
        assert!(mvo.ledger.weights.iter().all(|w| w == &vec![1.0]));
    }

    #[test]
    fn zero_variance_equal_drift_is_uniform() {
        let g: f64 = 1.0004;
        let cols: Vec<Vec<f64>> = (1..=3)
            .map(|s| (0..400).map(|k| 10.0 * s as f64 * g.powi(k)).collect())
            .collect();
        let p = panel(&cols);
        let f = compute_indicators(&p, &IndicatorConfig::default()).unwrap();
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let cfg = MvoConfig {
            rebalance_every: 20,
            ..Default::default()
        };
        let l = mvo_backtest(&env, 260, 399, &cfg).unwrap().ledger;
        for (k, w) in l.weights.iter().enumerate() {
            if k % 20 == 0 {
                for x in w {
                    assert!((x - 1.0 / 3.0).abs() < 1e-9, "{w:?}");
                }
            }
        }
    }

    #[test]
    fn mvo_cost_monotone_with_same_decisions() {
        let p = panel(&[
            wiggle(420, 0.8, 0.0005),
            wiggle(420, 2.1, 0.0),
            wiggle(420, 1.4, 0.0002),
        ]);
        let f = compute_indicators(&p, &IndicatorConfig::default()).unwrap();
        let run = |c: f64| {
            let env = PortfolioEnv::new(
                &p,
                &f,
                EnvConfig {
                    cost_rate: c,
                    ..Default::default()
                },
            )
            .unwrap();
            mvo_backtest(&env, 260, 419, &MvoConfig::default())
                .unwrap()
                .ledger
        };
        let (cheap, dear) = (run(0.0), run(0.002));
        assert!(dear.terminal_wealth() <= cheap.terminal_wealth());
        for (k, (a, b)) in cheap.weights.iter().zip(&dear.weights).enumerate() {
            if k % 63 == 0 {
                assert_eq!(a, b);
            }
        }
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        assert!(mvo_backtest(&env, 200, 419, &MvoConfig::default()).is_err());
    }

    #[test]
    fn equal_weight_targets_and_identical_paths() {
        let c = wiggle(200, 0.5, 0.001);
        let p = panel(&[c.clone(), c.clone(), c.clone(), c]);
        let f = compute_indicators(&p, &IndicatorConfig::default()).unwrap();
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let l = equal_weight_backtest(&env, 60, 199).unwrap().ledger;
        assert!(l.weights.iter().all(|w| w == &vec![0.25; 4]));
        assert!(l.total_cost < 1e-9);
    }

    #[test]
    fn index_is_buy_and_hold() {
        let p = panel(&[
            wiggle(200, 0.5, 0.001),
            wiggle(200, 1.7, -0.0005),
            wiggle(200, 2.9, 0.0),
        ]);
        let f = compute_indicators(&p, &IndicatorConfig::default()).unwrap();
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let l = index_backtest(&env, 60, 199).unwrap().ledger;
        let p0 = &p.rows()[60];
        let total: f64 = p0.iter().sum();
        let w0: Vec<f64> = p0.iter().map(|x| x / total).collect();
        let after_cost = 1e6 - l.costs[0];
        let expect: f64 = after_cost
            * (0..3)
                .map(|i| w0[i] * p.price(199, i) / p.price(60, i))
                .sum::<f64>();
        assert!((l.terminal_wealth() / expect - 1.0).abs() < 1e-9);
        assert!(l.costs[1..].iter().all(|&c| c < 1e-9));
    }

    #[test]
    fn index_starts_uniform_for_equal_prices() {
        let p = panel(&[vec![10.0; 100], vec![10.0; 100]]);
        let f = compute_indicators(&p, &IndicatorConfig::default()).unwrap();
        let env = PortfolioEnv::new(&p, &f, EnvConfig::default()).unwrap();
        let l = index_backtest(&env, 60, 99).unwrap().ledger;
        assert_eq!(l.weights[0], vec![0.5, 0.5]);
        assert_eq!(l.total_cost, 0.0);
    }
}
