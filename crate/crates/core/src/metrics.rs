//! Performance measures over a wealth ledger. Percentages are in percent
//! units (12.5 means 12.5%). Daily moments use the `D - 1` denominator and
//! are annualized with 252 trading days.

use crate::error::{Error, Result};
use crate::portfolio_env::EpisodeLedger;
use crate::TRADING_DAYS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSet {
    pub annual_return: f64,
    pub cumulative_return: f64,
    /// `None` when daily returns have zero variance.
    pub sharpe: Option<f64>,
    pub max_drawdown: f64,
    pub annual_volatility: f64,
}

fn check_wealth(wealth: &[f64]) -> Result<()> {
    if wealth.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least 2 wealth points".into(),
        ));
    }
    Ok(())
}

pub fn cumulative_return(wealth: &[f64]) -> Result<f64> {
    check_wealth(wealth)?;
    Ok(100.0 * (wealth[wealth.len() - 1] / wealth[0] - 1.0))
}

/// Compound annual growth over `D = wealth.len() - 1` daily steps.
pub fn annual_return(wealth: &[f64]) -> Result<f64> {
    check_wealth(wealth)?;
    let days = (wealth.len() - 1) as f64;
    let growth = wealth[wealth.len() - 1] / wealth[0];
    Ok(100.0 * (growth.powf(TRADING_DAYS / days) - 1.0))
}

fn mean_std(returns: &[f64]) -> Result<(f64, f64)> {
    if returns.len() < 3 {
        return Err(Error::InsufficientData(
            "need at least 3 daily returns".into(),
        ));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    // a constant series would otherwise pick up rounding noise from the mean
    if returns.iter().all(|r| *r == returns[0]) {
        return Ok((returns[0], 0.0));
    }
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

pub fn annual_volatility(returns: &[f64]) -> Result<f64> {
    let (_, std) = mean_std(returns)?;
    Ok(100.0 * std * TRADING_DAYS.sqrt())
}

/// Annualized Sharpe ratio for annual risk-free rate `rf` (a fraction).
pub fn sharpe(returns: &[f64], rf: f64) -> Result<Option<f64>> {
    let (mean, std) = mean_std(returns)?;
    if std == 0.0 {
        return Ok(None);
    }
    Ok(Some((mean - rf / TRADING_DAYS) / std * TRADING_DAYS.sqrt()))
}

pub fn max_drawdown(wealth: &[f64]) -> Result<f64> {
    if wealth.is_empty() {
        return Err(Error::InsufficientData("empty wealth series".into()));
    }
    let mut peak = wealth[0];
    let mut worst = 0.0f64;
    for &w in wealth {
        peak = peak.max(w);
        worst = worst.max((peak - w) / peak);
    }
    Ok(100.0 * worst)
}

pub fn compute(ledger: &EpisodeLedger, rf: f64) -> Result<MetricSet> {
    Ok(MetricSet {
        annual_return: annual_return(&ledger.wealth)?,
        cumulative_return: cumulative_return(&ledger.wealth)?,
        sharpe: sharpe(&ledger.net_returns, rf)?,
        max_drawdown: max_drawdown(&ledger.wealth)?,
        annual_volatility: annual_volatility(&ledger.net_returns)?,
    })
}

/// Arithmetic mean of each metric. Sharpe is undefined if any input's is.
pub fn average(sets: &[MetricSet]) -> Result<MetricSet> {
    if sets.is_empty() {
        return Err(Error::InsufficientData("no metric sets to average".into()));
    }
    let n = sets.len() as f64;
    let avg = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
    let sharpe = sets
        .iter()
        .map(|s| s.sharpe)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / n);
    Ok(MetricSet {
        annual_return: avg(|s| s.annual_return),
        cumulative_return: avg(|s| s.cumulative_return),
        sharpe,
        max_drawdown: avg(|s| s.max_drawdown),
        annual_volatility: avg(|s| s.annual_volatility),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cumulative_examples() {
        assert!((cumulative_return(&[1e6, 1_606_290.0]).unwrap() - 60.629).abs() < 1e-9);
        assert_eq!(cumulative_return(&[5.0, 5.0]).unwrap(), 0.0);
        assert_eq!(cumulative_return(&[8.0, 4.0]).unwrap(), -50.0);
        assert!(cumulative_return(&[1.0]).is_err());
    }

    #[test]
    fn annual_return_examples() {
        let doubling = |days: usize| {
            let mut w = vec![1.0; days + 1];
            w[days] = 2.0;
            w
        };
        assert!((annual_return(&doubling(252)).unwrap() - 100.0).abs() < 1e-12);
        assert!(
            (annual_return(&doubling(504)).unwrap() - 100.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12
        );
        assert_eq!(annual_return(&[3.0; 10]).unwrap(), 0.0);
    }

    #[test]
    fn volatility_examples() {
        assert_eq!(annual_volatility(&[0.001; 10]).unwrap(), 0.0);
        let d = 10;
        let alt: Vec<f64> = (0..d)
            .map(|k| if k % 2 == 0 { 0.01 } else { -0.01 })
            .collect();
        let expected = 100.0 * 0.01 * (d as f64 / (d as f64 - 1.0)).sqrt() * 252f64.sqrt();
        assert!((annual_volatility(&alt).unwrap() - expected).abs() < 1e-12);
        let doubled: Vec<f64> = alt.iter().map(|r| 2.0 * r).collect();
        assert!((annual_volatility(&doubled).unwrap() - 2.0 * expected).abs() < 1e-12);
        assert!(annual_volatility(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn sharpe_examples() {
        // mean 0.001, sample std 0.01: alternate around the mean with a D/(D-1) correction
        let d = 1000;
        let a = 0.01 * ((d as f64 - 1.0) / d as f64).sqrt();
        let r: Vec<f64> = (0..d)
            .map(|k| 0.001 + if k % 2 == 0 { a } else { -a })
            .collect();
        let s = sharpe(&r, 0.0).unwrap().unwrap();
        assert!((s - 0.1 * 252f64.sqrt()).abs() < 1e-9);
        assert!((0.1 * 252f64.sqrt() - 1.587).abs() < 1e-3);
        assert_eq!(sharpe(&[0.002; 5], 0.0).unwrap(), None);
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        assert!((sharpe(&neg, 0.0).unwrap().unwrap() + s).abs() < 1e-12);
    }

    #[test]
    fn drawdown_examples() {
        assert_eq!(max_drawdown(&[100.0, 120.0, 90.0, 110.0]).unwrap(), 25.0);
        assert_eq!(max_drawdown(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(max_drawdown(&[100.0, 50.0]).unwrap(), 50.0);
    }

    #[test]
    fn averaging() {
        let a = MetricSet {
            annual_return: 1.0,
            cumulative_return: 2.0,
            sharpe: Some(1.0),
            max_drawdown: 3.0,
            annual_volatility: 4.0,
        };
        let b = MetricSet {
            sharpe: Some(3.0),
            annual_return: 3.0,
            ..a
        };
        let m = average(&[a, b]).unwrap();
        assert_eq!((m.annual_return, m.sharpe), (2.0, Some(2.0)));
        let c = MetricSet { sharpe: None, ..a };
        assert_eq!(average(&[a, c]).unwrap().sharpe, None);
    }

    proptest! {
        #[test]
        fn scale_invariance(
            w in proptest::collection::vec(0.5f64..2.0, 5..60), c in 0.01f64..100.0
        ) {
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            let (a, b) = (max_drawdown(&w).unwrap(), max_drawdown(&scaled).unwrap());
            prop_assert!((a - b).abs() < 1e-9);
            let r = |w: &[f64]| w.windows(2).map(|p| p[1] / p[0] - 1.0).collect::<Vec<_>>();
            let (sa, sb) = (sharpe(&r(&w), 0.0).unwrap(), sharpe(&r(&scaled), 0.0).unwrap());
            if let (Some(sa), Some(sb)) = (sa, sb) {
                prop_assert!((sa - sb).abs() < 1e-6 * sa.abs().max(1.0));
            }
        }
    }
}
