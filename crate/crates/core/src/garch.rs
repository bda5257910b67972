//! GARCH(1,1) estimation, volatility forecasting, and risk-class partitioning.
//!
//! Returns are treated directly as shocks (zero conditional mean), so
//!
//! ```text
//! sigma2[t] = omega + alpha * r[t-1]^2 + beta * sigma2[t-1]
//! ```
//!
//! with `sigma2[0]` supplied by the caller. Fitting maximizes the Gaussian
//! log-likelihood with Nelder–Mead over an unconstrained reparameterization
//! that keeps every trial point stationary.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::TRADING_DAYS;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Upper bound on `alpha + beta` reachable by the fitter.
pub const MAX_PERSISTENCE: f64 = 0.9999;
pub const MIN_FIT_OBSERVATIONS: usize = 100;
pub const DEFAULT_HORIZON: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GarchParams {
    /// Requires `omega > 0`, `alpha, beta >= 0` and `alpha + beta < 1`.
    pub fn new(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { omega, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { omega, alpha, beta } = *self;
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be > 0, got {omega}"
            )));
        }
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha and beta must be >= 0, got {alpha}, {beta}"
            )));
        }
        if !(alpha + beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha + beta must be < 1, got {}",
                alpha + beta
            )));
        }
        Ok(())
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Long-run variance `omega / (1 - alpha - beta)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }

    /// Default starting point for a series with sample variance `v`.
    pub fn default_init(v: f64) -> Self {
        Self {
            omega: 0.05 * v,
            alpha: 0.05,
            beta: 0.90,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchFit {
    pub params: GarchParams,
    pub loglik: f64,
    pub sigma2_path: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Conditional variance path; same length as `returns`.
pub fn variance_recursion(
    params: &GarchParams,
    returns: &[f64],
    sigma2_0: f64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if !(sigma2_0 > 0.0 && sigma2_0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "initial variance must be > 0, got {sigma2_0}"
        )));
    }
    Ok(recursion_unchecked(params, returns, sigma2_0))
}

fn recursion_unchecked(p: &GarchParams, returns: &[f64], sigma2_0: f64) -> Vec<f64> {
    let mut path = Vec::with_capacity(returns.len());
    if returns.is_empty() {
        return path;
    }
    let mut s = sigma2_0;
    path.push(s);
    for prev in &returns[..returns.len() - 1] {
        s = p.omega + p.alpha * prev * prev + p.beta * s;
        path.push(s);
    }
    path
}

/// Gaussian log-likelihood (nats) of `returns` under the variance path.
pub fn log_likelihood(params: &GarchParams, returns: &[f64], sigma2_0: f64) -> Result<f64> {
    let path = variance_recursion(params, returns, sigma2_0)?;
    loglik_from_path(returns, &path)
}

fn loglik_from_path(returns: &[f64], path: &[f64]) -> Result<f64> {
    let mut ll = 0.0;
    for (r, s) in returns.iter().zip(path) {
        if !(*s > 0.0) {
            return Err(Error::Numerical(format!(
                "non-positive conditional variance {s}"
            )));
        }
        ll += -0.5 * LN_2PI - 0.5 * s.ln() - r * r / (2.0 * s);
    }
    Ok(ll)
}

/// Fast objective for the optimizer: negative log-likelihood without
/// allocating the path.
fn neg_loglik(p: &GarchParams, returns: &[f64], sigma2_0: f64) -> f64 {
    let mut s = sigma2_0;
    let mut acc = 0.0;
    let mut prev = 0.0;
    for (t, &r) in returns.iter().enumerate() {
        if t > 0 {
            s = p.omega + p.alpha * prev * prev + p.beta * s;
        }
        if !(s > 0.0) {
            return f64::INFINITY;
        }
        acc += s.ln() + r * r / s;
        prev = r;
    }
    0.5 * (acc + returns.len() as f64 * LN_2PI)
}

/// `omega = exp(x0)`; `(alpha, beta)` are the first two components of a
/// three-way softmax over `(x1, x2, 0)`, scaled by [`MAX_PERSISTENCE`].
fn from_unconstrained(x: &[f64]) -> GarchParams {
    let m = x[1].max(x[2]).max(0.0);
    let (ea, eb, ec) = ((x[1] - m).exp(), (x[2] - m).exp(), (-m).exp());
    let z = ea + eb + ec;
    GarchParams {
        omega: x[0].exp(),
        alpha: MAX_PERSISTENCE * ea / z,
        beta: MAX_PERSISTENCE * eb / z,
    }
}

fn to_unconstrained(p: &GarchParams) -> [f64; 3] {
    let a = (p.alpha / MAX_PERSISTENCE).max(1e-8);
    let b = (p.beta / MAX_PERSISTENCE).max(1e-8);
    let rest = (1.0 - a - b).max(1e-8);
    [p.omega.ln(), (a / rest).ln(), (b / rest).ln()]
}

fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Initial variance used by [`fit_garch`]: the sample variance, or the mean
/// square when the sample variance vanishes.
pub fn initial_variance(returns: &[f64]) -> f64 {
    let v = sample_variance(returns);
    if v > 0.0 {
        v
    } else {
        returns.iter().map(|r| r * r).sum::<f64>() / returns.len() as f64
    }
}

/// Maximum-likelihood GARCH(1,1) fit. Deterministic in `(returns, init)`;
/// never returns a point worse than the starting one.
pub fn fit_garch(returns: &[f64], init: Option<GarchParams>) -> Result<GarchFit> {
    if returns.len() < MIN_FIT_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "GARCH fit needs at least {MIN_FIT_OBSERVATIONS} returns, got {}",
            returns.len()
        )));
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidData("non-finite return".into()));
    }
    if returns.iter().all(|&r| r == 0.0) {
        return Err(Error::InvalidData(
            "all returns are zero; likelihood is degenerate".into(),
        ));
    }
    let sigma2_0 = initial_variance(returns);
    let start = match init {
        Some(p) => {
            p.validate()?;
            p
        }
        None => GarchParams::default_init(sigma2_0),
    };

    let objective = |x: &[f64]| neg_loglik(&from_unconstrained(x), returns, sigma2_0);
    let max_iter = 5000;
    let nm = |budget| NelderMead {
        max_iter: budget,
        diameter_tol: 1e-8,
        initial_step: 0.5,
    };

    let x0 = to_unconstrained(&start);
    let mut best = nm(max_iter).minimize(objective, &x0);
    let mut iterations = best.iterations;
    // Restart from the optimum; a collapsed simplex can stall away from it.
    while best.converged && iterations < max_iter {
        let again = nm(max_iter - iterations).minimize(objective, &best.x);
        iterations += again.iterations.max(1);
        let improved = again.fx < best.fx - 1e-9 * best.fx.abs().max(1.0);
        if again.fx <= best.fx {
            best = again;
        }
        if !improved {
            break;
        }
    }

    // The reparameterization can round the start point slightly; compare
    // against the exact start as well.
    let start_nll = neg_loglik(&start, returns, sigma2_0);
    let params = if best.fx <= start_nll {
        from_unconstrained(&best.x)
    } else {
        start
    };
    let sigma2_path = recursion_unchecked(&params, returns, sigma2_0);
    let loglik = loglik_from_path(returns, &sigma2_path)?;
    if !loglik.is_finite() {
        return Err(Error::Numerical("log-likelihood is not finite".into()));
    }
    Ok(GarchFit {
        params,
        loglik,
        sigma2_path,
        converged: best.converged,
        iterations,
    })
}

/// Expected per-day variances for days `t+1 ..= t+horizon`.
pub fn forecast_variance_path(fit: &GarchFit, last_eps2: f64, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidParameter(
            "forecast horizon must be >= 1".into(),
        ));
    }
    let p = &fit.params;
    let last_sigma2 = *fit
        .sigma2_path
        .last()
        .ok_or_else(|| Error::InsufficientData("empty variance path".into()))?;
    let next = p.omega + p.alpha * last_eps2 + p.beta * last_sigma2;
    let long_run = p.unconditional_variance();
    let persistence = p.persistence();
    let mut decay = 1.0;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        out.push(long_run + decay * (next - long_run));
        decay *= persistence;
    }
    Ok(out)
}

/// Annualized volatility, `sqrt(252 * mean(per-day forecast variance))`.
pub fn forecast_volatility(fit: &GarchFit, last_eps2: f64, horizon: usize) -> Result<f64> {
    let path = forecast_variance_path(fit, last_eps2, horizon)?;
    let mean = path.iter().sum::<f64>() / path.len() as f64;
    Ok((TRADING_DAYS * mean).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityScore {
    pub ticker: String,
    pub annual_vol: f64,
}

/// Fits a return series and scores it by forecast volatility over `horizon`.
pub fn score_returns(
    ticker: &str,
    returns: &[f64],
    horizon: usize,
) -> Result<(GarchFit, VolatilityScore)> {
    let fit = fit_garch(returns, None)?;
    let last = returns[returns.len() - 1];
    let annual_vol = forecast_volatility(&fit, last * last, horizon)?;
    if !(annual_vol > 0.0 && annual_vol.is_finite()) {
        return Err(Error::Numerical(format!(
            "{ticker}: forecast volatility {annual_vol}"
        )));
    }
    Ok((
        fit,
        VolatilityScore {
            ticker: ticker.to_string(),
            annual_vol,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RiskClass {
    Aggressive,
    Moderate,
    Conservative,
}

impl RiskClass {
    pub const ALL: [RiskClass; 3] = [
        RiskClass::Aggressive,
        RiskClass::Moderate,
        RiskClass::Conservative,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RiskClass::Aggressive => "aggressive",
            RiskClass::Moderate => "moderate",
            RiskClass::Conservative => "conservative",
        }
    }
}

impl fmt::Display for RiskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aggressive" => Ok(RiskClass::Aggressive),
            "moderate" => Ok(RiskClass::Moderate),
            "conservative" => Ok(RiskClass::Conservative),
            other => Err(Error::InvalidParameter(format!(
                "unknown risk class `{other}`"
            ))),
        }
    }
}

/// Scores ranked by volatility, split into the three classes.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversePartition {
    /// All scores, volatility descending (ties: ticker ascending).
    pub ranked: Vec<VolatilityScore>,
    pub k_top: usize,
    pub k_bottom: usize,
}

impl UniversePartition {
    pub fn class_of_rank(&self, rank: usize) -> RiskClass {
        if rank < self.k_top {
            RiskClass::Aggressive
        } else if rank >= self.ranked.len() - self.k_bottom {
            RiskClass::Conservative
        } else {
            RiskClass::Moderate
        }
    }

    pub fn members(&self, class: RiskClass) -> Vec<String> {
        self.ranked
            .iter()
            .enumerate()
            .filter(|(i, _)| self.class_of_rank(*i) == class)
            .map(|(_, s)| s.ticker.clone())
            .collect()
    }

    pub fn aggressive(&self) -> Vec<String> {
        self.members(RiskClass::Aggressive)
    }

    pub fn moderate(&self) -> Vec<String> {
        self.members(RiskClass::Moderate)
    }

    pub fn conservative(&self) -> Vec<String> {
        self.members(RiskClass::Conservative)
    }

    /// `(ticker, annual_vol, class)` rows in ranked order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, f64, RiskClass)> {
        self.ranked
            .iter()
            .enumerate()
            .map(|(i, s)| (s.ticker.as_str(), s.annual_vol, self.class_of_rank(i)))
    }

    /// Rebuilds a partition from explicitly classed rows (as read back from
    /// a partition file). Rows must be in ranked order with classes contiguous.
    pub fn from_rows(rows: Vec<(String, f64, RiskClass)>) -> Result<Self> {
        let k_top = rows
            .iter()
            .take_while(|r| r.2 == RiskClass::Aggressive)
            .count();
        let k_bottom = rows
            .iter()
            .rev()
            .take_while(|r| r.2 == RiskClass::Conservative)
            .count();
        let scores: Vec<VolatilityScore> = rows
            .iter()
            .map(|(t, v, _)| VolatilityScore {
                ticker: t.clone(),
                annual_vol: *v,
            })
            .collect();
        let p = classify_universe(&scores, k_top, k_bottom)?;
        let consistent = p.rows().zip(&rows).all(|(a, b)| a.0 == b.0 && a.2 == b.2);
        if !consistent {
            return Err(Error::InvalidData(
                "partition rows are not in volatility order with contiguous classes".into(),
            ));
        }
        Ok(p)
    }
}

/// Top `k_top` by volatility are aggressive, bottom `k_bottom` conservative,
/// the rest moderate.
pub fn classify_universe(
    scores: &[VolatilityScore],
    k_top: usize,
    k_bottom: usize,
) -> Result<UniversePartition> {
    let mut seen = BTreeSet::new();
    for s in scores {
        if !seen.insert(s.ticker.as_str()) {
            return Err(Error::DuplicateTicker(s.ticker.clone()));
        }
        if !(s.annual_vol > 0.0 && s.annual_vol.is_finite()) {
            return Err(Error::InvalidData(format!(
                "{}: volatility must be positive, got {}",
                s.ticker, s.annual_vol
            )));
        }
    }
    if k_top + k_bottom >= scores.len() {
        return Err(Error::InvalidParameter(format!(
            "k_top + k_bottom = {} must be less than the {} assets",
            k_top + k_bottom,
            scores.len()
        )));
    }
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| {
        b.annual_vol
            .total_cmp(&a.annual_vol)
            .then_with(|| a.ticker.cmp(&b.ticker))
    });
    Ok(UniversePartition {
        ranked,
        k_top,
        k_bottom,
    })
}
