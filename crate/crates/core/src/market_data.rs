//! Price ingestion, panel alignment, returns, technical indicators, rolling
//! covariance, and a seeded GARCH-driven price simulator.
//!
//! `adj_close` is the canonical price everywhere downstream. Open, high, low
//! and volume are validated on load and kept, but nothing consumes them.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::garch::GarchParams;
use crate::linalg;

pub const CSV_HEADER: [&str; 7] = [
    "Date",
    "Open",
    "High",
    "Low",
    "Close",
    "Adj Close",
    "Volume",
];
pub const DATE_FORMAT: &str = "%Y-%m-%d";
/// Added to the covariance diagonal so downstream solvers never see a singular matrix.
pub const COVARIANCE_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

impl PriceBar {
    fn validate(&self) -> std::result::Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close, self.adj_close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err("non-positive price".into());
        }
        if self.low > self.open.min(self.close).min(self.high)
            || self.high < self.open.max(self.close).max(self.low)
        {
            return Err("high/low range does not contain open and close".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub ticker: String,
    pub bars: Vec<PriceBar>,
}

impl PriceSeries {
    /// Sorts bars by date and rejects duplicate dates.
    pub fn new(ticker: impl Into<String>, mut bars: Vec<PriceBar>) -> Result<Self> {
        bars.sort_by_key(|b| b.date);
        if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::DuplicateDate(w[0].date));
        }
        Ok(Self {
            ticker: ticker.into(),
            bars,
        })
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }
}

/// Loads one Yahoo-layout CSV. The ticker is the file stem.
///
/// Row numbers in errors count data rows from 1 (the header is not counted).
pub fn load_csv(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let ticker = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidData(format!("{}: no ticker in file name", path.display())))?
        .to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);

    let header = reader.headers().map_err(|e| Error::Row {
        path: path.into(),
        row: 0,
        msg: e.to_string(),
    })?;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != CSV_HEADER {
        return Err(Error::Header {
            path: path.into(),
            expected: CSV_HEADER.join(","),
            found: found.join(","),
        });
    }

    let mut bars = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let row_err = |msg: String| Error::Row {
            path: path.into(),
            row,
            msg,
        };
        let record = record.map_err(|e| row_err(e.to_string()))?;
        if record.len() != CSV_HEADER.len() {
            return Err(row_err(format!(
                "expected 7 fields, found {}",
                record.len()
            )));
        }
        let field = |k: usize| record[k].trim();
        let date = NaiveDate::parse_from_str(field(0), DATE_FORMAT)
            .map_err(|e| row_err(format!("bad date `{}`: {e}", field(0))))?;
        let num = |k: usize| -> Result<f64> {
            field(k)
                .parse::<f64>()
                .map_err(|e| row_err(format!("bad {} `{}`: {e}", CSV_HEADER[k], field(k))))
        };
        let volume = field(6)
            .parse::<u64>()
            .or_else(|_| match field(6).parse::<f64>() {
                Ok(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as u64),
                _ => Err(()),
            })
            .map_err(|_| row_err(format!("bad Volume `{}`", field(6))))?;
        let bar = PriceBar {
            date,
            open: num(1)?,
            high: num(2)?,
            low: num(3)?,
            close: num(4)?,
            adj_close: num(5)?,
            volume,
        };
        bar.validate().map_err(row_err)?;
        bars.push(bar);
    }
    PriceSeries::new(ticker, bars)
}

/// Writes a series in the Yahoo export layout.
pub fn write_csv<W: Write>(series: &PriceSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::InvalidData(e.to_string());
    w.write_record(CSV_HEADER).map_err(wrap)?;
    for b in &series.bars {
        w.write_record([
            b.date.format(DATE_FORMAT).to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.adj_close.to_string(),
            b.volume.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))
}

/// Date-aligned adjusted-close matrix, `prices[t][i]` for day `t` and asset `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.is_empty() {
            return Err(Error::InvalidData("panel has no tickers".into()));
        }
        if tickers.windows(2).any(|w| w[0] >= w[1]) {
            let mut seen = BTreeSet::new();
            if let Some(t) = tickers.iter().find(|t| !seen.insert(*t)) {
                return Err(Error::DuplicateTicker(t.clone()));
            }
            return Err(Error::InvalidData(
                "tickers must be sorted lexicographically".into(),
            ));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidData(
                "dates must be strictly increasing".into(),
            ));
        }
        if prices.len() != dates.len() {
            return Err(Error::Dimension {
                expected: dates.len(),
                found: prices.len(),
            });
        }
        for (row, d) in prices.iter().zip(&dates) {
            crate::error::check_dim(tickers.len(), row.len())?;
            if row.iter().any(|p| !p.is_finite() || *p <= 0.0) {
                return Err(Error::InvalidData(format!("non-positive price on {d}")));
            }
        }
        Ok(Self {
            tickers,
            dates,
            prices,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    /// Number of days `T`.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn price(&self, t: usize, asset: usize) -> f64 {
        self.prices[t][asset]
    }

    pub fn column(&self, asset: usize) -> Vec<f64> {
        self.prices.iter().map(|r| r[asset]).collect()
    }

    pub fn ticker_index(&self, ticker: &str) -> Option<usize> {
        self.tickers
            .binary_search_by(|t| t.as_str().cmp(ticker))
            .ok()
    }

    /// First day index on or after `date`.
    pub fn index_on_or_after(&self, date: NaiveDate) -> Option<usize> {
        let i = self.dates.partition_point(|d| *d < date);
        (i < self.dates.len()).then_some(i)
    }

    /// Last day index on or before `date`.
    pub fn index_on_or_before(&self, date: NaiveDate) -> Option<usize> {
        self.dates.partition_point(|d| *d <= date).checked_sub(1)
    }

    /// Column subset; output tickers are re-sorted into canonical order.
    pub fn select(&self, tickers: &[String]) -> Result<PricePanel> {
        let mut wanted: Vec<String> = tickers.to_vec();
        wanted.sort();
        if let Some(w) = wanted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateTicker(w[0].clone()));
        }
        let idx = wanted
            .iter()
            .map(|t| {
                self.ticker_index(t)
                    .ok_or_else(|| Error::InvalidData(format!("ticker {t} not in panel")))
            })
            .collect::<Result<Vec<_>>>()?;
        let prices = self
            .prices
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect();
        PricePanel::new(wanted, self.dates.clone(), prices)
    }

    /// Cache layout: `date,<TICKER>...` with one adjusted close per cell.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::InvalidData(e.to_string());
        let mut header = vec!["date".to_string()];
        header.extend(self.tickers.iter().cloned());
        w.write_record(&header).map_err(wrap)?;
        for (d, row) in self.dates.iter().zip(&self.prices) {
            let mut rec = vec![d.format(DATE_FORMAT).to_string()];
            rec.extend(row.iter().map(|p| p.to_string()));
            w.write_record(&rec).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io("<writer>", e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<PricePanel> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let header = reader
            .headers()
            .map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))?
            .clone();
        if header.get(0) != Some("date") || header.len() < 2 {
            return Err(Error::Header {
                path: path.into(),
                expected: "date,<TICKER>...".into(),
                found: header.iter().collect::<Vec<_>>().join(","),
            });
        }
        let tickers: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut dates = Vec::new();
        let mut prices = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let row_err = |msg: String| Error::Row {
                path: path.into(),
                row: i + 1,
                msg,
            };
            let rec = rec.map_err(|e| row_err(e.to_string()))?;
            dates.push(
                NaiveDate::parse_from_str(&rec[0], DATE_FORMAT)
                    .map_err(|e| row_err(format!("bad date: {e}")))?,
            );
            prices.push(
                rec.iter()
                    .skip(1)
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|e| row_err(format!("bad price `{s}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        PricePanel::new(tickers, dates, prices)
    }
}

/// Inner-joins series on date; tickers come out lexicographically sorted.
pub fn align_panel(series: &[PriceSeries]) -> Result<PricePanel> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 series, got {}",
            series.len()
        )));
    }
    let mut by_ticker: BTreeMap<&str, &PriceSeries> = BTreeMap::new();
    for s in series {
        if s.is_empty() {
            return Err(Error::InsufficientData(format!(
                "series {} is empty",
                s.ticker
            )));
        }
        if by_ticker.insert(&s.ticker, s).is_some() {
            return Err(Error::DuplicateTicker(s.ticker.clone()));
        }
    }

    let mut common: BTreeSet<NaiveDate> = series[0].bars.iter().map(|b| b.date).collect();
    for s in &series[1..] {
        let dates: BTreeSet<NaiveDate> = s.bars.iter().map(|b| b.date).collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "date intersection has {} day(s), need at least 2",
            common.len()
        )));
    }

    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let columns: Vec<Vec<f64>> = by_ticker
        .values()
        .map(|s| {
            let lookup: BTreeMap<NaiveDate, f64> =
                s.bars.iter().map(|b| (b.date, b.adj_close)).collect();
            dates.iter().map(|d| lookup[d]).collect()
        })
        .collect();
    let prices = (0..dates.len())
        .map(|t| columns.iter().map(|c| c[t]).collect())
        .collect();
    let tickers = by_ticker.keys().map(|t| t.to_string()).collect();
    PricePanel::new(tickers, dates, prices)
}

/// Daily log returns. Row `t` is `ln(p[t+1] / p[t])`, dated at day `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn column(&self, asset: usize) -> Vec<f64> {
        self.returns.iter().map(|r| r[asset]).collect()
    }
}

pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    if panel.len() < 2 {
        return Err(Error::InsufficientData(
            "log returns need at least 2 days".into(),
        ));
    }
    let returns = panel
        .rows()
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b / a).ln()).collect())
        .collect();
    Ok(ReturnPanel {
        tickers: panel.tickers().to_vec(),
        dates: panel.dates()[1..].to_vec(),
        returns,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorConfig {
    pub macd_fast: usize,
    pub macd_slow: usize,
    pub rsi_period: usize,
    pub sma_short: usize,
    pub sma_long: usize,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        Self {
            macd_fast: 12,
            macd_slow: 26,
            rsi_period: 14,
            sma_short: 30,
            sma_long: 60,
        }
    }
}

impl IndicatorConfig {
    /// First day index at which every indicator is defined.
    pub fn warmup(&self) -> usize {
        (self.macd_slow - 1)
            .max(self.rsi_period)
            .max(self.sma_short - 1)
            .max(self.sma_long - 1)
    }

    fn validate(&self) -> Result<()> {
        let p = [
            self.macd_fast,
            self.macd_slow,
            self.rsi_period,
            self.sma_short,
            self.sma_long,
        ];
        if p.contains(&0) {
            return Err(Error::InvalidParameter(
                "indicator periods must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicators {
    /// EMA(fast) - EMA(slow), in price units.
    pub macd: f64,
    /// Wilder RSI in [0, 100].
    pub rsi: f64,
    pub sma_ratio_short: f64,
    pub sma_ratio_long: f64,
}

/// Indicators per day and asset. Rows before `warmup` are not valid
/// observations and may hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<Vec<Indicators>>,
    pub warmup: usize,
}

impl FeatureSet {
    pub fn is_warm(&self, t: usize) -> bool {
        t >= self.warmup && t < self.values.len()
    }

    pub fn at(&self, t: usize, asset: usize) -> &Indicators {
        &self.values[t][asset]
    }
}

fn ema(prices: &[f64], period: usize) -> Vec<f64> {
    let k = 2.0 / (period as f64 + 1.0);
    let mut out = Vec::with_capacity(prices.len());
    let mut e = prices[0];
    for &p in prices {
        e += k * (p - e);
        out.push(e);
    }
    out
}

/// Simple moving average ending at each index; NaN before a full window.
fn sma(prices: &[f64], period: usize) -> Vec<f64> {
    (0..prices.len())
        .map(|t| {
            if t + 1 < period {
                f64::NAN
            } else {
                prices[t + 1 - period..=t].iter().sum::<f64>() / period as f64
            }
        })
        .collect()
}

/// Wilder-smoothed RSI; NaN before `period` price changes are available.
fn wilder_rsi(prices: &[f64], period: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; prices.len()];
    if prices.len() <= period {
        return out;
    }
    let change = |t: usize| prices[t] - prices[t - 1];
    let (mut gain, mut loss) = (0.0, 0.0);
    for t in 1..=period {
        let d = change(t);
        gain += d.max(0.0);
        loss += (-d).max(0.0);
    }
    let p = period as f64;
    gain /= p;
    loss /= p;
    let rsi = |g: f64, l: f64| {
        if g == 0.0 && l == 0.0 {
            50.0
        } else if l == 0.0 {
            100.0
        } else {
            100.0 - 100.0 / (1.0 + g / l)
        }
    };
    out[period] = rsi(gain, loss);
    for t in period + 1..prices.len() {
        let d = change(t);
        gain = (gain * (p - 1.0) + d.max(0.0)) / p;
        loss = (loss * (p - 1.0) + (-d).max(0.0)) / p;
        out[t] = rsi(gain, loss);
    }
    out
}

pub fn compute_indicators(panel: &PricePanel, cfg: &IndicatorConfig) -> Result<FeatureSet> {
    cfg.validate()?;
    let warmup = cfg.warmup();
    if panel.len() <= warmup {
        return Err(Error::InsufficientData(format!(
            "indicators need more than {warmup} days, panel has {}",
            panel.len()
        )));
    }
    let per_asset: Vec<Vec<Indicators>> = (0..panel.n_assets())
        .map(|i| {
            let p = panel.column(i);
            let fast = ema(&p, cfg.macd_fast);
            let slow = ema(&p, cfg.macd_slow);
            let rsi = wilder_rsi(&p, cfg.rsi_period);
            let s_short = sma(&p, cfg.sma_short);
            let s_long = sma(&p, cfg.sma_long);
            (0..p.len())
                .map(|t| Indicators {
                    macd: fast[t] - slow[t],
                    rsi: rsi[t],
                    sma_ratio_short: p[t] / s_short[t],
                    sma_ratio_long: p[t] / s_long[t],
                })
                .collect()
        })
        .collect();
    let values = (0..panel.len())
        .map(|t| per_asset.iter().map(|col| col[t]).collect())
        .collect();
    Ok(FeatureSet {
        tickers: panel.tickers().to_vec(),
        dates: panel.dates().to_vec(),
        values,
        warmup,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceWindow {
    pub as_of: NaiveDate,
    pub n: usize,
    /// Row-major `n x n`, ridge included.
    pub matrix: Vec<f64>,
}

impl CovarianceWindow {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    /// Lower triangle including the diagonal, row-major.
    pub fn lower_triangle(&self) -> Vec<f64> {
        (0..self.n)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect()
    }
}

/// Covariance over return rows `[end - window, end)`, plus the ridge.
pub fn covariance_window(rp: &ReturnPanel, end: usize, window: usize) -> Result<CovarianceWindow> {
    if window < 2 {
        return Err(Error::InvalidParameter(
            "covariance window must be >= 2".into(),
        ));
    }
    if end > rp.len() || end < window {
        return Err(Error::InsufficientData(format!(
            "covariance window of {window} ending at return {end} exceeds history of {}",
            rp.len()
        )));
    }
    let n = rp.n_assets();
    let mut matrix = linalg::sample_covariance(&rp.returns[end - window..end], n);
    for i in 0..n {
        matrix[i * n + i] += COVARIANCE_RIDGE;
    }
    Ok(CovarianceWindow {
        as_of: rp.dates[end - 1],
        n,
        matrix,
    })
}

/// One window per return date from index `window - 1` onward.
pub fn rolling_covariance(rp: &ReturnPanel, window: usize) -> Result<Vec<CovarianceWindow>> {
    if window < 2 {
        return Err(Error::InvalidParameter(
            "covariance window must be >= 2".into(),
        ));
    }
    if rp.len() < window {
        return Err(Error::InsufficientData(format!(
            "{} returns, covariance window needs {window}",
            rp.len()
        )));
    }
    (window..=rp.len())
        .map(|end| covariance_window(rp, end, window))
        .collect()
}

/// One simulated asset.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetSpec {
    pub ticker: String,
    pub params: GarchParams,
    /// Daily log-drift added to every return.
    pub drift: f64,
    pub initial_price: f64,
}

impl AssetSpec {
    pub fn new(ticker: impl Into<String>, params: GarchParams, drift: f64) -> Self {
        Self {
            ticker: ticker.into(),
            params,
            drift,
            initial_price: 100.0,
        }
    }
}

/// `days` weekdays starting at the first weekday on or after 2010-01-04.
pub fn business_days(days: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2010, 1, 4).expect("valid date");
    let mut out = Vec::with_capacity(days);
    while out.len() < days {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Simulates `days` prices per asset. Asset `k` (in input order) draws from
/// stream `k` of a ChaCha generator keyed by `seed`, so assets are
/// independent and each path is reproducible on its own.
pub fn simulate_garch_panel(specs: &[AssetSpec], days: usize, seed: u64) -> Result<PricePanel> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("no asset specs".into()));
    }
    if days < 2 {
        return Err(Error::InvalidParameter(
            "simulation needs at least 2 days".into(),
        ));
    }
    let mut cols: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (k, spec) in specs.iter().enumerate() {
        GarchParams::new(spec.params.omega, spec.params.alpha, spec.params.beta)?;
        if !(spec.initial_price > 0.0) || !spec.drift.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{}: initial price must be positive and drift finite",
                spec.ticker
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let path = simulate_path(spec, days, &mut rng);
        if cols.insert(spec.ticker.clone(), path).is_some() {
            return Err(Error::DuplicateTicker(spec.ticker.clone()));
        }
    }
    let prices = (0..days)
        .map(|t| cols.values().map(|c| c[t]).collect())
        .collect();
    PricePanel::new(cols.into_keys().collect(), business_days(days), prices)
}

fn simulate_path(spec: &AssetSpec, days: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let GarchParams { omega, alpha, beta } = spec.params;
    let mut sigma2 = spec.params.unconditional_variance();
    let mut p = spec.initial_price;
    let mut out = Vec::with_capacity(days);
    out.push(p);
    for _ in 1..days {
        let z: f64 = StandardNormal.sample(rng);
        let eps = sigma2.sqrt() * z;
        p *= (spec.drift + eps).exp();
        out.push(p);
        sigma2 = omega + alpha * eps * eps + beta * sigma2;
    }
    out
}

/// Expands one panel column into Yahoo-layout bars (open = previous close).
pub fn panel_to_series(panel: &PricePanel, asset: usize) -> PriceSeries {
    let col = panel.column(asset);
    let bars = col
        .iter()
        .enumerate()
        .map(|(t, &close)| {
            let open = if t == 0 { close } else { col[t - 1] };
            PriceBar {
                date: panel.dates()[t],
                open,
                high: open.max(close),
                low: open.min(close),
                close,
                adj_close: close,
                volume: 1_000_000,
            }
        })
        .collect();
    PriceSeries {
        ticker: panel.tickers()[asset].clone(),
        bars,
    }
}
