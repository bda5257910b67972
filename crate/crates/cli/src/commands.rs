//! The pipeline steps. Each reads its inputs from the configured data and
//! output directories and writes its artifacts under the output directory.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use volpo_core::benchmarks::{equal_weight_backtest, index_backtest, mvo_backtest, StrategyLedger};
use volpo_core::garch::{classify_universe, score_returns, MIN_FIT_OBSERVATIONS};
use volpo_core::market_data::{
    align_panel, compute_indicators, load_csv, log_returns, panel_to_series, simulate_garch_panel,
    write_csv, AssetSpec,
};
use volpo_core::metrics;
use volpo_core::portfolio_env::run_from;
use volpo_core::ppo_agent::{evaluate, random_search, train, PolicyRule};
use volpo_core::{
    EpisodeLedger, FeatureSet, GarchParams, MetricSet, ParameterVector, PortfolioEnv, PricePanel,
    ReturnPanel, RiskClass, UniversePartition, VolatilityScore,
};

use crate::config::RunConfig;
use crate::formats::{self, ReportRow};
use crate::{say, CliError};

/// Table row order of the comparison.
pub const MODELS: [&str; 6] = [
    "Aggressive-DRL",
    "Moderate-DRL",
    "Conservative-DRL",
    "MVO",
    "Index-proxy",
    "Equal-Weighted",
];

pub fn drl_model_name(class: RiskClass) -> &'static str {
    match class {
        RiskClass::Aggressive => MODELS[0],
        RiskClass::Moderate => MODELS[1],
        RiskClass::Conservative => MODELS[2],
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

pub fn load_panel(cfg: &RunConfig) -> Result<PricePanel, CliError> {
    let path = out_path(cfg, formats::PANEL_FILE);
    if !path.exists() {
        return Err(CliError::Data(format!(
            "{} not found; run `ingest` first",
            path.display()
        )));
    }
    Ok(PricePanel::read_csv(path)?)
}

pub fn load_partition(cfg: &RunConfig) -> Result<UniversePartition, CliError> {
    let path = out_path(cfg, formats::PARTITION_FILE);
    if !path.exists() {
        return Err(CliError::Data(format!(
            "{} not found; run `classify` first",
            path.display()
        )));
    }
    formats::read_partition(&path)
}

/// Day indices of the two windows, shared by every sub-panel of one panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Windows {
    /// First day of the training window, before any warm-up adjustment.
    pub train_first: usize,
    pub train_start: usize,
    pub train_end: usize,
    pub test_start: usize,
    pub test_end: usize,
}

pub fn windows(panel: &PricePanel, cfg: &RunConfig, warmup: usize) -> Result<Windows, CliError> {
    let missing = |what: &str| CliError::Data(format!("no trading days inside the {what} window"));
    let train_first = panel
        .index_on_or_after(cfg.train_start)
        .ok_or_else(|| missing("train"))?;
    let train_end = panel
        .index_on_or_before(cfg.train_end)
        .ok_or_else(|| missing("train"))?;
    let test_start = panel
        .index_on_or_after(cfg.test_start)
        .ok_or_else(|| missing("test"))?;
    let test_end = panel
        .index_on_or_before(cfg.test_end)
        .ok_or_else(|| missing("test"))?;
    let train_start = train_first.max(warmup);
    if train_end <= train_start {
        return Err(CliError::Data(format!(
            "training window holds {} usable days after the {warmup}-day warm-up",
            (train_end + 1).saturating_sub(train_start)
        )));
    }
    if test_end <= test_start {
        return Err(missing("test"));
    }
    if test_start < warmup {
        return Err(CliError::Data(format!(
            "test window starts inside the {warmup}-day warm-up"
        )));
    }
    Ok(Windows {
        train_first,
        train_start,
        train_end,
        test_start,
        test_end,
    })
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<PricePanel, CliError> {
    let dir = &cfg.data_dir;
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if files.len() < 2 {
        return Err(CliError::Data(format!(
            "{}: need at least 2 ticker CSVs, found {}",
            dir.display(),
            files.len()
        )));
    }
    let loaded: Vec<_> = files.iter().map(load_csv).collect();
    let failures: Vec<String> = loaded
        .iter()
        .filter_map(|r| r.as_ref().err().map(|e| e.to_string()))
        .collect();
    if !failures.is_empty() {
        return Err(CliError::Data(format!(
            "{} corrupt file(s):\n  {}",
            failures.len(),
            failures.join("\n  ")
        )));
    }
    let series: Vec<_> = loaded.into_iter().map(|r| r.expect("checked")).collect();
    let panel = align_panel(&series)?;
    formats::write_atomic(&out_path(cfg, formats::PANEL_FILE), |buf| {
        Ok(panel.write_csv(buf)?)
    })?;
    say!(
        "ingested {} assets x {} days ({} .. {})",
        panel.n_assets(),
        panel.len(),
        panel.dates()[0],
        panel.dates()[panel.len() - 1]
    );
    Ok(panel)
}

/// Fits every asset on return rows `first .. upto` (returns dated up to day
/// `upto`) and splits the universe.
pub fn partition_at(
    rp: &ReturnPanel,
    first: usize,
    upto: usize,
    cfg: &RunConfig,
    warn: bool,
) -> Result<UniversePartition, CliError> {
    let results: Vec<_> = (0..rp.n_assets())
        .into_par_iter()
        .map(|i| {
            let col = rp.column(i);
            let window = col.get(first..upto).unwrap_or(&[]);
            if window.len() < MIN_FIT_OBSERVATIONS {
                return Err(volpo_core::Error::InsufficientData(format!(
                    "{} returns in the classification window, need {MIN_FIT_OBSERVATIONS}",
                    window.len()
                )));
            }
            score_returns(&rp.tickers[i], window, cfg.horizon)
        })
        .collect();
    let mut scores: Vec<VolatilityScore> = Vec::new();
    let mut failures = Vec::new();
    let mut numerical = true;
    for (ticker, r) in rp.tickers.iter().zip(results) {
        match r {
            Ok((fit, score)) => {
                if warn && !fit.converged {
                    eprintln!(
                        "warning: {ticker}: GARCH fit did not converge, using best point found"
                    );
                }
                scores.push(score);
            }
            Err(e) => {
                numerical &= e.is_numerical();
                failures.push(format!("{ticker}: {e}"));
            }
        }
    }
    if !failures.is_empty() {
        let msg = format!("GARCH fit failed for:\n  {}", failures.join("\n  "));
        return Err(if numerical {
            CliError::Numerical(msg)
        } else {
            CliError::Data(msg)
        });
    }
    Ok(classify_universe(&scores, cfg.k_top, cfg.k_bottom)?)
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<UniversePartition, CliError> {
    let panel = load_panel(cfg)?;
    let w = windows(&panel, cfg, 0)?;
    let rp = log_returns(&panel)?;
    let partition = partition_at(&rp, w.train_first, w.train_end, cfg, true)?;
    formats::write_partition(&out_path(cfg, formats::PARTITION_FILE), &partition)?;
    for class in RiskClass::ALL {
        say!("{class}: {}", partition.members(class).join(" "));
    }
    Ok(partition)
}

/// A sub-panel with its indicators, ready to wrap in an environment.
pub struct Market {
    pub panel: PricePanel,
    pub features: FeatureSet,
}

impl Market {
    pub fn new(panel: PricePanel, cfg: &RunConfig) -> Result<Self, CliError> {
        let features = compute_indicators(&panel, &cfg.indicators)?;
        Ok(Self { panel, features })
    }

    pub fn env(&self, cfg: &RunConfig) -> Result<PortfolioEnv<'_>, CliError> {
        Ok(PortfolioEnv::new(&self.panel, &self.features, cfg.env)?)
    }
}

fn class_market(
    panel: &PricePanel,
    partition: &UniversePartition,
    class: RiskClass,
    cfg: &RunConfig,
) -> Result<Market, CliError> {
    let members = partition.members(class);
    if members.is_empty() {
        return Err(CliError::Data(format!("class {class} has no members")));
    }
    Market::new(panel.select(&members)?, cfg)
}

pub fn cmd_train(cfg: &RunConfig, class: RiskClass) -> Result<Vec<ParameterVector>, CliError> {
    let panel = load_panel(cfg)?;
    let partition = load_partition(cfg)?;
    let market = class_market(&panel, &partition, class, cfg)?;
    let env = market.env(cfg)?;
    let w = windows(&market.panel, cfg, env.warmup())?;

    let runs: Vec<_> = (0..cfg.seeds)
        .into_par_iter()
        .map(|i| {
            let mut ppo = cfg.ppo_for(i);
            if cfg.search_trials > 0 {
                let (best, score) = random_search(&env, w.train_start, w.train_end, &ppo, cfg.search_trials, ppo.seed)?;
                eprintln!(
                    "{class} seed {i}: search picked lr={} clip={} rollout={} (in-sample Sharpe {score:.3})",
                    best.learning_rate, best.clip_eps, best.rollout_length
                );
                ppo = best;
            }
            train(&env, w.train_start, w.train_end, &ppo)
        })
        .collect();

    let mut params = Vec::with_capacity(cfg.seeds);
    let mut rows = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        let (p, report) = run?;
        let path = out_path(cfg, &formats::checkpoint_name(class, i));
        formats::write_atomic(&path, |buf| Ok(p.save(buf)?))?;
        say!(
            "{class} seed {i} (seed value {}): {} updates in {:.1}s -> {}",
            report.seed,
            report.updates.len(),
            report.wall_clock_secs,
            path.display()
        );
        rows.extend(report.updates.into_iter().map(|stats| ReportRow {
            class,
            seed: i,
            stats,
        }));
        params.push(p);
    }
    formats::merge_train_report(&out_path(cfg, formats::TRAIN_REPORT_FILE), class, rows)?;
    Ok(params)
}

/// Loads every checkpoint of `class`, naming all missing files at once.
pub fn load_checkpoints(
    cfg: &RunConfig,
    classes: &[RiskClass],
) -> Result<Vec<Vec<ParameterVector>>, CliError> {
    let mut missing = Vec::new();
    for &class in classes {
        for i in 0..cfg.seeds {
            let path = out_path(cfg, &formats::checkpoint_name(class, i));
            if !path.exists() {
                missing.push(path.display().to_string());
            }
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Data(format!(
            "missing checkpoints:\n  {}",
            missing.join("\n  ")
        )));
    }
    classes
        .iter()
        .map(|&class| {
            (0..cfg.seeds)
                .map(|i| {
                    let path = out_path(cfg, &formats::checkpoint_name(class, i));
                    let f = fs::File::open(&path)
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    ParameterVector::load(BufReader::new(f))
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
                })
                .collect()
        })
        .collect()
}

/// Holdings after the last trade of `ledger` drift into day `t`, keyed by ticker.
fn drifted_holdings(panel: &PricePanel, ledger: &EpisodeLedger, t: usize) -> Vec<(String, f64)> {
    let last = ledger.weights.last().expect("non-empty ledger");
    let grown: Vec<f64> = ledger
        .tickers
        .iter()
        .zip(last)
        .map(|(tk, w)| {
            let i = panel.ticker_index(tk).expect("ticker from this panel");
            w * panel.price(t, i) / panel.price(t - 1, i)
        })
        .collect();
    let total: f64 = grown.iter().sum();
    ledger
        .tickers
        .iter()
        .cloned()
        .zip(grown.into_iter().map(|g| g / total))
        .collect()
}

/// Out-of-sample run of one policy whose universe is re-partitioned every
/// `cfg.reclassify_days` days from the data known at that date. On a
/// membership change the book is moved to uniform over the new members,
/// paying the usual proportional cost on the turnover; otherwise the
/// drifted holding carries over.
pub fn evaluate_reclassified(
    panel: &PricePanel,
    params: &ParameterVector,
    class: RiskClass,
    cfg: &RunConfig,
    w: &Windows,
) -> Result<EpisodeLedger, CliError> {
    let rp = log_returns(panel)?;
    let step = cfg.reclassify_days.max(1);
    let mut ledger: Option<EpisodeLedger> = None;
    let mut s = w.test_start;
    while s < w.test_end {
        let seg_end = (s + step).min(w.test_end);
        let partition = partition_at(&rp, w.train_first, s, cfg, false)?;
        let market = class_market(panel, &partition, class, cfg)?;
        let env = market.env(cfg)?;
        let (state, transition) = match &ledger {
            None => (env.reset(s, seg_end)?, 0.0),
            Some(prev) => {
                let wealth = prev.terminal_wealth();
                let held = drifted_holdings(panel, prev, s);
                let members = market.panel.tickers();
                if held.iter().map(|(t, _)| t).eq(members.iter()) {
                    let weights = held.into_iter().map(|(_, x)| x).collect();
                    (env.reset_with(s, seg_end, wealth, weights)?, 0.0)
                } else {
                    let u = 1.0 / members.len() as f64;
                    let mut turnover: f64 = held
                        .iter()
                        .map(|(t, x)| {
                            if members.contains(t) {
                                (x - u).abs()
                            } else {
                                *x
                            }
                        })
                        .sum();
                    turnover += members
                        .iter()
                        .filter(|m| !held.iter().any(|(t, _)| t == *m))
                        .count() as f64
                        * u;
                    let cost = cfg.env.cost_rate * turnover * wealth;
                    let uniform = vec![u; members.len()];
                    (env.reset_with(s, seg_end, wealth - cost, uniform)?, cost)
                }
            }
        };
        let segment = run_from(&env, &mut PolicyRule { params }, state)?;
        match ledger.as_mut() {
            None => ledger = Some(segment),
            Some(l) => l.extend(&segment, transition)?,
        }
        s = seg_end;
    }
    ledger.ok_or_else(|| CliError::Data("empty test window".into()))
}

fn evaluate_drl(
    panel: &PricePanel,
    partition: &UniversePartition,
    params: &ParameterVector,
    class: RiskClass,
    cfg: &RunConfig,
) -> Result<EpisodeLedger, CliError> {
    if cfg.reclassify_days > 0 {
        let market = class_market(panel, partition, class, cfg)?;
        let w = windows(panel, cfg, market.env(cfg)?.warmup())?;
        return evaluate_reclassified(panel, params, class, cfg, &w);
    }
    let market = class_market(panel, partition, class, cfg)?;
    let env = market.env(cfg)?;
    let w = windows(&market.panel, cfg, env.warmup())?;
    Ok(evaluate(params, &env, w.test_start, w.test_end)?)
}

pub fn run_benchmarks(
    panel: &PricePanel,
    cfg: &RunConfig,
) -> Result<Vec<StrategyLedger>, CliError> {
    let market = Market::new(panel.clone(), cfg)?;
    let env = market.env(cfg)?;
    let w = windows(panel, cfg, env.warmup())?;
    let (a, b, c) = (
        mvo_backtest(&env, w.test_start, w.test_end, &cfg.mvo)?,
        index_backtest(&env, w.test_start, w.test_end)?,
        equal_weight_backtest(&env, w.test_start, w.test_end)?,
    );
    Ok(vec![a, b, c])
}

/// Parses a model name as used in reports, case-insensitively; bare class
/// names select the DRL model of that class.
pub fn parse_model(name: &str) -> Result<&'static str, CliError> {
    let lower = name.to_ascii_lowercase();
    if let Ok(class) = lower.trim_end_matches("-drl").parse::<RiskClass>() {
        return Ok(drl_model_name(class));
    }
    match lower.as_str() {
        "mvo" => Ok(MODELS[3]),
        "index-proxy" | "index" => Ok(MODELS[4]),
        "equal-weighted" | "equal" => Ok(MODELS[5]),
        _ => Err(CliError::Usage(format!(
            "unknown model `{name}`; expected one of {}",
            MODELS.join(", ")
        ))),
    }
}

fn model_class(model: &str) -> Option<RiskClass> {
    RiskClass::ALL
        .into_iter()
        .find(|c| drl_model_name(*c) == model)
}

fn write_ledger_files(cfg: &RunConfig, stem: &str, ledger: &EpisodeLedger) -> Result<(), CliError> {
    formats::write_atomic(&out_path(cfg, &format!("ledger_{stem}.csv")), |buf| {
        Ok(ledger.write_csv(buf)?)
    })?;
    formats::write_atomic(&out_path(cfg, &format!("weights_{stem}.csv")), |buf| {
        Ok(ledger.write_weights_csv(buf)?)
    })
}

fn print_metrics(label: &str, m: &MetricSet) {
    let sharpe = m
        .sharpe
        .map_or_else(|| "NA".to_string(), |s| format!("{s:.3}"));
    say!(
        "{label:<24} annual {:>8.3}%  cumulative {:>8.3}%  sharpe {sharpe:>7}  max-dd {:>7.3}%  vol {:>7.3}%",
        m.annual_return, m.cumulative_return, m.max_drawdown, m.annual_volatility
    );
}

/// Runs one model over the test window and writes its daily ledger and
/// weights. DRL models write one pair of files per seed.
pub fn cmd_backtest(cfg: &RunConfig, model: &str) -> Result<Vec<EpisodeLedger>, CliError> {
    let model = parse_model(model)?;
    let panel = load_panel(cfg)?;
    let ledgers: Vec<(String, EpisodeLedger)> = match model_class(model) {
        Some(class) => {
            let partition = load_partition(cfg)?;
            let params = load_checkpoints(cfg, &[class])?.remove(0);
            params
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    Ok((
                        format!("{model}_seed{i}"),
                        evaluate_drl(&panel, &partition, p, class, cfg)?,
                    ))
                })
                .collect::<Result<_, CliError>>()?
        }
        None => run_benchmarks(&panel, cfg)?
            .into_iter()
            .filter(|s| s.name == model)
            .map(|s| (s.name, s.ledger))
            .collect(),
    };
    let mut out = Vec::new();
    for (stem, ledger) in ledgers {
        write_ledger_files(cfg, &stem, &ledger)?;
        print_metrics(&stem, &metrics::compute(&ledger, cfg.risk_free_rate)?);
        out.push(ledger);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    /// `(model, averaged metrics)` in table order.
    pub rows: Vec<(String, MetricSet)>,
    /// `(model, seed index, metrics)` for every DRL run.
    pub per_seed: Vec<(String, usize, MetricSet)>,
    /// Per-model cumulative return in percent on each test date; DRL
    /// series are averaged over seeds.
    pub cumulative: Vec<(String, Vec<f64>)>,
    pub dates: Vec<chrono::NaiveDate>,
}

fn check_same_terms(ledgers: &[&EpisodeLedger]) -> Result<(), CliError> {
    let first = ledgers[0];
    for l in &ledgers[1..] {
        if l.dates != first.dates
            || l.cost_rate != first.cost_rate
            || l.initial_capital != first.initial_capital
        {
            return Err(CliError::Data(
                "strategies disagree on test window, cost rate or capital".into(),
            ));
        }
    }
    Ok(())
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareReport, CliError> {
    let panel = load_panel(cfg)?;
    let partition = load_partition(cfg)?;
    let checkpoints = load_checkpoints(cfg, &RiskClass::ALL)?;

    let jobs: Vec<(usize, usize)> = (0..3)
        .flat_map(|c| (0..cfg.seeds).map(move |s| (c, s)))
        .collect();
    let drl: Vec<EpisodeLedger> = jobs
        .par_iter()
        .map(|&(c, s)| {
            evaluate_drl(
                &panel,
                &partition,
                &checkpoints[c][s],
                RiskClass::ALL[c],
                cfg,
            )
        })
        .collect::<Result<_, _>>()?;
    let benchmarks = run_benchmarks(&panel, cfg)?;

    let mut all: Vec<&EpisodeLedger> = drl.iter().collect();
    all.extend(benchmarks.iter().map(|s| &s.ledger));
    check_same_terms(&all)?;

    let mut report = CompareReport {
        rows: Vec::new(),
        per_seed: Vec::new(),
        cumulative: Vec::new(),
        dates: benchmarks[0].ledger.dates.clone(),
    };
    for (c, class) in RiskClass::ALL.into_iter().enumerate() {
        let name = drl_model_name(class).to_string();
        let runs = &drl[c * cfg.seeds..(c + 1) * cfg.seeds];
        let sets = runs
            .iter()
            .map(|l| metrics::compute(l, cfg.risk_free_rate))
            .collect::<Result<Vec<_>, _>>()?;
        for (s, m) in sets.iter().enumerate() {
            report.per_seed.push((name.clone(), s, *m));
        }
        report.rows.push((name.clone(), metrics::average(&sets)?));
        let days = report.dates.len();
        let mean: Vec<f64> = (0..days)
            .map(|k| {
                runs.iter()
                    .map(|l| l.cumulative_return_pct()[k])
                    .sum::<f64>()
                    / cfg.seeds as f64
            })
            .collect();
        report.cumulative.push((name, mean));
    }
    for s in &benchmarks {
        report.rows.push((
            s.name.clone(),
            metrics::compute(&s.ledger, cfg.risk_free_rate)?,
        ));
        report
            .cumulative
            .push((s.name.clone(), s.ledger.cumulative_return_pct()));
    }

    formats::write_metrics(&out_path(cfg, formats::METRICS_FILE), &report.rows)?;
    formats::write_seed_metrics(&out_path(cfg, formats::SEED_METRICS_FILE), &report.per_seed)?;
    for (model, series) in &report.cumulative {
        formats::write_cumret(
            &out_path(cfg, &formats::cumret_name(model)),
            &report.dates,
            series,
        )?;
    }
    for (model, m) in &report.rows {
        print_metrics(model, m);
    }
    Ok(report)
}

/// Reads `ticker,omega,alpha,beta,drift[,initial_price]` lines; a first
/// line starting with `ticker` is taken as a header.
pub fn read_asset_specs(path: &Path) -> Result<Vec<AssetSpec>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut specs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty()
            || line.starts_with('#')
            || (no == 0 && line.to_ascii_lowercase().starts_with("ticker"))
        {
            continue;
        }
        let bad = |m: String| CliError::Usage(format!("{}: line {}: {m}", path.display(), no + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(5..=6).contains(&f.len()) {
            return Err(bad(
                "expected ticker,omega,alpha,beta,drift[,initial_price]".into(),
            ));
        }
        let num = |k: usize| {
            f[k].parse::<f64>()
                .map_err(|_| bad(format!("bad number `{}`", f[k])))
        };
        let params = GarchParams::new(num(1)?, num(2)?, num(3)?).map_err(|e| bad(e.to_string()))?;
        let mut spec = AssetSpec::new(f[0], params, num(4)?);
        if f.len() == 6 {
            spec.initial_price = num(5)?;
        }
        specs.push(spec);
    }
    if specs.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no asset specs",
            path.display()
        )));
    }
    Ok(specs)
}

pub fn cmd_simulate(
    cfg: &RunConfig,
    specs: &[AssetSpec],
    days: usize,
    seed: u64,
) -> Result<PricePanel, CliError> {
    let panel =
        simulate_garch_panel(specs, days, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    for i in 0..panel.n_assets() {
        let series = panel_to_series(&panel, i);
        let path = cfg.data_dir.join(format!("{}.csv", series.ticker));
        formats::write_atomic(&path, |buf| Ok(write_csv(&series, buf)?))?;
    }
    say!(
        "simulated {} assets x {days} days into {}",
        panel.n_assets(),
        cfg.data_dir.display()
    );
    Ok(panel)
}
