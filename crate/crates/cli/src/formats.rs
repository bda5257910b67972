//! Artifact files under the output directory. Every write goes to a
//! temporary sibling first and is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use volpo_core::market_data::DATE_FORMAT;
use volpo_core::ppo_agent::UpdateStats;
use volpo_core::{MetricSet, RiskClass, UniversePartition};

use crate::CliError;

pub const PANEL_FILE: &str = "panel.csv";
pub const PARTITION_FILE: &str = "partition.csv";
pub const TRAIN_REPORT_FILE: &str = "train_report.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SEED_METRICS_FILE: &str = "metrics_per_seed.csv";

pub fn checkpoint_name(class: RiskClass, seed_index: usize) -> String {
    format!("{class}_seed{seed_index}.params")
}

pub fn cumret_name(model: &str) -> String {
    format!("cumret_{model}.csv")
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Builds the file in memory, then writes `<path>.tmp` and renames it over
/// `path`, so readers never see a half-written artifact.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(&buf).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Headerless `<TICKER>,<annual_vol>,<class>` lines in ranked order.
pub fn write_partition(path: &Path, p: &UniversePartition) -> Result<(), CliError> {
    write_atomic(path, |buf| {
        for (ticker, vol, class) in p.rows() {
            writeln!(buf, "{ticker},{vol},{class}").expect("write to Vec");
        }
        Ok(())
    })
}

pub fn read_partition(path: &Path) -> Result<UniversePartition, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| CliError::Data(format!("{}: line {}: {m}", path.display(), no + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [ticker, vol, class] = fields[..] else {
            return Err(bad("expected `<TICKER>,<annual_vol>,<class>`"));
        };
        let vol: f64 = vol.parse().map_err(|_| bad("bad volatility"))?;
        let class: RiskClass = class.parse().map_err(|_| bad("bad class"))?;
        rows.push((ticker.to_string(), vol, class));
    }
    Ok(UniversePartition::from_rows(rows)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub class: RiskClass,
    pub seed: usize,
    pub stats: UpdateStats,
}

const REPORT_HEADER: [&str; 8] = [
    "class",
    "seed",
    "update",
    "mean_reward",
    "surrogate",
    "value_loss",
    "entropy",
    "clip_fraction",
];

pub fn read_train_report(path: &Path) -> Result<Vec<ReportRow>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let bad = |e: String| CliError::Data(format!("{}: {e}", path.display()));
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != REPORT_HEADER {
        return Err(bad("unexpected train report header".into()));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |k: usize| -> Result<f64, CliError> {
            rec[k]
                .parse()
                .map_err(|_| bad(format!("bad number `{}`", &rec[k])))
        };
        rows.push(ReportRow {
            class: rec[0]
                .parse()
                .map_err(|_| bad(format!("bad class `{}`", &rec[0])))?,
            seed: rec[1]
                .parse()
                .map_err(|_| bad(format!("bad seed `{}`", &rec[1])))?,
            stats: UpdateStats {
                update: rec[2]
                    .parse()
                    .map_err(|_| bad(format!("bad update `{}`", &rec[2])))?,
                mean_reward: f(3)?,
                surrogate: f(4)?,
                value_loss: f(5)?,
                entropy: f(6)?,
                clip_fraction: f(7)?,
            },
        });
    }
    Ok(rows)
}

/// Replaces the rows of `class` in the report (creating it if absent).
pub fn merge_train_report(
    path: &Path,
    class: RiskClass,
    fresh: Vec<ReportRow>,
) -> Result<(), CliError> {
    let mut rows = if path.exists() {
        read_train_report(path)?
    } else {
        Vec::new()
    };
    rows.retain(|r| r.class != class);
    rows.extend(fresh);
    rows.sort_by_key(|r| (r.class, r.seed, r.stats.update));
    write_atomic(path, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let wrap = |e: csv::Error| CliError::Data(e.to_string());
        w.write_record(REPORT_HEADER).map_err(wrap)?;
        for r in &rows {
            let s = &r.stats;
            w.write_record([
                r.class.to_string(),
                r.seed.to_string(),
                s.update.to_string(),
                s.mean_reward.to_string(),
                s.surrogate.to_string(),
                s.value_loss.to_string(),
                s.entropy.to_string(),
                s.clip_fraction.to_string(),
            ])
            .map_err(wrap)?;
        }
        w.flush().map_err(|e| CliError::Data(e.to_string()))
    })
}

fn fmt_metric(x: f64) -> String {
    format!("{x:.6}")
}

fn metric_fields(m: &MetricSet) -> [String; 5] {
    [
        fmt_metric(m.annual_return),
        fmt_metric(m.cumulative_return),
        m.sharpe.map_or_else(|| "NA".to_string(), fmt_metric),
        fmt_metric(m.max_drawdown),
        fmt_metric(m.annual_volatility),
    ]
}

const METRIC_COLUMNS: [&str; 5] = [
    "annual_return",
    "cumulative_return",
    "sharpe",
    "max_drawdown",
    "annual_volatility",
];

/// One row per model; an undefined Sharpe ratio is written as `NA`.
pub fn write_metrics(path: &Path, rows: &[(String, MetricSet)]) -> Result<(), CliError> {
    write_atomic(path, |buf| {
        writeln!(buf, "model,{}", METRIC_COLUMNS.join(",")).expect("write to Vec");
        for (model, m) in rows {
            writeln!(buf, "{model},{}", metric_fields(m).join(",")).expect("write to Vec");
        }
        Ok(())
    })
}

pub fn write_seed_metrics(
    path: &Path,
    rows: &[(String, usize, MetricSet)],
) -> Result<(), CliError> {
    write_atomic(path, |buf| {
        writeln!(buf, "model,seed,{}", METRIC_COLUMNS.join(",")).expect("write to Vec");
        for (model, seed, m) in rows {
            writeln!(buf, "{model},{seed},{}", metric_fields(m).join(",")).expect("write to Vec");
        }
        Ok(())
    })
}

pub fn write_cumret(path: &Path, dates: &[NaiveDate], pct: &[f64]) -> Result<(), CliError> {
    write_atomic(path, |buf| {
        writeln!(buf, "date,cumulative_return_pct").expect("write to Vec");
        for (d, p) in dates.iter().zip(pct) {
            writeln!(buf, "{},{p}", d.format(DATE_FORMAT)).expect("write to Vec");
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use volpo_core::garch::classify_universe;
    use volpo_core::VolatilityScore;

    fn partition() -> UniversePartition {
        let scores: Vec<VolatilityScore> =
            [("A", 0.3), ("B", 0.1), ("C", 0.2), ("D", 0.25), ("E", 0.15)]
                .iter()
                .map(|(t, v)| VolatilityScore {
                    ticker: t.to_string(),
                    annual_vol: *v,
                })
                .collect();
        classify_universe(&scores, 1, 1).unwrap()
    }

    #[test]
    fn partition_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(PARTITION_FILE);
        let p = partition();
        write_partition(&path, &p).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "A,0.3,aggressive");
        assert_eq!(text.lines().last().unwrap(), "B,0.1,conservative");
        assert_eq!(read_partition(&path).unwrap(), p);
        assert!(!dir.path().join("partition.csv.tmp").exists());
    }

    #[test]
    fn report_merge_replaces_one_class() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(TRAIN_REPORT_FILE);
        let row = |class, seed, update| ReportRow {
            class,
            seed,
            stats: UpdateStats {
                update,
                mean_reward: 0.5,
                surrogate: 0.1,
                value_loss: 0.2,
                entropy: 1.0,
                clip_fraction: 0.25,
            },
        };
        merge_train_report(
            &path,
            RiskClass::Moderate,
            vec![row(RiskClass::Moderate, 0, 0)],
        )
        .unwrap();
        merge_train_report(
            &path,
            RiskClass::Aggressive,
            vec![
                row(RiskClass::Aggressive, 1, 0),
                row(RiskClass::Aggressive, 0, 0),
            ],
        )
        .unwrap();
        merge_train_report(
            &path,
            RiskClass::Moderate,
            vec![row(RiskClass::Moderate, 2, 5)],
        )
        .unwrap();
        let rows = read_train_report(&path).unwrap();
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.class, r.seed, r.stats.update))
            .collect();
        assert_eq!(
            keys,
            vec![
                (RiskClass::Aggressive, 0, 0),
                (RiskClass::Aggressive, 1, 0),
                (RiskClass::Moderate, 2, 5)
            ]
        );
    }

    #[test]
    fn metrics_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(METRICS_FILE);
        let m = MetricSet {
            annual_return: 1.0,
            cumulative_return: 2.0,
            sharpe: None,
            max_drawdown: 3.0,
            annual_volatility: 4.5,
        };
        write_metrics(&path, &[("MVO".into(), m)]).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "model,annual_return,cumulative_return,sharpe,max_drawdown,annual_volatility\n\
             MVO,1.000000,2.000000,NA,3.000000,4.500000\n"
        );
    }
}
