use std::fs;
use std::path::Path;

use volpo_cli::commands::{
    cmd_backtest, cmd_classify, cmd_compare, cmd_ingest, cmd_simulate, cmd_train, read_asset_specs,
    MODELS,
};
use volpo_cli::{formats, run, CliError, RunConfig};
use volpo_core::market_data::AssetSpec;
use volpo_core::{GarchParams, RiskClass};

fn specs(n: usize) -> Vec<AssetSpec> {
    (0..n)
        .map(|i| {
            let vol = 0.005 + 0.001 * i as f64;
            let p = GarchParams::new(vol * vol * 0.05, 0.05, 0.9).unwrap();
            AssetSpec::new(format!("T{i:02}"), p, 0.0003)
        })
        .collect()
}

fn config(root: &Path) -> RunConfig {
    let mut cfg = RunConfig {
        data_dir: root.join("data"),
        out_dir: root.join("out"),
        seeds: 2,
        ..Default::default()
    };
    cfg.apply_text(
        "train_start = 2010-01-01\ntrain_end = 2011-12-31\ntest_start = 2012-01-01\ntest_end = 2012-12-31\n\
         total_updates = 2\nrollout_length = 32\nminibatch_size = 16\nepochs_per_update = 2\nhidden = 8\n",
    )
    .unwrap();
    cfg
}

fn prepared(root: &Path, n: usize, k: usize) -> RunConfig {
    let mut cfg = config(root);
    cfg.k_top = k;
    cfg.k_bottom = k;
    cmd_simulate(&cfg, &specs(n), 780, 1).unwrap();
    cmd_ingest(&cfg).unwrap();
    cfg
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ca, cb) = (config(a.path()), config(b.path()));
    cmd_simulate(&ca, &specs(3), 300, 9).unwrap();
    cmd_simulate(&cb, &specs(3), 300, 9).unwrap();
    for i in 0..3 {
        let name = format!("T{i:02}.csv");
        let x = fs::read(ca.data_dir.join(&name)).unwrap();
        assert_eq!(x, fs::read(cb.data_dir.join(&name)).unwrap());
    }
    cmd_simulate(&cb, &specs(3), 300, 10).unwrap();
    assert_ne!(
        fs::read(ca.data_dir.join("T00.csv")).unwrap(),
        fs::read(cb.data_dir.join("T00.csv")).unwrap()
    );
}

#[test]
fn asset_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("specs.csv");
    fs::write(
        &path,
        "ticker,omega,alpha,beta,drift\nAAA,1e-6,0.05,0.9,0.0001\nBBB,2e-6,0.1,0.8,0,50\n",
    )
    .unwrap();
    let s = read_asset_specs(&path).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!((s[1].ticker.as_str(), s[1].initial_price), ("BBB", 50.0));
    fs::write(&path, "AAA,1e-6,0.5,0.6,0\n").unwrap();
    assert!(matches!(read_asset_specs(&path), Err(CliError::Usage(_))));
}

#[test]
fn ingest_needs_two_files_and_rejects_corrupt_ones() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    cmd_simulate(&cfg, &specs(1), 50, 1).unwrap();
    assert!(matches!(cmd_ingest(&cfg), Err(CliError::Data(_))));

    cmd_simulate(&cfg, &specs(3), 50, 1).unwrap();
    fs::write(
        cfg.data_dir.join("BAD.csv"),
        "Date,Open,High,Low,Close,Adj Close,Volume\nnot-a-date,1,1,1,1,1,1\n",
    )
    .unwrap();
    let err = cmd_ingest(&cfg).unwrap_err().to_string();
    assert!(err.contains("BAD.csv"), "{err}");
    assert!(!cfg.out_dir.join(formats::PANEL_FILE).exists());

    fs::remove_file(cfg.data_dir.join("BAD.csv")).unwrap();
    let panel = cmd_ingest(&cfg).unwrap();
    assert_eq!(panel.n_assets(), 3);
    assert!(cfg.out_dir.join(formats::PANEL_FILE).exists());
}

#[test]
fn classify_split_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = prepared(dir.path(), 5, 1);
    let p = cmd_classify(&cfg).unwrap();
    let sizes = RiskClass::ALL.map(|c| p.members(c).len());
    assert_eq!(sizes, [1, 3, 1]);
    let text = fs::read_to_string(cfg.out_dir.join(formats::PARTITION_FILE)).unwrap();
    assert_eq!(text.lines().count(), 5);
    let vols: Vec<f64> = text
        .lines()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(vols.windows(2).all(|w| w[0] >= w[1]));

    cfg.k_top = 3;
    cfg.k_bottom = 2;
    assert!(matches!(cmd_classify(&cfg), Err(CliError::Data(_))));
}

#[test]
fn training_is_reproducible_and_reports_every_update() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = prepared(dir.path(), 6, 2);
    cmd_classify(&cfg).unwrap();
    let first = cmd_train(&cfg, RiskClass::Moderate).unwrap();
    let bytes = fs::read(cfg.out_dir.join("moderate_seed1.params")).unwrap();
    let again = cmd_train(&cfg, RiskClass::Moderate).unwrap();
    assert_eq!(first, again);
    assert_eq!(
        bytes,
        fs::read(cfg.out_dir.join("moderate_seed1.params")).unwrap()
    );
    assert_ne!(first[0], first[1]);

    let rows = formats::read_train_report(&cfg.out_dir.join(formats::TRAIN_REPORT_FILE)).unwrap();
    assert_eq!(rows.len(), cfg.seeds * cfg.ppo.total_updates);
    assert!(rows
        .iter()
        .all(|r| r.class == RiskClass::Moderate && r.stats.mean_reward.is_finite()));
}

#[test]
fn compare_names_missing_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = prepared(dir.path(), 6, 2);
    cmd_classify(&cfg).unwrap();
    cmd_train(&cfg, RiskClass::Aggressive).unwrap();
    let err = cmd_compare(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(
        msg.contains("moderate_seed0.params") && msg.contains("conservative_seed1.params"),
        "{msg}"
    );
    assert!(!msg.contains("aggressive_seed0"), "{msg}");
}

#[test]
fn compare_writes_table_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = prepared(dir.path(), 9, 3);
    cmd_classify(&cfg).unwrap();
    for class in RiskClass::ALL {
        cmd_train(&cfg, class).unwrap();
    }
    let report = cmd_compare(&cfg).unwrap();
    let names: Vec<&str> = report.rows.iter().map(|r| r.0.as_str()).collect();
    assert_eq!(names, MODELS);
    assert_eq!(report.per_seed.len(), 3 * cfg.seeds);

    let metrics = fs::read_to_string(cfg.out_dir.join(formats::METRICS_FILE)).unwrap();
    assert_eq!(metrics.lines().count(), 7);
    for model in MODELS {
        let series = fs::read_to_string(cfg.out_dir.join(formats::cumret_name(model))).unwrap();
        let mut lines = series.lines();
        assert_eq!(lines.next(), Some("date,cumulative_return_pct"));
        assert_eq!(lines.next(), Some("2012-01-02,0"));
    }

    // the benchmark rows do not depend on anything random
    let again = cmd_compare(&cfg).unwrap();
    assert_eq!(report.rows[3..], again.rows[3..]);

    cfg.reclassify_days = 63;
    let moving = cmd_compare(&cfg).unwrap();
    assert_eq!(moving.rows[3..], report.rows[3..]);
    assert_eq!(moving.dates, report.dates);

    let ledgers = cmd_backtest(&cfg, "equal").unwrap();
    assert_eq!(ledgers.len(), 1);
    assert!(cfg.out_dir.join("ledger_Equal-Weighted.csv").exists());
    let drl = cmd_backtest(&cfg, "Conservative-DRL").unwrap();
    assert_eq!(drl.len(), cfg.seeds);
    assert!(cfg
        .out_dir
        .join("weights_Conservative-DRL_seed1.csv")
        .exists());
    assert!(matches!(
        cmd_backtest(&cfg, "nonsense"),
        Err(CliError::Usage(_))
    ));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(run(["volpo", "-q", "classify", "--out", out]), 2);
    assert_eq!(
        run(["volpo", "-q", "compare", "--config", "/nonexistent.conf"]),
        1
    );
    assert_eq!(run(["volpo", "-q", "train"]), 1);
    assert_eq!(run(["volpo", "--version"]), 0);
}
