use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fxgame(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fxgame"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn fxgame")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fxgame(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    fxgame(dir, args).status.code().expect("exit code")
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap()
}

fn rewards(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

/// Hourly OHLC rows starting 2024-01-01T00:00:00, each 10 pipettes wide.
fn write_real_csv(path: &Path, rows: usize) {
    let mut text = String::from("time,open,high,low,close\n");
    for i in 0..rows {
        let base = 108_000 + (i as i64 % 40) * 3;
        let (d, h) = (1 + i / 24, i % 24);
        let p = |x: i64| format!("{}.{:05}", x / 100_000, x % 100_000);
        text.push_str(&format!(
            "2024-{:02}-{:02}T{h:02}:00:00,{},{},{},{}\n",
            1 + (d - 1) / 28,
            1 + (d - 1) % 28,
            p(base),
            p(base + 6),
            p(base - 4),
            p(base + 2)
        ));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn simulate_is_byte_identical_across_reruns() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["simulate", "--trades", "20000", "--seed", "7", "--out-dir", "a"]);
    ok(dir, &["simulate", "--trades", "20000", "--seed", "7", "--out-dir", "b"]);
    for name in ["trades.csv", "prices.csv", "rewards.json", "config.json"] {
        assert_eq!(fs::read(dir.join("a").join(name)).unwrap(), fs::read(dir.join("b").join(name)).unwrap(), "{name}");
    }
    let config = rewards(dir.join("a/config.json"));
    assert_eq!(config["seed"], 7);
    assert_eq!(config["n_trades"], 20000);
    assert_eq!(config["initial_price"], "1.08280");
}

#[test]
fn stdout_reports_market_reward_and_zero_sum() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(tmp.path(), &["simulate", "--trades", "500", "--seed", "3"]);
    let summary = rewards(tmp.path().join("rewards.json"));
    assert!(stdout.contains(&format!("intelligent_market_reward={}", summary["intelligent_market_reward"])));
    assert!(stdout.contains("zero_sum_ok=true"));
}

#[test]
fn zero_trades_gives_zero_market_reward() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["simulate", "--trades", "0", "--seed", "1"]);
    assert_eq!(read(tmp.path().join("trades.csv")).lines().count(), 1);
    let summary = rewards(tmp.path().join("rewards.json"));
    assert_eq!(summary["intelligent_market_reward"].to_string(), "0");
    assert_eq!(summary["zero_sum_ok"], true);
}

#[test]
fn script_replay_reproduces_worked_progression() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("moves.csv"), "trade_type,risk_appetite\n0,0.43\n0,0.56\n0,0.27\n").unwrap();
    ok(dir, &["simulate", "--trades", "3", "--script", "moves.csv"]);
    assert_eq!(read(dir.join("prices.csv")), "index,price\n0,1.08237\n1,1.08181\n2,1.08154\n");
    assert_eq!(rewards(dir.join("rewards.json"))["seed"], serde_json::Value::Null);

    assert_eq!(code(dir, &["simulate", "--trades", "4", "--script", "moves.csv", "--out-dir", "x"]), 3);
    assert!(!dir.join("x").exists());
}

#[test]
fn batch_mode_writes_one_directory_per_seed_in_order() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let stdout = ok(dir, &["simulate", "--trades", "2000", "--seed", "5", "--batch", "4", "--out-dir", "runs"]);
    let seeds: Vec<&str> = stdout.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(seeds, ["seed=5", "seed=6", "seed=7", "seed=8"]);

    ok(dir, &["simulate", "--trades", "2000", "--seed", "6", "--out-dir", "single"]);
    assert_eq!(
        fs::read(dir.join("runs/seed-6/trades.csv")).unwrap(),
        fs::read(dir.join("single/trades.csv")).unwrap()
    );
}

#[test]
fn resample_default_run_gives_55_bars() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["simulate", "--seed", "7", "--out-dir", "run7"]);
    let stdout = ok(dir, &["resample", "--prices", "run7/prices.csv", "--interval", "3600"]);
    assert!(stdout.contains("55 bars"));
    assert_eq!(read(dir.join("bars.csv")).lines().count(), 56);
    let sidecar = rewards(dir.join("bars.csv.config.json"));
    assert_eq!(sidecar["interval_len"], 3600);
}

#[test]
fn batches_over_705_rows_gives_ten_files() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write_real_csv(&dir.join("real.csv"), 705);
    ok(dir, &["batches", "--bars", "real.csv", "--len", "55", "--count", "10"]);
    for n in 1..=10 {
        let text = read(dir.join(format!("batches/batch_{n:02}.csv")));
        assert_eq!(text.lines().count(), 56, "batch {n}");
    }
    assert!(!dir.join("batches/batch_11.csv").exists());
    assert_eq!(code(dir, &["batches", "--bars", "real.csv", "--len", "55", "--count", "13", "--out-dir", "too_many"]), 3);
    assert!(!dir.join("too_many").exists());
}

#[test]
fn pipeline_compare_and_charts() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write_real_csv(&dir.join("real.csv"), 110);
    ok(dir, &["batches", "--bars", "real.csv", "--count", "2"]);
    ok(dir, &["simulate", "--trades", "30000", "--seed", "1", "--batch", "2", "--out-dir", "runs"]);
    for s in [1, 2] {
        let prices = format!("runs/seed-{s}/prices.csv");
        let out = format!("runs/seed-{s}/bars.csv");
        ok(dir, &["resample", "--prices", &prices, "--interval", "600", "--out", &out]);
    }
    ok(
        dir,
        &[
            "compare",
            "--synthetic",
            "runs/seed-1/bars.csv",
            "runs/seed-2/bars.csv",
            "--real",
            "batches/batch_01.csv",
            "batches/batch_02.csv",
            "--tables",
            "tables.csv",
        ],
    );
    let report = rewards(dir.join("comparison.json"));
    assert_eq!(report["synthetic"].as_array().unwrap().len(), 2);
    // Every generated real row deviates 6 pipettes up and 4 down.
    assert_eq!(report["summary"]["real"]["min"], 60);
    assert!(read(dir.join("tables.csv")).starts_with("Simulation No.,1,2\n"));

    ok(dir, &["chart", "candles", "--bars", "runs/seed-1/bars.csv"]);
    ok(dir, &["chart", "line", "--trades", "runs/seed-1/trades.csv", "--series", "open"]);
    ok(dir, &["chart", "pie", "--bars", "batches/batch_01.csv"]);
    let candles = read(dir.join("candles.svg"));
    assert_eq!(candles.matches("<g class=\"candle").count(), 50);
    assert!(read(dir.join("pie.svg")).contains("<svg"));
}

#[test]
fn pie_from_even_split_is_two_half_circles() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("split.json"), r#"{"pct_pos":50,"pct_neg":50,"total_pos":10,"total_neg":10}"#).unwrap();
    ok(dir, &["chart", "pie", "--split", "split.json"]);
    let svg = read(dir.join("pie.svg"));
    assert_eq!(svg.matches("data-angle=\"180\"").count(), 2, "{svg}");

    fs::write(dir.join("bad.json"), r#"{"pct_pos":70,"pct_neg":30,"total_pos":10,"total_neg":10}"#).unwrap();
    assert_eq!(code(dir, &["chart", "pie", "--split", "bad.json", "--out", "bad.svg"]), 3);
    assert!(!dir.join("bad.svg").exists());
}

#[test]
fn exit_codes_distinguish_parse_precondition_and_io() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert_eq!(code(dir, &["simulate", "--seed", "1", "--initial-price", "abc"]), 2);
    assert_eq!(code(dir, &["simulate", "--seed", "1", "--ppt", "0.0015"]), 3);
    assert_eq!(code(dir, &["resample", "--prices", "missing.csv"]), 4);

    fs::write(dir.join("prices.csv"), "index,price\n0,1.0\n1,oops\n").unwrap();
    assert_eq!(code(dir, &["resample", "--prices", "prices.csv"]), 2);
    fs::write(dir.join("prices.csv"), "index,price\n0,1.0\n").unwrap();
    assert_eq!(code(dir, &["resample", "--prices", "prices.csv", "--interval", "0"]), 3);

    fs::write(dir.join("real.csv"), "time,open,high,low,close\n2024-01-02T00:00:00,1,1,1,1\n2024-01-01T00:00:00,1,1,1,1\n").unwrap();
    assert_eq!(code(dir, &["ingest", "--input", "real.csv"]), 2);

    // Writing under a regular file fails at the filesystem.
    fs::write(dir.join("blocker"), "").unwrap();
    assert_eq!(code(dir, &["simulate", "--trades", "1", "--seed", "1", "--out-dir", "blocker/run"]), 4);
}

#[test]
fn failed_commands_leave_no_outputs() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("script.csv"), "trade_type,risk_appetite\n0,0.43\n1,1.50\n").unwrap();
    assert_eq!(code(dir, &["simulate", "--script", "script.csv", "--out-dir", "out"]), 2);
    assert_eq!(code(dir, &["simulate", "--initial-price", "0.00050", "--seed", "1", "--out-dir", "out"]), 3);
    assert!(!dir.join("out").exists());
    assert!(!dir.join("rewards.json").exists());
}

#[test]
fn help_lists_defaults() {
    let tmp = TempDir::new().unwrap();
    let help = ok(tmp.path(), &["simulate", "--help"]);
    for needle in ["200000", "1.0828", "0.001", "100000"] {
        assert!(help.contains(needle), "missing {needle} in\n{help}");
    }
    let batches = ok(tmp.path(), &["batches", "--help"]);
    assert!(batches.contains("[default: 55]") && batches.contains("[default: 10]"));
}
