//! End-to-end runs of the `tradebench` binary: artifacts, exit codes,
//! determinism, and golden output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tradebench"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success for {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

struct Sandbox {
    _tmp: TempDir,
    root: PathBuf,
}

impl Sandbox {
    fn new() -> Self {
        let tmp = TempDir::new().unwrap();
        let root = tmp.path().to_path_buf();
        run_ok(&["synth-data", "--out", &root.join("data").to_string_lossy()]);
        Sandbox { _tmp: tmp, root }
    }

    fn data(&self, name: &str) -> String {
        self.root
            .join("data")
            .join(name)
            .to_string_lossy()
            .to_string()
    }

    fn out(&self, name: &str) -> String {
        self.root.join(name).to_string_lossy().to_string()
    }
}

fn artifact_in(dir: &Path) -> PathBuf {
    let mut runs: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            p.file_name()
                .map(|n| n.to_string_lossy().starts_with("run-"))
                .unwrap_or(false)
        })
        .collect();
    runs.sort();
    assert_eq!(
        runs.len(),
        1,
        "expected exactly one run artifact in {dir:?}"
    );
    runs.remove(0)
}

#[test]
fn backtest_reproduces_the_reference_trend() {
    let sandbox = Sandbox::new();
    let out = run_ok(&[
        "backtest",
        "--market",
        &sandbox.data("eth_market.csv"),
        "--asset",
        "ETH",
        "--split",
        "bullish",
        "--strategy",
        "buy_and_hold",
        "--fee",
        "0",
        "--out",
        &sandbox.out("out"),
    ]);
    let text = stdout(&out);
    assert!(text.contains("ETH bullish buy_and_hold"), "{text}");
    assert!(text.contains("total_return 22.79%"), "{text}");

    let artifact_path = artifact_in(&sandbox.root.join("out"));
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&artifact_path).unwrap()).unwrap();
    let total = artifact["summary"]["total_return_pct"].as_f64().unwrap();
    assert!((total - 22.59).abs() <= 0.5, "total {total}");
    assert_eq!(artifact["schema_version"], 1);
    assert_eq!(artifact["config"]["asset"], "ETH");
    assert_eq!(artifact["config"]["seed"], 0);
}

#[test]
fn identical_configs_write_identical_artifacts() {
    let sandbox = Sandbox::new();
    let args = [
        "backtest",
        "--market",
        &sandbox.data("btc_market.csv"),
        "--asset",
        "BTC",
        "--split",
        "sideways",
        "--strategy",
        "sma:window=10",
        "--out",
        &sandbox.out("out"),
    ];
    run_ok(&args);
    let path = artifact_in(&sandbox.root.join("out"));
    let first = std::fs::read(&path).unwrap();
    run_ok(&args);
    let second = std::fs::read(&path).unwrap();
    assert_eq!(first, second);
}

#[test]
fn rerun_from_artifact_is_byte_identical() {
    let sandbox = Sandbox::new();
    run_ok(&[
        "backtest",
        "--market",
        &sandbox.data("sol_market.csv"),
        "--asset",
        "SOL",
        "--split",
        "bearish",
        "--strategy",
        "macd",
        "--out",
        &sandbox.out("out"),
    ]);
    let path = artifact_in(&sandbox.root.join("out"));
    let first = std::fs::read(&path).unwrap();
    run_ok(&["backtest", "--from-artifact", &path.to_string_lossy()]);
    let second = std::fs::read(&path).unwrap();
    assert_eq!(first, second);
}

#[test]
fn missing_data_file_exits_2_with_machine_readable_error() {
    let sandbox = Sandbox::new();
    let out = bin()
        .args([
            "backtest",
            "--market",
            &sandbox.out("missing.csv"),
            "--asset",
            "ETH",
            "--split",
            "bullish",
            "--out",
            &sandbox.out("out"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().next().unwrap();
    let parsed: serde_json::Value = serde_json::from_str(line).unwrap();
    assert_eq!(parsed["error"]["code"], 2);
    assert!(parsed["error"]["message"]
        .as_str()
        .unwrap()
        .contains("missing.csv"));
}

#[test]
fn tune_slma_evaluates_ten_specs_and_caches_the_choice() {
    let sandbox = Sandbox::new();
    run_ok(&[
        "tune",
        "--market",
        &sandbox.data("eth_market.csv"),
        "--asset",
        "ETH",
        "--split",
        "validation",
        "--kind",
        "slma",
        "--out",
        &sandbox.out("out"),
    ]);
    let dir = sandbox.root.join("out");
    let tune_path = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            p.file_name()
                .unwrap()
                .to_string_lossy()
                .starts_with("tune-")
        })
        .expect("tune artifact written");
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&tune_path).unwrap()).unwrap();
    assert_eq!(artifact["report"]["scores"].as_array().unwrap().len(), 10);

    let cache: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("tuned_params.json")).unwrap())
            .unwrap();
    assert_eq!(cache["ETH"]["slma"]["kind"], "slma");
}

const GOLDEN_COMPARE_TABLE: &str = "\
## ETH bullish

| Strategy | Total Return (%) | Daily Return (%) | Sharpe Ratio |
|---|---|---|---|
| buy_and_hold | 22.66 | 0.34\u{b1}0.57 | 0.59 |
| sma(window=20) | 21.20 | 0.32\u{b1}0.58 | 0.55 |
| slma(short=5,long=20) | 21.83 | 0.33\u{b1}0.57 | 0.57 |
| macd(fast=12,slow=26,signal=9) | 22.43 | 0.33\u{b1}0.57 | 0.58 |
| bollinger(window=20,multiplier=2) | 0.79 | 0.01\u{b1}0.05 | 0.28 |

";

fn compare_args(sandbox: &Sandbox, out: &str) -> Vec<String> {
    [
        "compare",
        "--market",
        &sandbox.data("eth_market.csv"),
        "--asset",
        "ETH",
        "--split",
        "bullish",
        "--fee",
        "0.002",
        "--out",
        &sandbox.out(out),
        "--strategy",
        "buy_and_hold",
        "--strategy",
        "sma:window=20",
        "--strategy",
        "slma:short=5,long=20",
        "--strategy",
        "macd",
        "--strategy",
        "bollinger",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[test]
fn compare_renders_the_golden_table() {
    let sandbox = Sandbox::new();
    let args = compare_args(&sandbox, "out");
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = run_ok(&args);
    assert_eq!(stdout(&out), GOLDEN_COMPARE_TABLE);
}

#[test]
fn compare_with_cached_artifacts_equals_all_fresh() {
    let sandbox = Sandbox::new();
    // Prime the cache with two of the five strategies.
    for strategy in ["buy_and_hold", "slma:short=5,long=20"] {
        run_ok(&[
            "backtest",
            "--market",
            &sandbox.data("eth_market.csv"),
            "--asset",
            "ETH",
            "--split",
            "bullish",
            "--strategy",
            strategy,
            "--fee",
            "0.002",
            "--out",
            &sandbox.out("cached"),
        ]);
    }
    let cached_args = compare_args(&sandbox, "cached");
    let cached_args: Vec<&str> = cached_args.iter().map(String::as_str).collect();
    let fresh_args = compare_args(&sandbox, "fresh");
    let fresh_args: Vec<&str> = fresh_args.iter().map(String::as_str).collect();
    assert_eq!(stdout(&run_ok(&cached_args)), stdout(&run_ok(&fresh_args)));
}

#[test]
fn compare_with_no_strategies_prints_header_only() {
    let sandbox = Sandbox::new();
    let out = run_ok(&[
        "compare",
        "--market",
        &sandbox.data("eth_market.csv"),
        "--asset",
        "ETH",
        "--split",
        "bullish",
        "--out",
        &sandbox.out("out"),
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(
        lines,
        vec![
            "# ETH bullish",
            "strategy,total_return_pct,daily_return_pct,sharpe"
        ]
    );
}

fn write_script(path: &Path, actions: usize) {
    let mut text = String::new();
    for i in 0..actions {
        text.push_str(&format!(
            "{{\"day_index\": {i}, \"action\": {}}}\n",
            match i % 3 {
                0 => "1.0",
                1 => "0.0",
                _ => "-0.5",
            }
        ));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn agent_run_with_mock_fixture_is_deterministic() {
    let sandbox = Sandbox::new();
    let fixture = sandbox.root.join("script.jsonl");
    write_script(&fixture, 61); // ETH bullish has 61 trading days
    let args = [
        "agent-run",
        "--market",
        &sandbox.data("eth_market.csv"),
        "--txn-stats",
        &sandbox.data("eth_txn_stats.csv"),
        "--news",
        &sandbox.data("eth_news.jsonl"),
        "--asset",
        "ETH",
        "--split",
        "bullish",
        "--ablation",
        "full",
        "--mock-fixture",
        &fixture.to_string_lossy(),
        "--out",
        &sandbox.out("out"),
    ];
    run_ok(&args);
    let dir = sandbox.root.join("out");
    let artifact = artifact_in(&dir);
    let audit = dir.join(format!(
        "audit-{}.jsonl",
        artifact
            .file_stem()
            .unwrap()
            .to_string_lossy()
            .trim_start_matches("run-")
    ));
    let first = (
        std::fs::read(&artifact).unwrap(),
        std::fs::read(&audit).unwrap(),
    );
    run_ok(&args);
    let second = (
        std::fs::read(&artifact).unwrap(),
        std::fs::read(&audit).unwrap(),
    );
    assert_eq!(first, second);
    assert!(!first.1.is_empty());
}

#[test]
fn base_ablation_prompts_have_no_optional_sections() {
    let sandbox = Sandbox::new();
    let fixture = sandbox.root.join("script.jsonl");
    write_script(&fixture, 61);
    run_ok(&[
        "agent-run",
        "--market",
        &sandbox.data("eth_market.csv"),
        "--news",
        &sandbox.data("eth_news.jsonl"),
        "--asset",
        "ETH",
        "--split",
        "bullish",
        "--ablation",
        "base",
        "--mock-fixture",
        &fixture.to_string_lossy(),
        "--out",
        &sandbox.out("out"),
    ]);
    let dir = sandbox.root.join("out");
    let audit = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().map(|e| e == "jsonl").unwrap_or(false))
        .unwrap();
    let text = std::fs::read_to_string(audit).unwrap();
    assert!(!text.is_empty());
    for marker in [
        "[NEWS DIGEST]",
        "[TECHNICAL REPORT]",
        "[ON-CHAIN STATS]",
        "[REFLECTION]",
    ] {
        assert!(
            !text.contains(marker),
            "base prompts must not contain {marker}"
        );
    }
}

#[test]
fn agent_outage_exits_1_and_keeps_the_partial_audit_log() {
    let sandbox = Sandbox::new();
    let fixture = sandbox.root.join("short.jsonl");
    write_script(&fixture, 5);
    let out = bin()
        .args([
            "agent-run",
            "--market",
            &sandbox.data("eth_market.csv"),
            "--asset",
            "ETH",
            "--split",
            "bullish",
            "--ablation",
            "base",
            "--mock-fixture",
            &fixture.to_string_lossy(),
            "--out",
            &sandbox.out("out"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert_eq!(parsed["error"]["code"], 1);

    let dir = sandbox.root.join("out");
    let audit = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().map(|e| e == "jsonl").unwrap_or(false))
        .expect("partial audit log persisted");
    let lines = std::fs::read_to_string(audit).unwrap().lines().count();
    assert_eq!(lines, 6); // five scripted days plus the failed sixth
}

#[test]
fn split_table_round_trips_through_the_cli() {
    let sandbox = Sandbox::new();
    // The generated splits.csv can be fed back via --splits.
    let out = run_ok(&[
        "backtest",
        "--market",
        &sandbox.data("eth_market.csv"),
        "--splits",
        &sandbox.data("splits.csv"),
        "--asset",
        "ETH",
        "--split",
        "sideways",
        "--strategy",
        "buy_and_hold",
        "--fee",
        "0",
        "--out",
        &sandbox.out("out"),
    ]);
    assert!(stdout(&out).contains("ETH sideways"));
}
