//! End-to-end checks of the `shortblock` binary: flag handling, config file
//! overrides, CSV round trips, and error reporting.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shortblock"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn shortblock");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn run_err(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn shortblock");
    assert!(!out.status.success(), "command {args:?} unexpectedly passed");
    out
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("shortblock_cli_{}_{name}", std::process::id()))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[test]
fn simulate_emits_parseable_csv_and_is_deterministic() {
    let args = [
        "simulate",
        "--payload",
        "4",
        "--snr",
        "0:2:2",
        "--trials",
        "200",
        "--seed",
        "9",
    ];
    let first = run_ok(&args);
    let second = run_ok(&args);
    assert_eq!(first, second, "same seed must give identical output");

    let mut lines = first.lines();
    assert_eq!(
        lines.next(),
        Some("snr_db,receiver,trials,errors,bler,ci95")
    );
    let rows: Vec<&str> = lines.collect();
    // Two receivers in the default 4-bit experiment, two SNR points each.
    assert_eq!(rows.len(), 4);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6, "bad row {row:?}");
        fields[0].parse::<f64>().unwrap();
        fields[2].parse::<u64>().unwrap();
        fields[3].parse::<u64>().unwrap();
        fields[4].parse::<f64>().unwrap();
        fields[5].parse::<f64>().unwrap();
    }
}

#[test]
fn simulate_out_file_matches_stdout() {
    let args = [
        "simulate",
        "--payload",
        "4",
        "--snr",
        "1:1:1",
        "--trials",
        "150",
        "--seed",
        "3",
        "--receivers",
        "noncoherent",
    ];
    let stdout_csv = run_ok(&args);

    let path = scratch("out.csv");
    let mut with_out: Vec<&str> = args.to_vec();
    let path_str = path.to_str().unwrap().to_owned();
    with_out.extend_from_slice(&["--out", &path_str]);
    let quiet = run_ok(&with_out);
    assert!(quiet.is_empty(), "--out should leave stdout empty");

    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout_csv);
    std::fs::remove_file(&path).ok();
}

#[test]
fn simulate_reads_config_file_and_flags_override_it() {
    let cfg_path = scratch("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "payload_k": 4,
            "trials": 120,
            "snr": {"start_db": 2.0, "stop_db": 2.0, "step_db": 1.0},
            "receivers": ["noncoherent"],
            "seed": 42
        }"#,
    )
    .unwrap();
    let cfg = cfg_path.to_str().unwrap();

    let base = run_ok(&["simulate", "--config", cfg]);
    let rows: Vec<&str> = base.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("2,noncoherent,120,"));

    let overridden = run_ok(&[
        "simulate",
        "--config",
        cfg,
        "--trials",
        "80",
        "--receivers",
        "quasi-coherent",
    ]);
    let rows: Vec<&str> = overridden.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("2,quasi-coherent,80,"));

    std::fs::remove_file(&cfg_path).ok();
}

#[test]
fn simulate_accepts_channel_and_block_receivers() {
    let csv = run_ok(&[
        "simulate",
        "--payload",
        "11",
        "--snr",
        "8:8:1",
        "--trials",
        "60",
        "--seed",
        "5",
        "--channel",
        "los",
        "--receivers",
        "fht-block,ht-block",
        "--beta",
        "1.75",
        "--antennas",
        "4",
    ]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().any(|r| r.contains(",fht-block,")));
    assert!(rows.iter().any(|r| r.contains(",ht-block,")));
}

#[test]
fn simulate_rejects_unknown_receiver_and_bad_snr() {
    let out = run_err(&["simulate", "--receivers", "bogus"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown receiver"), "stderr: {stderr}");

    let out = run_err(&["simulate", "--snr", "0:2"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("start:stop:step"), "stderr: {stderr}");
}

// ---------------------------------------------------------------------------
// gap
// ---------------------------------------------------------------------------

#[test]
fn gap_interpolates_crossings_from_csv() {
    let path = scratch("gap.csv");
    std::fs::write(
        &path,
        "snr_db,receiver,trials,errors,bler,ci95\n\
         0,quasi-coherent,10000,200,0.02,0\n\
         1,quasi-coherent,10000,50,0.005,0\n\
         0,noncoherent,10000,100,0.01,0\n",
    )
    .unwrap();

    let out = run_ok(&[
        "gap",
        "--in",
        path.to_str().unwrap(),
        "--a",
        "quasi-coherent",
        "--b",
        "noncoherent",
        "--target",
        "0.01",
    ]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("pair,target_bler,snr_a_db,snr_b_db,gap_db")
    );
    assert_eq!(
        lines.next(),
        Some("quasi-coherent vs noncoherent,0.01,0.5,0,0.5")
    );
    std::fs::remove_file(&path).ok();
}

#[test]
fn gap_reports_unreachable_target_as_error() {
    let path = scratch("gap_unreachable.csv");
    std::fs::write(
        &path,
        "snr_db,receiver,trials,errors,bler,ci95\n\
         0,quasi-coherent,100,20,0.2,0\n\
         0,noncoherent,100,30,0.3,0\n",
    )
    .unwrap();

    let out = run_err(&[
        "gap",
        "--in",
        path.to_str().unwrap(),
        "--a",
        "quasi-coherent",
        "--b",
        "noncoherent",
        "--target",
        "0.01",
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");
    std::fs::remove_file(&path).ok();
}

// ---------------------------------------------------------------------------
// codec-bench
// ---------------------------------------------------------------------------

#[test]
fn codec_bench_reports_exact_operation_counts() {
    let out = run_ok(&["codec-bench", "--m", "4", "--reps", "50"]);
    assert!(out.contains("block length 2^4 = 16"), "output: {out}");
    // m * 2^m butterfly ops vs 2^(2m) naive multiply-adds.
    assert!(out.contains("64 ops per block"), "output: {out}");
    assert!(out.contains("256 ops per block"), "output: {out}");
    let diff_line = out
        .lines()
        .find(|l| l.starts_with("max |fast - naive|"))
        .expect("diff line");
    let value: f64 = diff_line.rsplit('=').next().unwrap().trim().parse().unwrap();
    assert!(value < 1e-9, "transforms disagree: {value}");
}

#[test]
fn codec_bench_rejects_zero_order() {
    let out = run_err(&["codec-bench", "--m", "0"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--m"), "stderr: {stderr}");
}
