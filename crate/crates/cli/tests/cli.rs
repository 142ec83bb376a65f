//! End-to-end tests of the `pgt` binary: exit codes, report content,
//! CSV format and determinism, fit round-trip, SVG output.

use std::path::Path;
use std::process::{Command, Output};

fn pgt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn analyze_flags_perfect_transfer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("xx2.conf");
    write(&cfg, "family = xx\nn_spins = 2\n");
    let out = pgt(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("perfect state transfer"), "{text}");
    assert!(text.contains("K_I = 0"), "{text}");
}

#[test]
fn analyze_reports_single_irrational_for_g_4_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ssh.conf");
    write(&cfg, "family = ssh\nn_cells = 2\ng = 4/3\n");
    let out = pgt(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("K_I = 1"), "{text}");
    // sqrt(43)/3 = 2.1858...; the report lists it as the one irrational.
    assert!(text.contains("2.1858"), "{text}");
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    write(&cfg, "family = xx\nn_spins = 4\nfrobnicate = 1\n");
    let out = pgt(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let cfg2 = dir.path().join("missing.conf");
    let out = pgt(&["analyze", "--config", cfg2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_then_fit_recovers_half_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("xx5.conf");
    let csv = dir.path().join("xx5.csv");
    write(
        &cfg,
        &format!(
            "family = xx\nn_spins = 5\nq_limit = 1e7\nprecision_bits = 192\ncsv = {}\n",
            csv.display()
        ),
    );
    let out = pgt(&["scan", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("q,t,P,epsilon\n"), "{text}");

    // Determinism: a second scan produces identical bytes.
    let out2 = pgt(&["scan", "--config", cfg.to_str().unwrap()]);
    assert!(out2.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), text);

    let out = pgt(&["fit", "--config", cfg.to_str().unwrap(), "--plot"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit_text = stdout(&out);
    let alpha = extract_alpha(&fit_text);
    assert!((alpha - 0.5).abs() < 0.1, "{fit_text}");
    let svg = std::fs::read_to_string(dir.path().join("xx5.svg")).unwrap();
    assert!(svg.contains("<svg"), "plot written");
    assert!(svg.contains("width=\"800\" height=\"600\""));
}

#[test]
fn fit_synthetic_inverse_law_gives_alpha_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("syn.conf");
    let csv = dir.path().join("syn.csv");
    let mut data = String::from("q,t,P,epsilon\n");
    for j in 2..10 {
        let eps = 10f64.powi(-j);
        data.push_str(&format!("{},{:e},{:e},{:e}\n", j, 1.0 / eps, 1.0 - eps, eps));
    }
    write(&csv, &data);
    write(
        &cfg,
        &format!("family = xx\nn_spins = 5\ncsv = {}\n", csv.display()),
    );
    let out = pgt(&["fit", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let alpha = extract_alpha(&stdout(&out));
    assert!((alpha - 1.0).abs() < 1e-6, "{alpha}");
}

#[test]
fn fit_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("syn.conf");
    let csv = dir.path().join("syn.csv");
    write(&csv, "time,prob\n1,2\n");
    write(
        &cfg,
        &format!("family = xx\nn_spins = 5\ncsv = {}\n", csv.display()),
    );
    let out = pgt(&["fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_refuses_chain_without_transmission() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("xx8.conf");
    write(
        &cfg,
        &format!(
            "family = xx\nn_spins = 8\nq_limit = 1e6\nprecision_bits = 192\ncsv = {}\n",
            dir.path().join("xx8.csv").display()
        ),
    );
    let out = pgt(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn scan_perfect_transfer_writes_single_exact_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("xx2.conf");
    let csv = dir.path().join("xx2.csv");
    write(
        &cfg,
        &format!(
            "family = xx\nn_spins = 2\nq_limit = 1000\nprecision_bits = 128\ncsv = {}\n",
            csv.display()
        ),
    );
    let out = pgt(&["scan", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("perfect transfer"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(rows.len(), 2, "{text}");
    assert!(rows[1].ends_with(",0"), "epsilon column is exactly zero: {text}");
}

#[test]
fn report_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("stag4.conf");
    write(
        &cfg,
        "family = staggered\nn_spins = 4\nj1 = 1\nj2 = 10\nq_limit = 1e7\nprecision_bits = 192\n",
    );
    let out = pgt(&["report", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("K_I = 1"), "{text}");
    assert!(text.contains("verdict: PGT"), "{text}");
}

#[test]
fn env_override_sets_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("xx2.conf");
    write(&cfg, "family = xx\nn_spins = 2\n");
    let out = Command::new(env!("CARGO_BIN_EXE_pgt"))
        .args(["analyze", "--config", cfg.to_str().unwrap()])
        .env("PGT_PRECISION_BITS", "128")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("precision: 128 bits"));
}

fn extract_alpha(text: &str) -> f64 {
    let tail = text.split("alpha = ").nth(1).expect("fit line present");
    tail.split_whitespace()
        .next()
        .unwrap()
        .parse()
        .expect("numeric alpha")
}
