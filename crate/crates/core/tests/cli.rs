//! The `horolab` binary: exit codes, outputs and reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use horolab::io::{read_series_csv, Manifest};

fn horolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horolab")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn conf(name: &str) -> String {
    configs().join(name).display().to_string()
}

#[test]
fn missing_group_file_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "[run]\ngroup = nowhere.group\n").unwrap();
    let out = dir.path().join("out");
    let o = horolab(&["group-info", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere.group"));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let cfg = dir.path().join("c.conf");
    std::fs::write(&cfg, "[run]\ngroup = builtin:schottky\n[exponent]\nt_max = ten\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = horolab(&["exponent", "--config", cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("c.conf:4:"));
    // randomized experiment without a seed
    let o = horolab(&["equidist", "--config", cfg, "--out", out, "--override", "exponent.t_max=3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = horolab(&["exponent", "--config", cfg, "--out", out, "--override", "t_max=12", "--override", "bogus=1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = horolab(&["nonsense", "--config", cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!Path::new(out).exists());
}

#[test]
fn numeric_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // a cyclic group has far too few words for a Patterson measure
    let o = horolab(&[
        "patterson", "--config", &conf("parabolic.conf"), "--out", out.to_str().unwrap(),
        "--override", "cutoff=8", "--override", "t_max=10",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn parabolic_exponent_is_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = horolab(&["exponent", "--config", &conf("parabolic.conf"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let series = read_series_csv(&out.join("exponent.csv")).unwrap();
    assert!((series[0].reference - 0.5).abs() <= 0.02, "{}", series[0].reference);
    let m = Manifest::read(&out.join("manifest.txt")).unwrap();
    assert_eq!(m.get("run", "experiment"), Some("exponent"));
    assert_eq!(m.get("run", "version"), Some(env!("CARGO_PKG_VERSION")));
    assert!(m.get("run", "wall_time_s").is_some());
    let growth: f64 = m.get("results", "growth_constant").unwrap().parse().unwrap();
    assert!(growth <= 10.0);
}

#[test]
fn reruns_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let o = horolab(&[
            "equidist", "--config", &conf("schottky.conf"), "--out", out.to_str().unwrap(),
            "--seed", "3", "--deterministic",
            "--override", "cutoff=10", "--override", "t_max=16", "--override", "log_radii=1 2 3",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push((std::fs::read(out.join("equidist.csv")).unwrap(), std::fs::read(out.join("equidist.svg")).unwrap()));
        let m = Manifest::read(&out.join("manifest.txt")).unwrap();
        assert_eq!(m.get("run", "deterministic"), Some("true"));
        assert_eq!(m.get("config", "run.seed"), Some("3"));
        assert_eq!(m.get("config", "equidist.cutoff"), Some("10"));
    }
    assert_eq!(csvs[0], csvs[1]);
    let series = read_series_csv(&dir.path().join("run0/equidist.csv")).unwrap();
    assert_eq!(series.len(), 3);
    assert!(series.iter().all(|s| s.seed == Some(3)));
}

#[test]
fn closure_writes_series_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = horolab(&["closure", "--config", &conf("cusped.conf"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = &read_series_csv(&out.join("closure.csv")).unwrap()[0];
    assert!(s.values.iter().all(|v| (v - s.reference).abs() <= 1e-8));
    assert!(std::fs::read_to_string(out.join("closure.svg")).unwrap().starts_with("<svg"));
    // no temp files left behind
    for e in std::fs::read_dir(&out).unwrap() {
        assert!(!e.unwrap().file_name().to_string_lossy().ends_with(".tmp"));
    }
}
