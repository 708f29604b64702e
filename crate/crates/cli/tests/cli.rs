use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardylab"))
        .args(args)
        .current_dir(dir)
        .env_remove("HARDYLAB_QUAD_ORDER")
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn weights_at_inverse_e() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["weights", "--k", "1", "--t", "0.36787944117144233", "--out", "w.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "w.csv");
    let x1: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((x1 - 0.5).abs() < 1e-15);
    assert!(tmp.path().join("w-X1.dat").exists());
}

#[test]
fn weight_grid_stops_at_radius_over_d() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["weights", "--k", "2", "--D-mult", "5", "--points", "10", "--out", "w.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "w.csv");
    let last: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(last, 0.1);
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.cfg"), "[problem]\nn = 5\np = 3\nk = 0\n[run]\nout = x.csv\n").unwrap();
    let out = run(tmp.path(), &["estimate", "--config", "c.cfg", "--k", "1", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "x.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[2], row[4]), ("5", "1"));
}

#[test]
fn sweep_writes_plot_data() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["sweep", "--eps", "0.5", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let plot = read(tmp.path(), "s-ratio.dat");
    let ys: Vec<f64> = plot
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ys.len(), 8);
    assert!(ys.last().unwrap() < &(0.5 * ys[0]));
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "--n", "3", "--p", "3"][..],
        &["verify", "--D-mult", "0.5"],
        &["sweep", "--eps", "2"],
        &["estimate", "--family", "spline"],
        &["estimate", "--budget", "0"],
        &["weights", "--k", "0", "--t", "0.5"],
        &["verify", "--config", "missing.cfg"],
    ] {
        let out = run(tmp.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn quadrature_order_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_hardylab"))
        .args(["verify", "--trials", "2"])
        .current_dir(tmp.path())
        .env("HARDYLAB_QUAD_ORDER", "4")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_hardylab"))
        .args(["verify", "--trials", "2", "--out", "v.csv"])
        .current_dir(tmp.path())
        .env("HARDYLAB_QUAD_ORDER", "24")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn report_fills_a_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["report", "--trials", "3", "--budget", "10", "--out", "rep"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["weights.csv", "verify.csv", "estimate.csv", "sweep-control.csv", "sweep-reduced.csv", "sweep-reduced-ratio.dat"] {
        assert!(tmp.path().join("rep").join(f).exists(), "{f}");
    }
}
