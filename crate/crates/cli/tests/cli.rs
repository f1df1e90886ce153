use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use warpflow_cli::config::parse_config;
use warpflow_core::io::read_record_csv;

fn warpflow(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_warpflow"));
    cmd.args(args).env_remove("WARPFLOW_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const SYMMETRIC: &str = "\
ambient.n = 2
ambient.m = 0
flow.k = 1
grid.mode = symmetric
init.rho0 = 2
run.t_end = 6
run.dt = 0.001
run.cadence = 50
";

fn run_config(dir: &TempDir, text: &str, out: &str) -> (Output, PathBuf) {
    let cfg = write_config(dir.path(), &format!("{out}.cfg"), text);
    let out_dir = dir.path().join(out);
    let o = warpflow(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], &[]);
    (o, out_dir)
}

#[test]
fn symmetric_run_follows_the_exponential() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_config(&dir, SYMMETRIC, "sym");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_record_csv(fs::read(out.join("record.csv")).unwrap().as_slice()).unwrap();
    assert!(rows.len() > 10);
    for r in &rows {
        let exact = 2.0 * (r.t / 2.0).exp();
        assert!(((r.rho_max - exact) / exact).abs() <= 1e-9, "t={} rho={}", r.t, r.rho_max);
    }
    assert!((rows.last().unwrap().t - 6.0).abs() < 1e-12);
    assert!(out.join("snapshots/final.csv").exists());
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("status = completed"));
    assert!(manifest.contains("[claims]"));
}

fn manifest_config(manifest: &str) -> String {
    let start = manifest.find("[config]\n").expect("config section") + "[config]\n".len();
    let rest = &manifest[start..];
    rest[..rest.find("\n[").unwrap_or(rest.len())].to_string()
}

#[test]
fn manifest_echo_reproduces_the_run_bitwise() {
    let dir = TempDir::new().unwrap();
    let text = "ambient.n = 2\nambient.m = 2\nflow.k = 2\ngrid.mode = axisymmetric\ngrid.resolution = 32\n\
                init.preset = cos-bump\ninit.rho0 = 3\ninit.eps = 0.3\nrun.t_end = 0.5\n";
    let (o, first) = run_config(&dir, text, "first");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = manifest_config(&fs::read_to_string(first.join("manifest.txt")).unwrap());
    assert_eq!(parse_config(&echo).unwrap(), parse_config(text).unwrap());
    let (o, second) = run_config(&dir, &echo, "second");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(first.join("record.csv")).unwrap(), fs::read(second.join("record.csv")).unwrap());
}

#[test]
fn zero_end_time_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_config(&dir, &SYMMETRIC.replace("run.t_end = 6", "run.t_end = 0"), "zero");
    assert_eq!(o.status.code(), Some(0));
    let rows = read_record_csv(fs::read(out.join("record.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].t, 0.0);
}

#[test]
fn data_outside_the_cone_aborts_before_stepping() {
    let dir = TempDir::new().unwrap();
    let text = "ambient.n = 2\nambient.m = 0\nflow.k = 2\ngrid.mode = axisymmetric\ngrid.resolution = 64\n\
                init.preset = cos-bump\ninit.rho0 = 1\ninit.eps = 0.9\nrun.t_end = 1\n";
    let (o, out) = run_config(&dir, text, "abort");
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("abort_state.csv"), "{stderr}");
    let dump = fs::read_to_string(out.join("abort_state.csv")).unwrap();
    assert!(dump.starts_with("# t = 0.0000000000000000e0"));
    assert!(fs::read_to_string(out.join("manifest.txt")).unwrap().contains("status = aborted"));
}

#[test]
fn invalid_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let bad = SYMMETRIC.replace("flow.k = 1", "flow.k = 3").replace("ambient.m = 0", "ambient.m = -1");
    let (o, _) = run_config(&dir, &bad, "bad");
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("k exceeds n") && stderr.contains("mass must be nonnegative"), "{stderr}");

    let (o, _) = run_config(&dir, "ambient.n = 2\nflow.q = 1\n", "unknown");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = dir.path().join("missing.cfg");
    let o = warpflow(&["run", "--config", missing.to_str().unwrap(), "--out", "unused"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(warpflow(&[], &[]).status.code(), Some(1));
    assert_eq!(warpflow(&["frobnicate"], &[]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(warpflow(&["verify", "nonsense", "--out", out], &[]).status.code(), Some(1));
    let o = warpflow(&["verify", "identities", "--out", out], &[("WARPFLOW_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(warpflow(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn verify_writes_a_report_and_exit_code_matches_it() {
    let dir = TempDir::new().unwrap();
    for suite in ["symfunc", "identities"] {
        let out = dir.path().join(suite);
        let o = warpflow(&["verify", suite, "--out", out.to_str().unwrap()], &[("WARPFLOW_THREADS", "2")]);
        let report = fs::read_to_string(out.join("report.txt")).unwrap();
        let all_pass = report.contains("[summary]") && report.split("[summary]").nth(1).unwrap().contains("status = pass");
        assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 3 }));
        assert_eq!(o.status.code(), Some(0), "{report}");
        assert!(report.matches("[claim ").count() > 10);
    }
}

#[test]
fn verify_failure_exits_three() {
    // the m = 2 symmetric rate misses the 5% band on [3, 6]
    let dir = TempDir::new().unwrap();
    let o = warpflow(&["verify", "symmetric", "--out", dir.path().to_str().unwrap()], &[]);
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(o.status.code(), Some(3), "{report}");
    assert!(report.contains("[claim rate.k1.m0.shape_rate]\ndescription = max |kappa - 1| decays at the rate -2/n\nstatus = pass"));
    assert!(report.contains("[claim rate.k1.m2.shape_rate]\ndescription = max |kappa - 1| decays at the rate -2/n\nstatus = fail"));
}

#[test]
fn plot_annotates_the_shape_rate() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_config(&dir, SYMMETRIC, "plot");
    assert_eq!(o.status.code(), Some(0));
    let svg_path = dir.path().join("plot.svg");
    let o = warpflow(&["plot", out.join("record.csv").to_str().unwrap(), "--out", svg_path.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches(r#"class="panel""#).count(), 4);
    assert!(svg.contains("rate \u{2212}1.00"), "shape panel annotation");
}

#[test]
fn plot_rejects_empty_records_and_accepts_single_rows() {
    let dir = TempDir::new().unwrap();
    let (_, out) = run_config(&dir, &SYMMETRIC.replace("run.t_end = 6", "run.t_end = 0"), "single");
    let svg = dir.path().join("single.svg");
    let o = warpflow(&["plot", out.join("record.csv").to_str().unwrap(), "--out", svg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!fs::read_to_string(&svg).unwrap().contains("rate "));

    let header_only = dir.path().join("empty.csv");
    let text = fs::read_to_string(out.join("record.csv")).unwrap();
    fs::write(&header_only, format!("{}\n", text.lines().next().unwrap())).unwrap();
    let o = warpflow(&["plot", header_only.to_str().unwrap(), "--out", svg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty record"));
}
