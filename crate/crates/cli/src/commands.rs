//! The `run` and `verify` commands.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;
use warpflow_core::diagnostics::{check_bounds, check_c0, BoundsConfig};
use warpflow_core::flow::{run_observed, FlowSetup};
use warpflow_core::io::{write_record_csv, write_snapshot_csv, write_state_csv};
use warpflow_core::{BoundReport, FlowError, FlowRecord, FlowRow, GeometrySnapshot};

use crate::config::{emit_config, load_config, ConfigError, RunConfig};
use crate::suites::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ABORT: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io { path: path.to_path_buf(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, CommandError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// What `run` produced, for callers that want more than the exit code.
#[derive(Debug)]
pub struct RunSummary {
    pub exit_code: i32,
    pub record_path: PathBuf,
    pub manifest_path: PathBuf,
    pub snapshot_paths: Vec<PathBuf>,
    pub abort_state: Option<PathBuf>,
    pub claims: Option<BoundReport>,
}

struct SnapshotWriter<'a> {
    dir: &'a Path,
    every: usize,
    setup: &'a FlowSetup,
    paths: Vec<PathBuf>,
    rows: Vec<FlowRow>,
    error: Option<CommandError>,
}

impl SnapshotWriter<'_> {
    fn write(&mut self, name: &str, snapshot: &GeometrySnapshot) {
        if self.error.is_some() {
            return;
        }
        let path = self.dir.join(name);
        let res = create(&path).and_then(|mut f| {
            write_snapshot_csv(snapshot, &self.setup.grid, &mut f)
                .and_then(|_| f.flush())
                .map_err(io_err(&path))
        });
        match res {
            Ok(()) => self.paths.push(path),
            Err(e) => self.error = Some(e),
        }
    }
}

fn write_record(path: &Path, record: &FlowRecord) -> Result<(), CommandError> {
    let mut f = create(path)?;
    write_record_csv(record, &mut f).and_then(|_| f.flush()).map_err(io_err(path))
}

/// Bound checks recorded in the manifest of a completed run.
pub fn run_claims(record: &FlowRecord) -> BoundReport {
    let mut report = check_bounds(record, &BoundsConfig::new(record.n));
    report.extend(check_c0(record, 1e-8));
    report
}

struct Manifest<'a> {
    config: &'a RunConfig,
    status: &'a str,
    started: f64,
    finished: f64,
    files: Vec<(&'static str, PathBuf)>,
    claims: Option<&'a BoundReport>,
    message: Option<String>,
}

impl Manifest<'_> {
    fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[tool]");
        let _ = writeln!(out, "name = {}", env!("CARGO_PKG_NAME"));
        let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "\n[run]");
        let _ = writeln!(out, "status = {}", self.status);
        let _ = writeln!(out, "start_unix = {:.3}", self.started);
        let _ = writeln!(out, "end_unix = {:.3}", self.finished);
        let _ = writeln!(out, "wall_seconds = {:.3}", self.finished - self.started);
        if let Some(m) = &self.message {
            let _ = writeln!(out, "message = {m}");
        }
        let _ = writeln!(out, "\n[config]");
        out.push_str(&emit_config(self.config));
        let _ = writeln!(out, "\n[files]");
        for (key, path) in &self.files {
            let _ = writeln!(out, "{key} = {}", path.display());
        }
        if let Some(claims) = self.claims {
            let passed = claims.entries.iter().filter(|e| e.passed).count();
            let _ = writeln!(out, "\n[claims]");
            let _ = writeln!(out, "total = {}", claims.entries.len());
            let _ = writeln!(out, "passed = {passed}");
            for e in &claims.entries {
                let _ = writeln!(out, "{} = {} ({:.6e})", e.id, if e.passed { "pass" } else { "fail" }, e.measured);
            }
        }
        out
    }
}

/// Runs the flow in `config` and writes `record.csv`, snapshot files, and
/// `manifest.txt` under `out`. An abort leaves `abort_state.csv` behind.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<RunSummary, CommandError> {
    let started = unix_seconds();
    let snap_dir = out.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(io_err(&snap_dir))?;
    let record_path = out.join("record.csv");
    let manifest_path = out.join("manifest.txt");

    let setup = match FlowSetup::new(&config.flow) {
        Ok(s) => s,
        Err(FlowError::Config(errs)) => return Err(ConfigError::Invalid(errs).into()),
        Err(e) => return Err(CommandError::Usage(e.to_string())),
    };
    let mut writer = SnapshotWriter { dir: &snap_dir, every: config.snapshot_every, setup: &setup, paths: Vec::new(), rows: Vec::new(), error: None };
    let result = run_observed(&config.flow, &mut |idx: usize, row: &FlowRow, snap: &GeometrySnapshot| {
        writer.rows.push(*row);
        if writer.every > 0 && idx.is_multiple_of(writer.every) {
            writer.write(&format!("snapshot_{idx:06}.csv"), snap);
        }
    });
    let mut files = vec![("record", record_path.clone())];
    let (exit_code, claims, abort_state, message) = match result {
        Ok(outcome) => {
            writer.write("final.csv", &outcome.snapshot);
            write_record(&record_path, &outcome.record)?;
            let claims = run_claims(&outcome.record);
            (EXIT_OK, Some(claims), None, None)
        }
        Err(err) => {
            let mut partial = FlowRecord::new(config.flow.n);
            partial.rows = std::mem::take(&mut writer.rows);
            write_record(&record_path, &partial)?;
            let dump = err.state().map(|state| {
                let path = out.join("abort_state.csv");
                let res = create(&path).and_then(|mut f| {
                    write_state_csv(state, &setup.grid, &mut f).and_then(|_| f.flush()).map_err(io_err(&path))
                });
                res.map(|_| path)
            });
            let dump = dump.transpose()?;
            if let Some(p) = &dump {
                files.push(("abort_state", p.clone()));
            }
            (EXIT_ABORT, None, dump, Some(err.to_string()))
        }
    };
    if let Some(e) = writer.error.take() {
        return Err(e);
    }
    for (i, p) in writer.paths.iter().enumerate() {
        files.push((if i + 1 == writer.paths.len() && exit_code == EXIT_OK { "snapshot_final" } else { "snapshot" }, p.clone()));
    }
    let manifest = Manifest {
        config,
        status: if exit_code == EXIT_OK { "completed" } else { "aborted" },
        started,
        finished: unix_seconds(),
        files,
        claims: claims.as_ref(),
        message,
    };
    let mut f = create(&manifest_path)?;
    f.write_all(manifest.render().as_bytes()).and_then(|_| f.flush()).map_err(io_err(&manifest_path))?;
    Ok(RunSummary { exit_code, record_path, manifest_path, snapshot_paths: writer.paths, abort_state, claims })
}

pub fn cmd_run_file(config_path: &Path, out: &Path) -> Result<RunSummary, CommandError> {
    let config = load_config(config_path)?;
    cmd_run(&config, out)
}

/// Runs a suite and writes `report.txt` under `out`. Exit code 0 iff every
/// claim passed.
pub fn cmd_verify(suite: Suite, out: &Path) -> Result<(i32, BoundReport, PathBuf), CommandError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let started = unix_seconds();
    let outcome = run_suite(suite);
    let path = out.join("report.txt");
    let mut text = String::new();
    let _ = writeln!(text, "# suite {suite}, {:.2} s", unix_seconds() - started);
    for line in outcome.tables.lines() {
        let _ = writeln!(text, "{}{line}", if line.starts_with('#') { "" } else { "# " });
    }
    text.push('\n');
    text.push_str(&outcome.report.to_kv());
    fs::write(&path, text).map_err(io_err(&path))?;
    let code = if outcome.report.all_passed() { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Ok((code, outcome.report, path))
}
