//! Flat `key = value` configuration with dotted sections.
//!
//! ```text
//! # comment
//! ambient.n = 2
//! ambient.m = 0
//! flow.k = 1
//! grid.mode = axisymmetric
//! init.rho0 = 3
//! run.t_end = 6
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;
use warpflow_core::flow::{AmbientChoice, DEFAULT_CADENCE, DEFAULT_CFL_SAFETY, DEFAULT_DT_MAX};
use warpflow_core::{FlowConfig, FlowError, GridMode, InitialData};

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_SNAPSHOT_EVERY: usize = 10;

/// Every key the parser accepts, in emission order.
pub const KEYS: [&str; 16] = [
    "ambient.n",
    "ambient.m",
    "ambient.kind",
    "flow.k",
    "grid.mode",
    "grid.resolution",
    "init.preset",
    "init.rho0",
    "init.eps",
    "run.t_end",
    "run.cfl_safety",
    "run.dt",
    "run.cadence",
    "run.stop_dev",
    "run.snapshot_every",
    "run.label",
];

const REQUIRED: [&str; 6] = ["ambient.n", "ambient.m", "flow.k", "grid.mode", "init.rho0", "run.t_end"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice (first on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: bad value for '{key}': {message}")]
    Value { line: usize, key: String, message: String },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

/// A flow configuration plus the output options of the `run` command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub flow: FlowConfig,
    /// Recorded rows between snapshot files; 0 writes only the final one.
    pub snapshot_every: usize,
    pub label: String,
}

impl RunConfig {
    pub fn new(flow: FlowConfig) -> Self {
        Self { flow, snapshot_every: DEFAULT_SNAPSHOT_EVERY, label: String::new() }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}

struct Entry {
    line: usize,
    value: String,
}

fn value_err(key: &str, e: &Entry, message: impl Into<String>) -> ConfigError {
    ConfigError::Value { line: e.line, key: key.to_string(), message: message.into() }
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, Entry>, key: &str, default: T) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(default),
        Some(e) => e.value.parse().map_err(|err: T::Err| value_err(key, e, err.to_string())),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected 'key = value', found '{content}'") })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        }
        if let Some(prev) = map.get(key) {
            return Err(ConfigError::Duplicate { line, key: key.to_string(), first: prev.line });
        }
        if value.is_empty() {
            return Err(ConfigError::Value { line, key: key.to_string(), message: "empty value".into() });
        }
        map.insert(key.to_string(), Entry { line, value: value.to_string() });
    }
    let missing: Vec<String> = REQUIRED.iter().filter(|k| !map.contains_key(**k)).map(|k| k.to_string()).collect();
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }

    let n: usize = get(&map, "ambient.n", 0)?;
    let m: f64 = get(&map, "ambient.m", 0.0)?;
    let ambient: AmbientChoice = get(&map, "ambient.kind", AmbientChoice::AdsSchwarzschild)?;
    let k: usize = get(&map, "flow.k", 0)?;
    let mode: GridMode = get(&map, "grid.mode", GridMode::Symmetric)?;
    let resolution: usize = get(&map, "grid.resolution", DEFAULT_RESOLUTION)?;
    let preset: String = get(&map, "init.preset", "constant".to_string())?;
    let rho0: f64 = get(&map, "init.rho0", 0.0)?;
    let eps: f64 = get(&map, "init.eps", 0.0)?;
    let init = InitialData::from_preset(&preset, rho0, eps).map_err(|msg| value_err("init.preset", &map["init.preset"], msg))?;
    let t_end: f64 = get(&map, "run.t_end", 0.0)?;
    let stop_dev = match map.get("run.stop_dev") {
        None => None,
        Some(e) if e.value == "none" => None,
        Some(e) => Some(e.value.parse::<f64>().map_err(|err| value_err("run.stop_dev", e, err.to_string()))?),
    };

    let mut flow = FlowConfig::new(n, m, k, mode, resolution, init, t_end);
    flow.ambient = ambient;
    flow.cfl_safety = get(&map, "run.cfl_safety", DEFAULT_CFL_SAFETY)?;
    flow.dt_max = get(&map, "run.dt", DEFAULT_DT_MAX)?;
    flow.cadence = get(&map, "run.cadence", DEFAULT_CADENCE)?;
    flow.stop_dev = stop_dev;
    if let Err(FlowError::Config(errs)) = flow.validate() {
        return Err(ConfigError::Invalid(errs));
    }
    Ok(RunConfig {
        flow,
        snapshot_every: get(&map, "run.snapshot_every", DEFAULT_SNAPSHOT_EVERY)?,
        label: get(&map, "run.label", String::new())?,
    })
}

/// Every key with its resolved value. Floats use the shortest text that
/// parses back to the same bits.
pub fn emit_config(config: &RunConfig) -> String {
    let f = &config.flow;
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("ambient.n", f.n.to_string());
    put("ambient.m", format!("{:?}", f.m));
    put("ambient.kind", f.ambient.to_string());
    put("flow.k", f.k.to_string());
    put("grid.mode", f.mode.to_string());
    put("grid.resolution", f.resolution.to_string());
    put("init.preset", f.init.preset_name().to_string());
    put("init.rho0", format!("{:?}", f.init.rho0()));
    put("init.eps", format!("{:?}", f.init.eps()));
    put("run.t_end", format!("{:?}", f.t_end));
    put("run.cfl_safety", format!("{:?}", f.cfl_safety));
    put("run.dt", format!("{:?}", f.dt_max));
    put("run.cadence", f.cadence.to_string());
    put("run.stop_dev", f.stop_dev.map_or("none".to_string(), |s| format!("{s:?}")));
    put("run.snapshot_every", config.snapshot_every.to_string());
    if !config.label.is_empty() {
        put("run.label", config.label.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "ambient.n = 2\nambient.m = 0\nflow.k = 1\ngrid.mode = symmetric\ninit.rho0 = 2\nrun.t_end = 1\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.flow.cfl_safety, 0.2);
        assert_eq!(c.flow.cadence, 10);
        assert_eq!(c.flow.init, InitialData::Constant { rho0: 2.0 });
        assert_eq!(c.flow.mode, GridMode::Symmetric);
        assert_eq!(c.flow.stop_dev, None);
    }

    #[test]
    fn validation_lists_every_violation() {
        let text = MINIMAL.replace("flow.k = 1", "flow.k = 3").replace("ambient.m = 0", "ambient.m = -1");
        match parse_config(&text) {
            Err(ConfigError::Invalid(errs)) => {
                assert!(errs.iter().any(|e| e.contains("k exceeds n")), "{errs:?}");
                assert!(errs.iter().any(|e| e.contains("mass must be nonnegative")), "{errs:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_and_key() {
        let text = format!("{MINIMAL}grid.resolution = many\n");
        match parse_config(&text) {
            Err(ConfigError::Value { line, key, .. }) => assert_eq!((line, key.as_str()), (7, "grid.resolution")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("flow.kk = 1"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(parse_config("just text"), Err(ConfigError::Syntax { line: 1, .. })));
        let dup = format!("{MINIMAL}flow.k = 1\n");
        assert!(matches!(parse_config(&dup), Err(ConfigError::Duplicate { line: 7, first: 3, .. })));
        match parse_config("ambient.n = 2") {
            Err(ConfigError::Missing(keys)) => assert_eq!(keys.len(), 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header\n\n{}", MINIMAL.replace("flow.k = 1", "flow.k = 1   # mean curvature"));
        assert_eq!(parse_config(&text).unwrap(), parse_config(MINIMAL).unwrap());
    }
}
