//! Time integration of `∂ρ/∂t = φ′ v / F`, the areal-radius form of the
//! graph equation `∂r/∂t = v/F`.
//!
//! Explicit classical RK4 with geometry rebuilt at every stage. The step is
//! bounded by the diffusive CFL condition of the linearized operator and by
//! a configured maximum step.

mod record;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ambient::{AmbientError, AmbientKind, WarpedAmbient};
use crate::surface::{geometry_from_state, GeometryError, GeometrySnapshot, GridMode, SphericalGrid};
use crate::symfunc::QuotientSpeed;

pub use record::{FlowRecord, FlowRow, RecordFlags, RECORD_HEADER};

/// Flow time and the areal radius at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphState {
    pub t: f64,
    pub rho: Vec<f64>,
}

impl GraphState {
    pub fn constant(rho: f64, nodes: usize) -> Self {
        Self { t: 0.0, rho: vec![rho; nodes] }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("left the cone at t = {t}, node {node}, kappa = {kappa:?}")]
    ConeViolation { t: f64, node: usize, kappa: Vec<f64>, state: GraphState },
    #[error("flow aborted at t = {t}: {source}")]
    Geometry { t: f64, source: GeometryError, state: GraphState },
}

impl FlowError {
    fn from_geometry(err: GeometryError, t: f64, state: &GraphState) -> Self {
        match err {
            GeometryError::ConeViolation { node, kappa } => {
                FlowError::ConeViolation { t, node, kappa, state: state.clone() }
            }
            source => FlowError::Geometry { t, source, state: state.clone() },
        }
    }

    /// Last valid state before the abort, if any.
    pub fn state(&self) -> Option<&GraphState> {
        match self {
            FlowError::Config(_) => None,
            FlowError::ConeViolation { state, .. } | FlowError::Geometry { state, .. } => Some(state),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `ρ ≡ rho0`.
    Constant { rho0: f64 },
    /// `ρ(θ) = rho0 (1 + eps · P_2(cos θ))`.
    LegendreBump { rho0: f64, eps: f64 },
    /// `ρ(θ) = rho0 + eps · cos 2θ`.
    CosBump { rho0: f64, eps: f64 },
}

impl InitialData {
    pub fn preset_name(&self) -> &'static str {
        match self {
            InitialData::Constant { .. } => "constant",
            InitialData::LegendreBump { .. } => "legendre-bump",
            InitialData::CosBump { .. } => "cos-bump",
        }
    }

    pub fn rho0(&self) -> f64 {
        match *self {
            InitialData::Constant { rho0 }
            | InitialData::LegendreBump { rho0, .. }
            | InitialData::CosBump { rho0, .. } => rho0,
        }
    }

    pub fn eps(&self) -> f64 {
        match *self {
            InitialData::Constant { .. } => 0.0,
            InitialData::LegendreBump { eps, .. } | InitialData::CosBump { eps, .. } => eps,
        }
    }

    pub fn from_preset(name: &str, rho0: f64, eps: f64) -> Result<Self, String> {
        match name {
            "constant" => Ok(InitialData::Constant { rho0 }),
            "legendre-bump" => Ok(InitialData::LegendreBump { rho0, eps }),
            "cos-bump" => Ok(InitialData::CosBump { rho0, eps }),
            other => Err(format!("unknown initial-data preset '{other}'")),
        }
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        match *self {
            InitialData::Constant { rho0 } => rho0,
            InitialData::LegendreBump { rho0, eps } => {
                let c = theta.cos();
                rho0 * (1.0 + eps * 0.5 * (3.0 * c * c - 1.0))
            }
            InitialData::CosBump { rho0, eps } => rho0 + eps * (2.0 * theta).cos(),
        }
    }

    pub fn sample(&self, grid: &SphericalGrid) -> GraphState {
        GraphState { t: 0.0, rho: grid.theta().iter().map(|&t| self.evaluate(t)).collect() }
    }

    /// Smallest value the preset takes on the sphere.
    fn infimum(&self) -> f64 {
        match *self {
            InitialData::Constant { rho0 } => rho0,
            InitialData::LegendreBump { rho0, eps } => rho0 * (1.0 + eps.min(-0.5 * eps)),
            InitialData::CosBump { rho0, eps } => rho0 - eps.abs(),
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(rho0={}, eps={})", self.preset_name(), self.rho0(), self.eps())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientChoice {
    AdsSchwarzschild,
    Flat,
}

impl FromStr for AmbientChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ads" => Ok(AmbientChoice::AdsSchwarzschild),
            "flat" => Ok(AmbientChoice::Flat),
            other => Err(format!("unknown ambient kind '{other}'")),
        }
    }
}

impl fmt::Display for AmbientChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AmbientChoice::AdsSchwarzschild => "ads",
            AmbientChoice::Flat => "flat",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub n: usize,
    pub m: f64,
    pub ambient: AmbientChoice,
    pub k: usize,
    pub mode: GridMode,
    pub resolution: usize,
    pub init: InitialData,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// Upper bound on the step; the only step control in symmetric mode.
    pub dt_max: f64,
    /// Steps between recorded rows.
    pub cadence: usize,
    /// Stop once `max|κ − 1|` falls to this value.
    pub stop_dev: Option<f64>,
}

pub const DEFAULT_CFL_SAFETY: f64 = 0.2;
pub const DEFAULT_CADENCE: usize = 10;
pub const DEFAULT_DT_MAX: f64 = 0.01;

impl FlowConfig {
    pub fn new(n: usize, m: f64, k: usize, mode: GridMode, resolution: usize, init: InitialData, t_end: f64) -> Self {
        Self {
            n,
            m,
            ambient: AmbientChoice::AdsSchwarzschild,
            k,
            mode,
            resolution,
            init,
            t_end,
            cfl_safety: DEFAULT_CFL_SAFETY,
            dt_max: DEFAULT_DT_MAX,
            cadence: DEFAULT_CADENCE,
            stop_dev: None,
        }
    }

    /// Every violated constraint, or `Ok` if there are none. Does not look
    /// at the curvature of the initial data; see [`FlowSetup::new`].
    pub fn validate(&self) -> Result<(), FlowError> {
        let mut errs = Vec::new();
        if self.n < 1 {
            errs.push("dimension n must be at least 1".to_string());
        }
        if self.k < 1 {
            errs.push("k must be at least 1".to_string());
        }
        if self.k > self.n {
            errs.push(format!("k exceeds n ({} > {})", self.k, self.n));
        }
        if !(self.m >= 0.0) || !self.m.is_finite() {
            errs.push(format!("mass must be nonnegative (got {})", self.m));
        }
        if self.ambient == AmbientChoice::Flat && self.m != 0.0 {
            errs.push("flat ambient requires m = 0".to_string());
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            errs.push(format!("t_end must be a nonnegative finite number (got {})", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            errs.push(format!("cfl_safety must lie in (0, 1] (got {})", self.cfl_safety));
        }
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            errs.push(format!("dt must be positive (got {})", self.dt_max));
        }
        if self.cadence == 0 {
            errs.push("cadence must be at least 1".to_string());
        }
        if let Some(s) = self.stop_dev {
            if !(s > 0.0) {
                errs.push(format!("stop_dev must be positive (got {s})"));
            }
        }
        match self.mode {
            GridMode::Symmetric => {
                if !matches!(self.init, InitialData::Constant { .. }) {
                    errs.push(format!("preset '{}' needs a non-symmetric grid", self.init.preset_name()));
                }
            }
            GridMode::Axisymmetric | GridMode::LatLong => {
                if self.n != 2 {
                    errs.push(format!("{} grids support n = 2 only", self.mode));
                }
                if self.resolution < crate::surface::MIN_RESOLUTION {
                    errs.push(format!(
                        "resolution {} below minimum {}",
                        self.resolution,
                        crate::surface::MIN_RESOLUTION
                    ));
                }
            }
        }
        let rho0 = self.init.rho0();
        if !(rho0 > 0.0) || !rho0.is_finite() {
            errs.push(format!("rho0 must be positive (got {rho0})"));
        } else if errs.is_empty() {
            let s0 = self.build_ambient().map(|a| a.s0()).unwrap_or(0.0);
            let lowest = self.init.infimum();
            if !(lowest > s0) || lowest - s0 < 1e-6 * s0 {
                errs.push(format!("initial data reaches {lowest}, too close to the horizon s0 = {s0}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(FlowError::Config(errs))
        }
    }

    pub fn build_ambient(&self) -> Result<WarpedAmbient, AmbientError> {
        match self.ambient {
            AmbientChoice::AdsSchwarzschild => WarpedAmbient::ads(self.n, self.m),
            AmbientChoice::Flat => WarpedAmbient::flat(self.n),
        }
    }
}

/// Everything a run needs, resolved from a [`FlowConfig`].
#[derive(Debug, Clone)]
pub struct FlowSetup {
    pub ambient: WarpedAmbient,
    pub speed: QuotientSpeed,
    pub grid: SphericalGrid,
}

impl FlowSetup {
    pub fn new(config: &FlowConfig) -> Result<Self, FlowError> {
        config.validate()?;
        let cfg_err = |e: String| FlowError::Config(vec![e]);
        let ambient = config.build_ambient().map_err(|e| cfg_err(e.to_string()))?;
        let speed = QuotientSpeed::new(config.n, config.k).map_err(|e| cfg_err(e.to_string()))?;
        let grid = SphericalGrid::build(config.mode, config.n, config.resolution).map_err(|e| cfg_err(e.to_string()))?;
        Ok(Self { ambient, speed, grid })
    }

    pub fn geometry(&self, state: &GraphState) -> Result<GeometrySnapshot, FlowError> {
        geometry_from_state(state, &self.grid, &self.ambient, &self.speed)
            .map_err(|e| FlowError::from_geometry(e, state.t, state))
    }

    /// Largest stable step for the current geometry (before the `dt_max` cap).
    pub fn stable_timestep(&self, snapshot: &GeometrySnapshot, cfl_safety: f64, dt_max: f64) -> f64 {
        stable_timestep(snapshot, &self.grid, cfl_safety, dt_max)
    }

    /// One classical RK4 step. `current` must be the geometry of `state`;
    /// returns the new state together with its geometry.
    pub fn step_with(
        &self,
        state: &GraphState,
        current: &GeometrySnapshot,
        dt: f64,
    ) -> Result<(GraphState, GeometrySnapshot), FlowError> {
        if dt == 0.0 {
            return Ok((state.clone(), current.clone()));
        }
        let stage = |rates: &[f64], h: f64| GraphState {
            t: state.t + h,
            rho: state.rho.iter().zip(rates).map(|(r, k)| r + h * k).collect(),
        };
        let k1 = current.rho_rates();
        let k2 = self.geometry(&stage(&k1, 0.5 * dt))?.rho_rates();
        let k3 = self.geometry(&stage(&k2, 0.5 * dt))?.rho_rates();
        let k4 = self.geometry(&stage(&k3, dt))?.rho_rates();
        let rho = (0..state.rho.len())
            .map(|i| state.rho[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let next = GraphState { t: state.t + dt, rho };
        let snapshot = self.geometry(&next)?;
        Ok((next, snapshot))
    }

    pub fn step(&self, state: &GraphState, dt: f64) -> Result<GraphState, FlowError> {
        let current = self.geometry(state)?;
        self.step_with(state, &current, dt).map(|(s, _)| s)
    }
}

/// `dρ/dt` at every node.
pub fn evolve_rate(snapshot: &GeometrySnapshot) -> Vec<f64> {
    snapshot.rho_rates()
}

/// Diffusive CFL step `safety · Δ² / (2 n λ_max)` capped by `dt_max`.
///
/// Symmetric grids have no spatial operator and use `min(safety · 0.01, dt_max)`.
pub fn stable_timestep(snapshot: &GeometrySnapshot, grid: &SphericalGrid, cfl_safety: f64, dt_max: f64) -> f64 {
    match grid.min_spacing() {
        None => (cfl_safety * 0.01).min(dt_max),
        Some(spacing) => {
            let lambda = snapshot.nodes.iter().map(|g| g.diffusion_bound()).fold(0.0, f64::max);
            let dt = cfl_safety * spacing * spacing / (2.0 * grid.n() as f64 * lambda);
            dt.min(dt_max)
        }
    }
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: FlowRecord,
    pub state: GraphState,
    pub snapshot: GeometrySnapshot,
    pub grid: SphericalGrid,
}

/// Per-row callback: the row just recorded and the geometry it came from.
pub trait RunObserver {
    fn on_row(&mut self, row_index: usize, row: &FlowRow, snapshot: &GeometrySnapshot);
}

impl<F: FnMut(usize, &FlowRow, &GeometrySnapshot)> RunObserver for F {
    fn on_row(&mut self, row_index: usize, row: &FlowRow, snapshot: &GeometrySnapshot) {
        self(row_index, row, snapshot)
    }
}

pub fn run(config: &FlowConfig) -> Result<RunOutcome, FlowError> {
    run_observed(config, &mut |_: usize, _: &FlowRow, _: &GeometrySnapshot| {})
}

pub fn run_observed(config: &FlowConfig, observer: &mut dyn RunObserver) -> Result<RunOutcome, FlowError> {
    let setup = FlowSetup::new(config)?;
    let n = config.n;
    let mut state = config.init.sample(&setup.grid);
    let mut snapshot = setup.geometry(&state)?;
    let mut record = FlowRecord::new(n);
    let first = FlowRow::from_snapshot(&snapshot, n, 0.0);
    record.rows.push(first);
    observer.on_row(0, &first, &snapshot);

    let reached = |row: &FlowRow| config.stop_dev.is_some_and(|tol| row.dev_max <= tol);
    if reached(&first) {
        record.flags.stopped_early = true;
    }
    let mut prev = first;
    let mut since_row = 0usize;
    let end_slack = 1e-12 * config.t_end.max(1.0);
    while !record.flags.stopped_early && config.t_end - state.t > end_slack {
        let mut dt = setup.stable_timestep(&snapshot, config.cfl_safety, config.dt_max);
        let remaining = config.t_end - state.t;
        if dt >= remaining - end_slack {
            dt = remaining;
        }
        let (next, next_snapshot) = setup.step_with(&state, &snapshot, dt)?;
        if next.rho.iter().zip(&state.rho).any(|(a, b)| !(a > b)) {
            record.flags.non_monotone_rho = true;
        }
        let row = FlowRow::from_snapshot(&next_snapshot, n, dt);
        record.flags.rs_max_increase = record.flags.rs_max_increase.max(row.rs_max - prev.rs_max);
        record.flags.rs_min_decrease = record.flags.rs_min_decrease.max(prev.rs_min - row.rs_min);
        record.flags.steps += 1;
        state = next;
        snapshot = next_snapshot;
        prev = row;
        since_row += 1;

        let stop = reached(&row);
        let finished = config.t_end - state.t <= end_slack;
        if since_row == config.cadence || stop || finished {
            record.rows.push(row);
            observer.on_row(record.rows.len() - 1, &row, &snapshot);
            since_row = 0;
        }
        if stop {
            record.flags.stopped_early = true;
        }
    }
    Ok(RunOutcome { record, state, snapshot, grid: setup.grid })
}

/// Closed-form areal radius of the symmetric solution, `ρ0 e^{t/n}`.
pub fn symmetric_radius(rho0: f64, n: usize, t: f64) -> f64 {
    rho0 * (t / n as f64).exp()
}

impl AmbientChoice {
    pub fn kind(&self) -> AmbientKind {
        match self {
            AmbientChoice::AdsSchwarzschild => AmbientKind::AdsSchwarzschild,
            AmbientChoice::Flat => AmbientKind::Flat,
        }
    }
}
