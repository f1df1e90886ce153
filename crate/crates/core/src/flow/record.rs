use crate::surface::GeometrySnapshot;

pub const RECORD_HEADER: [&str; 13] = [
    "t",
    "dt",
    "rho_min",
    "rho_max",
    "rs_min",
    "rs_max",
    "F_min",
    "F_max",
    "grad_phi_max",
    "phi_dot_max",
    "kappa_min",
    "kappa_max",
    "dev_max",
];

/// One sample of the run. `rs_*` are the rescaled radii `e^{−t/n} ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRow {
    pub t: f64,
    pub dt: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rs_min: f64,
    pub rs_max: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub grad_phi_max: f64,
    pub phi_dot_max: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub dev_max: f64,
}

impl FlowRow {
    pub fn from_snapshot(snapshot: &GeometrySnapshot, n: usize, dt: f64) -> Self {
        let t = snapshot.t;
        let decay = (-t / n as f64).exp();
        let (rho_min, rho_max) = (snapshot.rho_min(), snapshot.rho_max());
        Self {
            t,
            dt,
            rho_min,
            rho_max,
            rs_min: decay * rho_min,
            rs_max: decay * rho_max,
            f_min: snapshot.speed_min(),
            f_max: snapshot.speed_max(),
            grad_phi_max: snapshot.grad_phi_max(),
            phi_dot_max: snapshot.phi_dot_max(),
            kappa_min: snapshot.kappa_min(),
            kappa_max: snapshot.kappa_max(),
            dev_max: crate::diagnostics::shape_deviation(snapshot),
        }
    }

    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.dt,
            self.rho_min,
            self.rho_max,
            self.rs_min,
            self.rs_max,
            self.f_min,
            self.f_max,
            self.grad_phi_max,
            self.phi_dot_max,
            self.kappa_min,
            self.kappa_max,
            self.dev_max,
        ]
    }

    pub fn from_values(v: &[f64; 13]) -> Self {
        Self {
            t: v[0],
            dt: v[1],
            rho_min: v[2],
            rho_max: v[3],
            rs_min: v[4],
            rs_max: v[5],
            f_min: v[6],
            f_max: v[7],
            grad_phi_max: v[8],
            phi_dot_max: v[9],
            kappa_min: v[10],
            kappa_max: v[11],
            dev_max: v[12],
        }
    }
}

/// Largest per-step violation of the rescaled-radius monotonicity seen so far.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RecordFlags {
    /// `max(0, Δ(e^{−t/n} ρ_max))` over all steps.
    pub rs_max_increase: f64,
    /// `max(0, −Δ(e^{−t/n} ρ_min))` over all steps.
    pub rs_min_decrease: f64,
    /// Set when some node's `ρ` failed to increase over a step.
    pub non_monotone_rho: bool,
    pub steps: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowRecord {
    pub n: usize,
    pub rows: Vec<FlowRow>,
    pub flags: RecordFlags,
}

impl FlowRecord {
    pub fn new(n: usize) -> Self {
        Self { n, rows: Vec::new(), flags: RecordFlags::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&FlowRow> {
        self.rows.last()
    }

    pub fn column(&self, f: impl Fn(&FlowRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// `(t, y)` pairs for a column.
    pub fn series(&self, f: impl Fn(&FlowRow) -> f64) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, f(r))).collect()
    }
}
