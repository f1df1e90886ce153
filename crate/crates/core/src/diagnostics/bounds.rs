use std::fmt::Write as _;

use super::fit::{fit_decay_rate, RateFit};
use crate::flow::{FlowRecord, FlowRow};

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimEntry {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    /// Distance to the bound, positive when the claim holds.
    pub margin: f64,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    pub entries: Vec<ClaimEntry>,
}

impl BoundReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn get(&self, id: &str) -> Option<&ClaimEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Adds a claim that holds when `measured <= bound`.
    pub fn upper(&mut self, id: &str, description: &str, measured: f64, bound: f64) -> &mut ClaimEntry {
        self.push(id, description, measured <= bound, measured, bound, bound - measured)
    }

    /// Adds a claim that holds when `measured >= bound`.
    pub fn lower(&mut self, id: &str, description: &str, measured: f64, bound: f64) -> &mut ClaimEntry {
        self.push(id, description, measured >= bound, measured, bound, measured - bound)
    }

    pub fn push(
        &mut self,
        id: &str,
        description: &str,
        passed: bool,
        measured: f64,
        bound: f64,
        margin: f64,
    ) -> &mut ClaimEntry {
        self.entries.push(ClaimEntry {
            id: id.to_string(),
            description: description.to_string(),
            passed,
            measured,
            bound,
            margin,
            note: String::new(),
        });
        self.entries.last_mut().expect("just pushed")
    }

    pub fn extend(&mut self, other: BoundReport) {
        self.entries.extend(other.entries);
    }

    /// Prefixes every claim id, for combining reports of several runs.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        for e in &mut self.entries {
            e.id = format!("{prefix}.{}", e.id);
        }
        self
    }

    /// Key-value text, one `[claim <id>]` block per entry.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "[claim {}]", e.id);
            let _ = writeln!(out, "description = {}", e.description);
            let _ = writeln!(out, "status = {}", if e.passed { "pass" } else { "fail" });
            let _ = writeln!(out, "measured = {:.16e}", e.measured);
            let _ = writeln!(out, "bound = {:.16e}", e.bound);
            let _ = writeln!(out, "margin = {:.16e}", e.margin);
            if !e.note.is_empty() {
                let _ = writeln!(out, "note = {}", e.note);
            }
            out.push('\n');
        }
        let passed = self.entries.iter().filter(|e| e.passed).count();
        let _ = writeln!(out, "[summary]");
        let _ = writeln!(out, "claims = {}", self.entries.len());
        let _ = writeln!(out, "passed = {passed}");
        let _ = writeln!(out, "status = {}", if self.all_passed() { "pass" } else { "fail" });
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsConfig {
    pub n: usize,
    /// Allowed excess of `κ_max` over 1 in the final quarter.
    pub tail_tol: f64,
    /// Allowed shortfall of `F_min` below `n` in the final quarter.
    pub f_tail_eps: f64,
}

impl BoundsConfig {
    pub fn new(n: usize) -> Self {
        Self { n, tail_tol: 0.02, f_tail_eps: 0.05 * n as f64 }
    }
}

fn tail_rows(record: &FlowRecord) -> impl Iterator<Item = &FlowRow> {
    let first = record.rows.first().map_or(0.0, |r| r.t);
    let last = record.rows.last().map_or(0.0, |r| r.t);
    let start = last - 0.25 * (last - first);
    record.rows.iter().filter(move |r| r.t >= start)
}

fn fold_rows(rows: &[FlowRow], f: impl Fn(&FlowRow) -> f64, init: f64, op: fn(f64, f64) -> f64) -> f64 {
    rows.iter().map(f).fold(init, op)
}

/// Speed bounds, curvature and `ϕ̇` bounds, and the tail claims on `κ_max`
/// and `F_min`. The tail is the final quarter of the recorded time span.
pub fn check_bounds(record: &FlowRecord, config: &BoundsConfig) -> BoundReport {
    let mut report = BoundReport::new();
    let rows = &record.rows;
    let n = config.n as f64;

    let f_min = fold_rows(rows, |r| r.f_min, f64::INFINITY, f64::min);
    report.lower("F_positive", "F stays bounded below by a positive constant", f_min, 0.0).passed = f_min > 0.0;

    let f_max = fold_rows(rows, |r| r.f_max, f64::NEG_INFINITY, f64::max);
    report.push("F_bounded", "F stays bounded above", f_max.is_finite(), f_max, f64::INFINITY, f64::INFINITY);

    let kappa_abs = fold_rows(rows, |r| r.kappa_max.abs().max(r.kappa_min.abs()), 0.0, f64::max);
    report.push("kappa_bounded", "principal curvatures stay bounded", kappa_abs.is_finite(), kappa_abs, f64::INFINITY, f64::INFINITY);

    let phi_dot = fold_rows(rows, |r| r.phi_dot_max, 0.0, f64::max);
    report.push("phi_dot_bounded", "time derivative of the potential stays bounded", phi_dot.is_finite(), phi_dot, f64::INFINITY, f64::INFINITY);

    let tail_kappa = tail_rows(record).map(|r| r.kappa_max).fold(f64::NEG_INFINITY, f64::max);
    report
        .upper("kappa_tail_upper", "tail maximum of the largest principal curvature is at most 1 + tol", tail_kappa, 1.0 + config.tail_tol)
        .note = "limsup operationalized as the maximum over the final quarter".into();

    let tail_f = tail_rows(record).map(|r| r.f_min).fold(f64::INFINITY, f64::min);
    report.lower("F_tail_lower", "tail minimum of F is at least n − eps", tail_f, n - config.f_tail_eps);
    report
}

/// The rescaled radii `e^{−t/n}ρ_max` and `e^{−t/n}ρ_min` are monotone from
/// step to step up to `slack`.
pub fn check_c0(record: &FlowRecord, slack: f64) -> BoundReport {
    let mut report = BoundReport::new();
    let mut up = record.flags.rs_max_increase;
    let mut down = record.flags.rs_min_decrease;
    for w in record.rows.windows(2) {
        up = up.max(w[1].rs_max - w[0].rs_max);
        down = down.max(w[0].rs_min - w[1].rs_min);
    }
    report.upper("c0_upper", "e^{-t/n} rho_max is non-increasing", up, slack);
    report.upper("c0_lower", "e^{-t/n} rho_min is non-decreasing", down, slack);
    report
}

/// Fits the decay of `max|∇ϕ|` and requires the exponent to be at most
/// `max_exponent`. The value `n / (sup F)²` is recorded alongside.
pub fn check_gradient_decay(record: &FlowRecord, window: (f64, f64), max_exponent: f64) -> BoundReport {
    let mut report = BoundReport::new();
    let series = record.series(|r| r.grad_phi_max);
    let sup_f = fold_rows(&record.rows, |r| r.f_max, f64::NEG_INFINITY, f64::max);
    match fit_decay_rate(&series, window) {
        Ok(fit) => {
            report
                .upper("gradient_decay", "max |grad phi| decays exponentially", fit.slope, max_exponent)
                .note = format!(
                "window ({:.3}, {:.3}), r2 = {:.6}, n/supF^2 = {:.6}",
                window.0,
                window.1,
                fit.r_squared,
                record.n as f64 / (sup_f * sup_f)
            );
        }
        Err(e) => {
            report.push("gradient_decay", "max |grad phi| decays exponentially", false, f64::NAN, max_exponent, f64::NAN).note =
                e.to_string();
        }
    }
    report
}

/// Fits the decay of `max|κ − 1|` and compares the slope with `expected`.
pub fn check_shape_rate(
    record: &FlowRecord,
    window: (f64, f64),
    expected: f64,
    rel_tol: f64,
    min_r_squared: Option<f64>,
) -> (BoundReport, Option<RateFit>) {
    let mut report = BoundReport::new();
    let series = record.series(|r| r.dev_max);
    let desc = "max |kappa - 1| decays at the rate -2/n";
    match fit_decay_rate(&series, window) {
        Ok(fit) => {
            let rel = ((fit.slope - expected) / expected).abs();
            let r2_ok = min_r_squared.is_none_or(|m| fit.r_squared >= m);
            let entry = report.push("shape_rate", desc, rel <= rel_tol && r2_ok, fit.slope, expected, rel_tol - rel);
            entry.note = format!(
                "window ({:.3}, {:.3}), relative error {:.4}, r2 = {:.6}{}",
                window.0,
                window.1,
                rel,
                fit.r_squared,
                min_r_squared.map_or(String::new(), |m| format!(" (required >= {m})"))
            );
            (report, Some(fit))
        }
        Err(e) => {
            report.push("shape_rate", desc, false, f64::NAN, expected, f64::NAN).note = e.to_string();
            (report, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowConfig, InitialData, RecordFlags};
    use crate::surface::GridMode;
    use proptest::prelude::*;

    fn row(t: f64, f_min: f64, kappa_max: f64) -> FlowRow {
        FlowRow {
            t,
            dt: 0.1,
            rho_min: 1.0,
            rho_max: 1.0,
            rs_min: 1.0,
            rs_max: 1.0,
            f_min,
            f_max: f_min + 0.1,
            grad_phi_max: 0.0,
            phi_dot_max: 0.5,
            kappa_min: kappa_max - 0.1,
            kappa_max,
            dev_max: (kappa_max - 1.0).abs(),
        }
    }

    fn record(rows: Vec<FlowRow>) -> FlowRecord {
        FlowRecord { n: 2, rows, flags: RecordFlags::default() }
    }

    #[test]
    fn zero_speed_fails_lower_bound() {
        let rec = record(vec![row(0.0, 0.0, 1.0), row(1.0, 2.0, 1.0)]);
        let rep = check_bounds(&rec, &BoundsConfig::new(2));
        assert!(!rep.get("F_positive").unwrap().passed);
        assert!(!rep.all_passed());
    }

    #[test]
    fn every_claim_appears_once() {
        let rec = record((0..8).map(|i| row(i as f64, 2.1, 1.01)).collect());
        let rep = check_bounds(&rec, &BoundsConfig::new(2));
        let mut ids: Vec<&str> = rep.entries.iter().map(|e| e.id.as_str()).collect();
        let before = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), before);
        assert!(rep.all_passed());
    }

    #[test]
    fn tail_only_uses_final_quarter() {
        let mut rows: Vec<FlowRow> = (0..8).map(|i| row(i as f64, 2.0, 1.0)).collect();
        rows[0].kappa_max = 5.0;
        rows[0].f_min = 0.5;
        let rep = check_bounds(&record(rows), &BoundsConfig::new(2));
        assert!(rep.get("kappa_tail_upper").unwrap().passed);
        assert!(rep.get("F_tail_lower").unwrap().passed);
    }

    #[test]
    fn c0_check_reads_rows_and_flags() {
        let mut rows: Vec<FlowRow> = (0..4).map(|i| row(i as f64, 2.0, 1.0)).collect();
        rows[2].rs_max = 1.0 + 1e-6;
        let rec = record(rows);
        let rep = check_c0(&rec, 1e-8);
        assert!(!rep.get("c0_upper").unwrap().passed);
        assert!(rep.get("c0_lower").unwrap().passed);
    }

    #[test]
    fn report_text_has_one_block_per_claim() {
        let rec = record((0..8).map(|i| row(i as f64, 2.1, 1.01)).collect());
        let text = check_bounds(&rec, &BoundsConfig::new(2)).to_kv();
        assert_eq!(text.matches("[claim ").count(), 6);
        assert!(text.contains("status = pass"));
    }

    fn symmetric_record(m: f64) -> FlowRecord {
        let cfg = FlowConfig::new(2, m, 1, GridMode::Symmetric, 0, InitialData::Constant { rho0: 2.0 }, 6.0);
        run(&cfg).unwrap().record
    }

    #[test]
    fn hyperbolic_symmetric_speed_never_drops_below_n() {
        let rec = symmetric_record(0.0);
        assert!(rec.rows.iter().all(|r| r.f_min >= 2.0));
        let rep = check_bounds(&rec, &BoundsConfig::new(2));
        assert!(rep.all_passed(), "{}", rep.to_kv());
        assert!(rep.get("F_tail_lower").unwrap().margin >= 0.1);
    }

    #[test]
    fn massive_symmetric_tail_curvature() {
        // κ = √(1 + ρ⁻² − 2ρ⁻³) exceeds 1 for ρ > 2, by ≈ 2e-3 at t = 4
        let rec = symmetric_record(2.0);
        let rho = |t: f64| 2.0 * (t / 2.0).exp();
        let kappa = |t: f64| (1.0 + rho(t).powi(-2) - 2.0 * rho(t).powi(-3)).sqrt();
        let at4 = rec.rows.iter().find(|r| (r.t - 4.0).abs() < 1e-9).expect("row at t = 4");
        assert!((at4.kappa_max - kappa(4.0)).abs() <= 1e-9);
        assert!(at4.kappa_max > 1.0001);
        let rep = check_bounds(&rec, &BoundsConfig::new(2));
        let tail = rep.get("kappa_tail_upper").unwrap();
        assert!(tail.passed);
        // κ decreases for ρ > 3, so the tail maximum sits on the first row of the final quarter
        let first_tail = rec.rows.iter().find(|r| r.t >= 4.5).unwrap();
        assert!(first_tail.t < 4.53);
        assert!((tail.measured - kappa(first_tail.t)).abs() <= 1e-9);
    }

    fn row_strategy() -> impl Strategy<Value = FlowRow> {
        (0.0f64..10.0, -1.0f64..5.0, 0.5f64..3.0, 0.0f64..1.0).prop_map(|(t, f, k, d)| {
            let mut r = row(t, f, k);
            r.phi_dot_max = d;
            r
        })
    }

    proptest! {
        #[test]
        fn loosening_tolerances_never_breaks_a_claim(
            mut rows in prop::collection::vec(row_strategy(), 1..20),
            tol in 0.0f64..0.5,
            eps in 0.0f64..1.0,
            extra in 0.0f64..1.0,
        ) {
            rows.sort_by(|a, b| a.t.total_cmp(&b.t));
            let rec = record(rows);
            let tight = BoundsConfig { n: 2, tail_tol: tol, f_tail_eps: eps };
            let loose = BoundsConfig { n: 2, tail_tol: tol + extra, f_tail_eps: eps + extra };
            let (a, b) = (check_bounds(&rec, &tight), check_bounds(&rec, &loose));
            for (x, y) in a.entries.iter().zip(&b.entries) {
                prop_assert!(!x.passed || y.passed, "{} flipped", x.id);
            }
            let (c, d) = (check_c0(&rec, tol), check_c0(&rec, tol + extra));
            for (x, y) in c.entries.iter().zip(&d.entries) {
                prop_assert!(!x.passed || y.passed, "{} flipped", x.id);
            }
        }
    }
}
