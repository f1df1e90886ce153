//! Verification suites. Each returns a [`BoundReport`] whose entries carry the
//! measured value, the bound, and the margin, plus a free-form table for the
//! report file.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use warpflow_core::diagnostics::{
    check_bounds, check_c0, check_gradient_decay, check_shape_rate, codazzi_residual, default_window,
    support_identity_residual, BoundsConfig,
};
use warpflow_core::flow::run;
use warpflow_core::io::write_record_csv;
use warpflow_core::surface::geometry_from_state;
use warpflow_core::symfunc::{elementary_symmetric_all, gamma_k_contains, sigma_gradient};
use warpflow_core::{
    BoundReport, CurvatureSpeed, FlowConfig, FlowError, GraphState, GridMode, InitialData, QuotientSpeed, RunOutcome,
    SphericalGrid, WarpedAmbient,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Symmetric,
    AxisymK1,
    AxisymK2,
    Identities,
    Symfunc,
}

pub const SUITE_NAMES: [&str; 5] = ["symmetric", "axisym-k1", "axisym-k2", "identities", "symfunc"];

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(Suite::Symmetric),
            "axisym-k1" => Ok(Suite::AxisymK1),
            "axisym-k2" => Ok(Suite::AxisymK2),
            "identities" => Ok(Suite::Identities),
            "symfunc" => Ok(Suite::Symfunc),
            other => Err(format!("unknown suite '{other}' (expected one of: {})", SUITE_NAMES.join(", "))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [Suite::Symmetric, Suite::AxisymK1, Suite::AxisymK2, Suite::Identities, Suite::Symfunc]
            .iter()
            .position(|s| s == self)
            .expect("listed");
        f.write_str(SUITE_NAMES[i])
    }
}

/// A report plus human-readable tables.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutcome {
    pub report: BoundReport,
    pub tables: String,
}

impl SuiteOutcome {
    fn merge(&mut self, other: SuiteOutcome) {
        self.report.extend(other.report);
        self.tables.push_str(&other.tables);
    }
}

pub fn run_suite(suite: Suite) -> SuiteOutcome {
    match suite {
        Suite::Symmetric => {
            let mut out = symmetric_exactness();
            out.merge(symmetric_rate());
            out
        }
        Suite::AxisymK1 => {
            let (mut out, _) = axisymmetric_flow(&axisymmetric_k1_config());
            out.merge(robustness(&axisymmetric_k1_config()));
            out
        }
        Suite::AxisymK2 => axisymmetric_flow(&axisymmetric_k2_config()).0,
        Suite::Identities => identities(),
        Suite::Symfunc => symfunc_properties(SYMFUNC_SAMPLES),
    }
}

fn abort_entry(report: &mut BoundReport, id: &str, err: &FlowError) {
    report.push(id, "run completes", false, f64::NAN, f64::NAN, f64::NAN).note = err.to_string();
}

const SYMMETRIC_CASES: [(usize, f64); 4] = [(1, 0.0), (1, 2.0), (2, 0.0), (2, 2.0)];

fn symmetric_config(k: usize, m: f64, t_end: f64) -> FlowConfig {
    let mut c = FlowConfig::new(2, m, k, GridMode::Symmetric, 0, InitialData::Constant { rho0: 2.0 }, t_end);
    c.dt_max = 1e-3;
    c.cadence = 1;
    c
}

/// Symmetric runs to t = 4 against `ρ = 2e^{t/2}`.
pub fn symmetric_exactness() -> SuiteOutcome {
    let results: Vec<_> = SYMMETRIC_CASES.par_iter().map(|&(k, m)| ((k, m), run(&symmetric_config(k, m, 4.0)))).collect();
    let mut out = SuiteOutcome::default();
    let _ = writeln!(out.tables, "# symmetric exactness: max relative error of rho against 2 e^(t/2)");
    for ((k, m), res) in results {
        let id = format!("exact.k{k}.m{m}");
        match res {
            Ok(o) => {
                let err = o
                    .record
                    .rows
                    .iter()
                    .flat_map(|r| {
                        let exact = 2.0 * (r.t / 2.0).exp();
                        [(r.rho_min - exact).abs() / exact, (r.rho_max - exact).abs() / exact]
                    })
                    .fold(0.0, f64::max);
                let _ = writeln!(out.tables, "k={k} m={m} steps={} max_rel_err={err:.3e}", o.record.flags.steps);
                out.report.upper(&id, "symmetric radius matches rho0 e^(t/n)", err, 1e-9);
            }
            Err(e) => abort_entry(&mut out.report, &id, &e),
        }
    }
    out
}

/// Symmetric runs to t = 6: decay of `max|κ − 1|` on [3, 6].
pub fn symmetric_rate() -> SuiteOutcome {
    let results: Vec<_> = SYMMETRIC_CASES.par_iter().map(|&(k, m)| ((k, m), run(&symmetric_config(k, m, 6.0)))).collect();
    let mut out = SuiteOutcome::default();
    let _ = writeln!(out.tables, "# symmetric rate: fit of max|kappa-1| on t in [3, 6], expected slope -1");
    for ((k, m), res) in results {
        let id = format!("rate.k{k}.m{m}");
        match res {
            Ok(o) => {
                let (rep, fit) = check_shape_rate(&o.record, (3.0, 6.0), -1.0, 0.05, Some(0.999));
                if let Some(fit) = fit {
                    let _ = writeln!(out.tables, "k={k} m={m} slope={:.6} r2={:.8}", fit.slope, fit.r_squared);
                }
                out.report.extend(rep.prefixed(&id));
            }
            Err(e) => abort_entry(&mut out.report, &id, &e),
        }
    }
    out
}

pub fn axisymmetric_k1_config() -> FlowConfig {
    FlowConfig::new(2, 0.0, 1, GridMode::Axisymmetric, 128, InitialData::CosBump { rho0: 3.0, eps: 0.3 }, 6.0)
}

pub fn axisymmetric_k2_config() -> FlowConfig {
    FlowConfig::new(2, 2.0, 2, GridMode::Axisymmetric, 128, InitialData::CosBump { rho0: 3.0, eps: 0.3 }, 6.0)
}

/// Monitored estimates (a)–(f) on an anisotropic run.
pub fn axisymmetric_flow(config: &FlowConfig) -> (SuiteOutcome, Option<RunOutcome>) {
    let mut out = SuiteOutcome::default();
    let tag = format!("axisym.k{}.m{}", config.k, config.m);
    let outcome = match run(config) {
        Ok(o) => o,
        Err(e) => {
            abort_entry(&mut out.report, &tag, &e);
            return (out, None);
        }
    };
    let record = &outcome.record;
    let n = config.n as f64;
    let mut rep = BoundReport::new();

    rep.extend(check_c0(record, 1e-8));

    let window = default_window(record).unwrap_or((0.0, config.t_end));
    rep.extend(check_gradient_decay(record, window, -0.1));

    let f_min = record.rows.iter().map(|r| r.f_min).fold(f64::INFINITY, f64::min);
    let f_max = record.rows.iter().map(|r| r.f_max).fold(f64::NEG_INFINITY, f64::max);
    rep.lower("F_min_positive", "F stays positive", f_min, 0.0).passed = f_min > 0.0;
    rep.push("F_max_below_10", "F stays below 10", f_max < 10.0, f_max, 10.0, 10.0 - f_max);

    let final_dev = record.last().map_or(f64::NAN, |r| r.dev_max);
    rep.upper("final_deviation", "max|kappa - 1| at t_end", final_dev, 0.05);
    let (shape, fit) = check_shape_rate(record, window, -2.0 / n, 0.2, None);
    rep.extend(shape);

    let mut bounds = BoundsConfig::new(config.n);
    bounds.tail_tol = 0.02;
    bounds.f_tail_eps = 0.1;
    rep.extend(check_bounds(record, &bounds));

    let _ = writeln!(
        out.tables,
        "# {tag}: N={} steps={} rows={} t_end={}",
        config.resolution,
        record.flags.steps,
        record.rows.len(),
        record.last().map_or(0.0, |r| r.t)
    );
    let _ = writeln!(out.tables, "window=({:.3}, {:.3}) final_dev={final_dev:.6e} F in [{f_min:.6}, {f_max:.6}]", window.0, window.1);
    if let Some(fit) = fit {
        let _ = writeln!(out.tables, "shape slope={:.6} r2={:.6}", fit.slope, fit.r_squared);
    }
    out.report = rep.prefixed(&tag);
    (out, Some(outcome))
}

fn record_bytes(outcome: &RunOutcome) -> Vec<u8> {
    let mut buf = Vec::new();
    write_record_csv(&outcome.record, &mut buf).expect("in-memory write");
    buf
}

/// Halved step and bitwise reproducibility of an anisotropic run.
pub fn robustness(config: &FlowConfig) -> SuiteOutcome {
    let mut halved = config.clone();
    halved.cfl_safety *= 0.5;
    halved.dt_max *= 0.5;
    let configs = [config.clone(), halved, config.clone()];
    let results: Vec<Result<RunOutcome, FlowError>> = configs.par_iter().map(run).collect();
    let mut out = SuiteOutcome::default();
    let tag = format!("robust.k{}.m{}", config.k, config.m);
    let outcomes: Vec<RunOutcome> = match results.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(v) => v,
        Err(e) => {
            abort_entry(&mut out.report, &tag, &e);
            return out;
        }
    };
    let dev = |o: &RunOutcome| o.record.last().map_or(f64::NAN, |r| r.dev_max);
    let (base, half) = (dev(&outcomes[0]), dev(&outcomes[1]));
    let rel = ((half - base) / base).abs();
    out.report.upper(&format!("{tag}.halved_dt"), "final max|kappa-1| insensitive to halving dt", rel, 1e-6);
    let identical = record_bytes(&outcomes[0]) == record_bytes(&outcomes[2]);
    out.report.push(
        &format!("{tag}.bitwise"),
        "repeated runs give identical record files",
        identical,
        if identical { 0.0 } else { 1.0 },
        0.0,
        if identical { 0.0 } else { -1.0 },
    );
    let _ = writeln!(
        out.tables,
        "# {tag}: final dev {base:.12e} (dt) vs {half:.12e} (dt/2), rel {rel:.3e}; steps {} vs {}",
        outcomes[0].record.flags.steps, outcomes[1].record.flags.steps
    );
    out
}

/// Residuals of the Codazzi and support identities under refinement.
pub fn identities() -> SuiteOutcome {
    let mut out = SuiteOutcome::default();
    let speed = QuotientSpeed::new(2, 1).expect("valid");
    let snapshot = |amb: &WarpedAmbient, res: usize, f: &dyn Fn(f64) -> f64| {
        let grid = SphericalGrid::build(GridMode::Axisymmetric, 2, res).expect("valid grid");
        let state = GraphState { t: 0.0, rho: grid.theta().iter().map(|&t| f(t)).collect() };
        let snap = geometry_from_state(&state, &grid, amb, &speed).expect("admissible surface");
        (snap, grid)
    };

    let ambients = [
        ("m0", WarpedAmbient::ads(2, 0.0).expect("valid")),
        ("m2", WarpedAmbient::ads(2, 2.0).expect("valid")),
        ("flat", WarpedAmbient::flat(2).expect("valid")),
    ];
    let _ = writeln!(out.tables, "# identity residuals on rho = 3 + 0.3 cos 2theta");
    let _ = writeln!(out.tables, "ambient N codazzi support");
    for (name, amb) in &ambients {
        let (snap, grid) = snapshot(amb, 64, &|_| 2.5);
        let c = codazzi_residual(&snap, &grid, amb).expect("axisymmetric");
        let s = support_identity_residual(&snap, &grid).expect("axisymmetric");
        out.report.upper(&format!("identities.{name}.constant.codazzi"), "Codazzi residual on a constant graph", c, 1e-12);
        out.report.upper(&format!("identities.{name}.constant.support"), "support residual on a constant graph", s, 1e-12);

        if *name == "flat" {
            continue;
        }
        let levels = [64usize, 128, 256];
        let rows: Vec<(f64, f64)> = levels
            .par_iter()
            .map(|&res| {
                let (snap, grid) = snapshot(amb, res, &|t| 3.0 + 0.3 * (2.0 * t).cos());
                (codazzi_residual(&snap, &grid, amb).expect("axisymmetric"), support_identity_residual(&snap, &grid).expect("axisymmetric"))
            })
            .collect();
        for (res, (c, s)) in levels.iter().zip(&rows) {
            let _ = writeln!(out.tables, "{name} {res} {c:.6e} {s:.6e}");
        }
        for (i, w) in rows.windows(2).enumerate() {
            let (lo, hi) = (levels[i], levels[i + 1]);
            let oc = (w[0].0 / w[1].0).log2();
            let os = (w[0].1 / w[1].1).log2();
            out.report.lower(&format!("identities.{name}.codazzi_order.{lo}_{hi}"), "Codazzi residual refinement order", oc, 1.8);
            out.report.lower(&format!("identities.{name}.support_order.{lo}_{hi}"), "support residual refinement order", os, 1.8);
        }
    }
    out
}

pub const SYMFUNC_SAMPLES: usize = 10_000;
pub const SYMFUNC_CASES: [(usize, usize); 5] = [(2, 1), (2, 2), (3, 2), (3, 3), (4, 2)];

/// Samples `λ_i ~ Normal(1, 0.75)` and keeps those inside `Γ_k`.
pub fn cone_samples(n: usize, k: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(1.0, 0.75).expect("valid");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let lambda: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        if gamma_k_contains(&lambda, k) {
            out.push(lambda);
        }
    }
    out
}

/// Romberg-extrapolated central differences of `F` along coordinate `i`.
/// The base step shrinks until every stencil point stays inside the cone;
/// the estimate is taken where successive extrapolations agree best.
fn fd_partial(speed: &QuotientSpeed, lambda: &[f64], i: usize) -> Option<f64> {
    const LEVELS: usize = 5;
    let k = speed.k();
    let at = |d: f64| {
        let mut p = lambda.to_vec();
        p[i] += d;
        gamma_k_contains(&p, k).then(|| speed.value(&p).ok()).flatten()
    };
    let mut h = 1e-2 * lambda.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-3);
    for _ in 0..40 {
        let central: Option<Vec<f64>> = (0..LEVELS)
            .map(|l| {
                let hl = h / (1 << l) as f64;
                Some((at(hl)? - at(-hl)?) / (2.0 * hl))
            })
            .collect();
        if let Some(mut row) = central {
            let mut best = (f64::INFINITY, row[LEVELS - 1]);
            let mut factor = 4.0;
            for _ in 1..LEVELS {
                let next: Vec<f64> = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
                for w in next.windows(2) {
                    let spread = (w[1] - w[0]).abs();
                    if spread < best.0 {
                        best = (spread, w[1]);
                    }
                }
                if next.len() == 1 {
                    break;
                }
                row = next;
                factor *= 4.0;
            }
            return Some(best.1);
        }
        h *= 0.5;
    }
    None
}

#[derive(Debug, Clone, Copy, Default)]
struct CaseStats {
    identity: f64,
    lemma1: f64,
    trace_lo: f64,
    trace_hi: f64,
    fd: f64,
    euler: f64,
    concavity: f64,
    homogeneity: f64,
    homogeneity_ten: f64,
}

fn symfunc_case(n: usize, k: usize, samples: usize) -> CaseStats {
    let speed = QuotientSpeed::new(n, k).expect("valid case");
    let pts = cone_samples(n, k, samples, 1000 * n as u64 + k as u64);
    let nf = n as f64;
    let mut st = CaseStats { lemma1: f64::INFINITY, trace_lo: f64::INFINITY, trace_hi: f64::NEG_INFINITY, concavity: f64::INFINITY, ..Default::default() };
    for (idx, lambda) in pts.iter().enumerate() {
        let sig = elementary_symmetric_all(lambda);
        for l in 1..n {
            let grad = sigma_gradient(lambda, l).expect("in range");
            let lhs: f64 = grad.iter().zip(lambda).map(|(g, x)| g * x * x).sum();
            let rhs = sig[1] * sig[l] - (l + 1) as f64 * sig[l + 1];
            let scale = lhs.abs().max((sig[1] * sig[l]).abs()).max(((l + 1) as f64 * sig[l + 1]).abs()).max(f64::MIN_POSITIVE);
            st.identity = st.identity.max((lhs - rhs).abs() / scale);
        }

        let (f, grad) = speed.value_and_gradient(lambda).expect("in cone");
        let quad: f64 = grad.iter().zip(lambda).map(|(g, x)| g * x * x).sum();
        st.lemma1 = st.lemma1.min((quad - f * f / nf) / (f * f));
        let trace: f64 = grad.iter().sum();
        st.trace_lo = st.trace_lo.min(trace - nf);
        st.trace_hi = st.trace_hi.max(trace - nf * k as f64);
        let euler: f64 = grad.iter().zip(lambda).map(|(g, x)| g * x).sum();
        let euler_scale = grad.iter().zip(lambda).map(|(g, x)| (g * x).abs()).sum::<f64>().max(f);
        st.euler = st.euler.max((euler - f).abs() / euler_scale);
        for (i, &g) in grad.iter().enumerate() {
            if let Some(fd) = fd_partial(&speed, lambda, i) {
                st.fd = st.fd.max((fd - g).abs() / g.abs());
            }
        }
        for c in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = lambda.iter().map(|x| c * x).collect();
            let fc = speed.value(&scaled).expect("cone is a cone");
            let rel = (fc - c * f).abs() / (c * f);
            // scaling by 10 rounds λ, which the cancellation in σ_k amplifies near the cone boundary
            if c == 10.0 {
                st.homogeneity_ten = st.homogeneity_ten.max(rel);
            } else {
                st.homogeneity = st.homogeneity.max(rel);
            }
        }
        if idx % 2 == 1 {
            let prev = &pts[idx - 1];
            let mid: Vec<f64> = prev.iter().zip(lambda).map(|(a, b)| 0.5 * (a + b)).collect();
            let fm = speed.value(&mid).expect("cone is convex");
            let fp = speed.value(prev).expect("in cone");
            st.concavity = st.concavity.min(fm - 0.5 * (fp + f));
        }
    }
    st
}

/// Structural identities and inequalities of the quotient speed on random
/// cone samples.
pub fn symfunc_properties(samples: usize) -> SuiteOutcome {
    let stats: Vec<CaseStats> = SYMFUNC_CASES.par_iter().map(|&(n, k)| symfunc_case(n, k, samples)).collect();
    let mut out = SuiteOutcome::default();
    let _ = writeln!(out.tables, "# symmetric-function properties, {samples} samples per case");
    let _ = writeln!(out.tables, "n k identity lemma1_slack trace_lo trace_hi fd_rel euler concavity homog(0.5,2) homog(10)");
    for (&(n, k), st) in SYMFUNC_CASES.iter().zip(&stats) {
        let _ = writeln!(
            out.tables,
            "{n} {k} {:.2e} {:.3e} {:.3e} {:.3e} {:.2e} {:.2e} {:.3e} {:.2e} {:.2e}",
            st.identity, st.lemma1, st.trace_lo, st.trace_hi, st.fd, st.euler, st.concavity, st.homogeneity, st.homogeneity_ten
        );
        let id = |name: &str| format!("symfunc.n{n}k{k}.{name}");
        let r = &mut out.report;
        r.upper(&id("sigma_identity"), "sum_i sigma_l^ii lambda_i^2 = sigma_1 sigma_l - (l+1) sigma_(l+1)", st.identity, 1e-12);
        r.lower(&id("quadratic_lower"), "sum_i F^ii lambda_i^2 >= F^2/n (relative slack)", st.lemma1, -1e-10);
        r.lower(&id("trace_lower"), "sum_i F^ii >= n", st.trace_lo, -1e-10);
        r.upper(&id("trace_upper"), "sum_i F^ii <= nk", st.trace_hi, 1e-10);
        r.upper(&id("gradient_fd"), "F^ii matches finite differences", st.fd, 1e-6);
        r.upper(&id("euler"), "sum_i F^ii lambda_i = F", st.euler, 1e-12);
        r.lower(&id("concavity"), "midpoint concavity", st.concavity, -1e-10);
        r.upper(&id("homogeneity"), "F(c lambda) = c F(lambda), c in {0.5, 2}", st.homogeneity, 1e-12);
    }
    out
}
