//! Four-panel semilog SVG of a flow record.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use thiserror::Error;
use warpflow_core::diagnostics::{default_window, fit_decay_rate};
use warpflow_core::io::{read_record_csv, ParseError};
use warpflow_core::{FlowRecord, FlowRow};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 260.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 40.0;
const MARGIN_R: f64 = 16.0;
const COLORS: [&str; 2] = ["#1f4e9c", "#c0392b"];

type Series = (&'static str, fn(&FlowRow) -> f64);

struct Panel {
    title: &'static str,
    series: Vec<Series>,
    /// Fit the first series and annotate the exponent.
    fit: bool,
}

fn panels() -> Vec<Panel> {
    vec![
        Panel { title: "max |kappa - 1|", series: vec![("dev", |r| r.dev_max)], fit: true },
        Panel { title: "max |grad phi|", series: vec![("grad", |r| r.grad_phi_max)], fit: true },
        Panel { title: "F_min / F_max", series: vec![("F_min", |r| r.f_min), ("F_max", |r| r.f_max)], fit: false },
        Panel {
            title: "e^(-t/n) rho extremes",
            series: vec![("min", |r| r.rs_min), ("max", |r| r.rs_max)],
            fit: false,
        },
    ]
}

/// Exponent annotation, e.g. `rate −1.00`.
pub fn rate_label(slope: f64) -> String {
    format!("rate {slope:.2}").replace('-', "\u{2212}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_panel(out: &mut String, panel: &Panel, record: &FlowRecord, x0: f64, y0: f64) {
    let (pw, ph) = (PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B);
    let (left, top) = (x0 + MARGIN_L, y0 + MARGIN_T);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="14" font-weight="bold">{}</text>"#, left, y0 + 22.0, escape(panel.title));
    let _ = writeln!(out, r##"<rect x="{left:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#444"/>"##);

    let t_lo = record.rows.first().map_or(0.0, |r| r.t);
    let t_hi = record.rows.last().map_or(1.0, |r| r.t);
    let t_span = if t_hi > t_lo { t_hi - t_lo } else { 1.0 };
    let logs: Vec<f64> = panel
        .series
        .iter()
        .flat_map(|(_, f)| record.rows.iter().map(f))
        .filter(|y| *y > 0.0 && y.is_finite())
        .map(f64::log10)
        .collect();
    if logs.is_empty() {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="12">no positive data</text>"#, left + 10.0, top + 20.0);
        return;
    }
    let mut lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let mut hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
    if hi <= lo {
        lo -= 1.0;
        hi += 1.0;
    }
    let px = |t: f64| left + (t - t_lo) / t_span * pw;
    let py = |ly: f64| top + (hi - ly) / (hi - lo) * ph;

    for decade in (lo as i32)..=(hi as i32) {
        let y = py(decade as f64);
        let _ = writeln!(out, r##"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, left + pw);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">1e{decade}</text>"#, left - 4.0, y + 3.0);
    }
    for i in 0..=4 {
        let t = t_lo + t_span * i as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{t:.2}</text>"#, px(t), top + ph + 14.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">t</text>"#, left + 0.5 * pw, top + ph + 30.0);

    for (si, (name, f)) in panel.series.iter().enumerate() {
        let pts: Vec<String> = record
            .rows
            .iter()
            .map(|r| (r.t, f(r)))
            .filter(|(_, y)| *y > 0.0 && y.is_finite())
            .map(|(t, y)| format!("{:.2},{:.2}", px(t), py(y.log10())))
            .collect();
        let color = COLORS[si % COLORS.len()];
        if pts.len() == 1 {
            let (x, y) = pts[0].split_once(',').expect("formatted pair");
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        } else if !pts.is_empty() {
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        if panel.series.len() > 1 {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}" text-anchor="end">{name}</text>"#,
                left + pw - 6.0,
                top + 14.0 + 13.0 * si as f64
            );
        }
    }

    if panel.fit {
        let f = panel.series[0].1;
        let fit = default_window(record).and_then(|w| fit_decay_rate(&record.series(f), w).ok());
        if let Some(fit) = fit {
            let line = |t: f64| py((fit.intercept + fit.slope * t) / std::f64::consts::LN_10);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#2e8b57" stroke-dasharray="5,3"/>"##,
                px(fit.window.0),
                line(fit.window.0),
                px(fit.window.1),
                line(fit.window.1)
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.1}" y="{:.1}" font-size="12" fill="#2e8b57" text-anchor="end">{}</text>"##,
                left + pw - 6.0,
                top + 16.0,
                rate_label(fit.slope)
            );
        }
    }
}

pub fn render_svg(record: &FlowRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = 2.0 * PANEL_W,
        h = 2.0 * PANEL_H
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels().iter().enumerate() {
        let x0 = (i % 2) as f64 * PANEL_W;
        let y0 = (i / 2) as f64 * PANEL_H;
        let _ = writeln!(out, r#"<g class="panel" id="panel-{i}">"#);
        render_panel(&mut out, panel, record, x0, y0);
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

/// Reads a record CSV and writes the plot to `out`.
pub fn cmd_plot(csv: &Path, out: &Path) -> Result<(), PlotError> {
    let path = csv.display().to_string();
    let file = File::open(csv).map_err(|source| PlotError::Io { path: path.clone(), source })?;
    let rows = read_record_csv(BufReader::new(file)).map_err(|source| PlotError::Parse { path, source })?;
    let mut record = FlowRecord::new(0);
    record.rows = rows;
    std::fs::write(out, render_svg(&record)).map_err(|source| PlotError::Io { path: out.display().to_string(), source })
}
