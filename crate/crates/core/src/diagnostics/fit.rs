use super::DiagnosticError;
use crate::flow::FlowRecord;

/// Least-squares line through `(t, ln y)` over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub window: (f64, f64),
    /// Signed exponential rate: `y ≈ e^{intercept} e^{slope·t}`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit, DiagnosticError> {
    let (ta, tb) = window;
    if !(ta < tb) {
        return Err(DiagnosticError::Argument(format!("empty window ({ta}, {tb})")));
    }
    let picked: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= ta && t <= tb).collect();
    if picked.len() < 3 {
        return Err(DiagnosticError::Argument(format!(
            "need at least 3 samples in ({ta}, {tb}), got {}",
            picked.len()
        )));
    }
    if let Some(&(t, y)) = picked.iter().find(|&&(_, y)| !(y > 0.0)) {
        return Err(DiagnosticError::NonPositive { t, y });
    }
    let count = picked.len() as f64;
    let mean_t = picked.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_l = picked.iter().map(|p| p.1.ln()).sum::<f64>() / count;
    let (mut stt, mut stl, mut sll) = (0.0, 0.0, 0.0);
    for &(t, y) in &picked {
        let (dt, dl) = (t - mean_t, y.ln() - mean_l);
        stt += dt * dt;
        stl += dt * dl;
        sll += dl * dl;
    }
    if stt == 0.0 {
        return Err(DiagnosticError::Argument("all samples share one time".into()));
    }
    let slope = stl / stt;
    let intercept = mean_l - slope * mean_t;
    let residual: f64 = picked.iter().map(|&(t, y)| (y.ln() - intercept - slope * t).powi(2)).sum();
    let r_squared = if sll == 0.0 { 1.0 } else { (1.0 - residual / sll).clamp(0.0, 1.0) };
    Ok(RateFit { window, slope, intercept, r_squared, samples: picked.len() })
}

/// The final half of the run; when a stop tolerance ended the run early the
/// last two samples are left out.
pub fn default_window(record: &FlowRecord) -> Option<(f64, f64)> {
    let first = record.rows.first()?.t;
    let usable = if record.flags.stopped_early { record.rows.len().checked_sub(2)? } else { record.rows.len() };
    let last = record.rows.get(usable.checked_sub(1)?)?.t;
    (last > first).then_some((first + 0.5 * (last - first), last))
}
