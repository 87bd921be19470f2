use serde::{Deserialize, Serialize};

use super::{Axis, ReportRow};
use crate::error::{invalid, Error, Result};

/// Quantity on the vertical axis of a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerField {
    HamsimTime,
    TrialCalls,
    WalkSteps,
    GateProxy,
    QubitsPeak,
}

impl LedgerField {
    pub fn of(self, r: &ReportRow) -> f64 {
        match self {
            LedgerField::HamsimTime => r.hamsim_time,
            LedgerField::TrialCalls => r.trial_calls as f64,
            LedgerField::WalkSteps => r.walk_steps as f64,
            LedgerField::GateProxy => r.gate_proxy as f64,
            LedgerField::QubitsPeak => r.qubits_peak as f64,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        toml::Value::String(s.into()).try_into().map_err(|_| Error::Parse(format!("unknown ledger field `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(x, mean y)` per sweep point, x already transformed.
    pub points: Vec<(f64, f64)>,
}

/// Horizontal coordinate of a row: `1/Delta`, `1/eps`, `1/chi`, `1/xi`, and
/// `kappa`, `dim` as they are.
pub fn axis_value(r: &ReportRow, axis: Axis) -> Option<f64> {
    match axis {
        Axis::Delta => r.delta_lb.map(|v| 1.0 / v),
        Axis::Eps => r.eps.map(|v| 1.0 / v),
        Axis::Chi => r.chi.map(|v| 1.0 / v),
        Axis::Xi => r.xi.map(|v| 1.0 / v),
        Axis::Kappa => r.kappa,
        Axis::Dim => Some(r.dim as f64),
    }
}

/// Least squares of `ln y` on `ln x`.
pub fn log_log_fit(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return invalid("log-log fit needs at least two points with positive coordinates");
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-24 {
        return invalid("degenerate x range");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(Fit { slope, intercept, r2, points: points.to_vec() })
}

/// Fit of the per-point mean of `y` against the sweep axis; needs four points.
pub fn scaling_fit(rows: &[ReportRow], axis: Axis, y: LedgerField) -> Result<Fit> {
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows {
        let Some(x) = axis_value(r, axis) else { continue };
        let v = y.of(r);
        if !(v > 0.0) {
            continue;
        }
        match groups.iter_mut().find(|g| g.0 == x) {
            Some(g) => {
                g.1 += v;
                g.2 += 1;
            }
            None => groups.push((x, v, 1)),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    if groups.len() < 4 {
        return invalid(format!("scaling fit needs 4 sweep points, got {}", groups.len()));
    }
    let pts: Vec<(f64, f64)> = groups.into_iter().map(|(x, s, n)| (x, s / n as f64)).collect();
    log_log_fit(&pts)
}
