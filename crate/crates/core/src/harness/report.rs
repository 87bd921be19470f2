use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Format};
use crate::error::{Error, Result};
use crate::result::RunResult;

/// One flattened run. Field order is the CSV column order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub dim: usize,
    pub delta_true: f64,
    pub delta_lb: Option<f64>,
    pub chi: Option<f64>,
    pub phi0: f64,
    pub eps: Option<f64>,
    pub xi: Option<f64>,
    pub kappa: Option<f64>,
    pub seed: u64,
    pub success: bool,
    pub fidelity: f64,
    pub energy_error: Option<f64>,
    pub hamsim_time: f64,
    pub trial_calls: u64,
    pub walk_steps: u64,
    pub gate_proxy: u64,
    pub qubits_peak: u32,
    pub wall_ms: f64,
    /// Why the run could not be carried out; not part of the report.
    #[serde(skip)]
    pub error: Option<String>,
}

pub const CSV_COLUMNS: [&str; 19] = [
    "method", "dim", "delta_true", "delta_lb", "chi", "phi0", "eps", "xi", "kappa", "seed", "success", "fidelity",
    "energy_error", "hamsim_time", "trial_calls", "walk_steps", "gate_proxy", "qubits_peak", "wall_ms",
];

impl ReportRow {
    pub fn from_result(method: &str, r: &RunResult) -> Self {
        Self {
            method: method.into(),
            dim: r.dim,
            delta_true: r.delta_true,
            delta_lb: r.delta_lb,
            chi: r.chi,
            phi0: r.phi0,
            eps: r.eps,
            xi: r.xi,
            kappa: r.kappa,
            seed: r.seed,
            success: r.success,
            fidelity: r.fidelity,
            energy_error: r.energy_error,
            hamsim_time: r.ledger.hamsim_time,
            trial_calls: r.ledger.trial_calls,
            walk_steps: r.ledger.walk_steps,
            gate_proxy: r.ledger.elementary_gate_proxy,
            qubits_peak: r.ledger.qubits_peak,
            wall_ms: r.wall_ms,
            error: None,
        }
    }

    pub(crate) fn failed(cfg: &ExperimentConfig, value: Option<f64>, trial: usize, msg: &str) -> Self {
        let p = cfg.at(value, trial).map(|(_, o, p)| (o, p)).ok();
        Self {
            method: cfg.method.name().into(),
            seed: cfg.seed.wrapping_add(trial as u64),
            phi0: p.as_ref().map(|x| x.0).unwrap_or(cfg.overlap),
            delta_lb: p.as_ref().and_then(|x| x.1.delta_lb),
            eps: p.as_ref().map(|x| x.1.eps),
            xi: p.as_ref().and_then(|x| x.1.xi),
            kappa: p.as_ref().and_then(|x| x.1.kappa),
            error: Some(msg.into()),
            ..Default::default()
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    rd.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn write_json<W: Write>(rows: &[ReportRow], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, rows).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json(text: &str) -> Result<Vec<ReportRow>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn render(rows: &[ReportRow], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => write_json(rows, &mut buf)?,
    }
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes the report to `path`, or to stdout without one.
pub fn emit_report(rows: &[ReportRow], format: Format, path: Option<&Path>) -> Result<()> {
    let text = render(rows, format)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: u64) -> ReportRow {
        ReportRow { method: "grid".into(), dim: 16, delta_true: 0.1, chi: Some(0.5), seed, success: seed % 2 == 0, hamsim_time: 1.5e3, energy_error: Some(1e-3), ..Default::default() }
    }

    #[test]
    fn empty_is_header_only() {
        let s = render(&[], Format::Csv).unwrap();
        assert_eq!(s.trim_end(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn round_trips() {
        let rows = vec![row(0), row(1)];
        assert_eq!(read_json(&render(&rows, Format::Json).unwrap()).unwrap(), rows);
        assert_eq!(read_csv(&render(&rows, Format::Csv).unwrap()).unwrap(), rows);
        let csv = render(&rows, Format::Csv).unwrap();
        assert!(csv.lines().nth(1).unwrap().starts_with("grid,16,0.1,,0.5,"));
    }
}
