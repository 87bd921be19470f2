use serde::{Deserialize, Serialize};

use super::{
    certified_zeta, grid_branch_table, grid_len, min_label_find, predicted_width, ControlledV, EnergyGrid,
    LabelSearchOutcome, LabelSearchParams, LiteralSearch, DEFAULT_SEARCH_DELTA,
};
use crate::baselines::pea_bracket;
use crate::error::{invalid, Result};
use crate::lcu::{FourierCoefficients, FourierParams};
use crate::ledger::ResourceLedger;
use crate::registers::DEFAULT_QUBIT_CAP;
use crate::result::RunResult;
use crate::rng::{stream, Rng, STREAM_MEASURE};
use crate::spectra::{SpectralOracle, TrialState};

/// Shrink factor applied to the gap parameter while looking for one whose
/// predicted accuracy meets the target.
const GAP_SCAN_FACTOR: f64 = 0.97;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnknownEnergyConfig {
    pub delta_lb: f64,
    pub chi: f64,
    pub eps: f64,
    pub search_delta: f64,
    /// Upper limit on the number of grid points.
    pub grid_cap: Option<usize>,
    /// Run the searches on full register states instead of branch tables.
    pub literal: bool,
    pub qubit_cap: usize,
}

impl UnknownEnergyConfig {
    pub fn new(delta_lb: f64, chi: f64, eps: f64) -> Self {
        Self { delta_lb, chi, eps, search_delta: DEFAULT_SEARCH_DELTA, grid_cap: None, literal: false, qubit_cap: DEFAULT_QUBIT_CAP }
    }
}

/// Everything fixed before the search runs.
#[derive(Clone, Debug)]
pub struct GridPlan {
    pub params: FourierParams,
    pub coeffs: FourierCoefficients,
    pub grid: EnergyGrid,
    pub search: LabelSearchParams,
    /// Returned energies lie in `(lambda_0 - width, lambda_0]` on success.
    pub width: f64,
}

impl GridPlan {
    /// Grid over `[a, b]` for gap parameter `delta`.
    pub fn new(delta: f64, a: f64, b: f64, cfg: &UnknownEnergyConfig) -> Result<Self> {
        let params = FourierParams::choose(delta, cfg.chi, cfg.eps)?;
        let coeffs = FourierCoefficients::new(params.m, params.m0)?;
        let mut len = grid_len(&params, b - a);
        if let Some(cap) = cfg.grid_cap {
            len = len.min(cap.max(1).next_power_of_two());
        }
        let grid = EnergyGrid::over(a, b, len)?;
        let zeta = certified_zeta(cfg.chi, &params, &coeffs, &grid)?;
        let search = LabelSearchParams::new(grid.bits(), zeta, cfg.search_delta)?;
        let width = predicted_width(&params, &coeffs, &grid, &search);
        Ok(Self { params, coeffs, grid, search, width })
    }

    /// Largest gap parameter (scanning down from `delta_lb`) whose predicted
    /// half-width is at most `xi`.
    pub fn for_accuracy(xi: f64, a: f64, b: f64, cfg: &UnknownEnergyConfig) -> Result<Self> {
        let mut delta = cfg.delta_lb.min(0.99);
        for _ in 0..400 {
            let plan = Self::new(delta, a, b, cfg)?;
            if plan.width / 2.0 <= xi {
                return Ok(plan);
            }
            delta *= GAP_SCAN_FACTOR;
        }
        invalid(format!("no gap parameter reaches accuracy {xi}"))
    }

    /// Runs the search; returns the outcome and the midpoint energy estimate.
    pub fn run(&self, oracle: &SpectralOracle, trial: &TrialState, cfg: &UnknownEnergyConfig, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<(LabelSearchOutcome, Option<f64>)> {
        let h = oracle.hamiltonian;
        let out = if cfg.literal {
            let v = ControlledV::new(oracle, &trial.eigen, &self.params, &self.grid, cfg.qubit_cap)?;
            let mut eng = LiteralSearch::new(&v, "lab", &["anc"])?;
            min_label_find(&mut eng, &self.search, rng, ledger)?
        } else {
            if !oracle.is_exact() {
                return invalid("branch tables need an exact oracle; use the literal engine");
            }
            let mut eng = grid_branch_table(h, &trial.eigen, &self.params, &self.coeffs, &self.grid)?;
            ledger.note_qubits(eng.call_cost().qubits_peak as usize);
            min_label_find(&mut eng, &self.search, rng, ledger)?
        };
        let est = out.label.map(|j| self.grid.energy(j) + self.width.min(1.0) / 2.0);
        Ok((out, est))
    }
}

fn fill(r: &mut RunResult, oracle: &SpectralOracle, out: LabelSearchOutcome, est: Option<f64>) {
    let h = oracle.hamiltonian;
    r.success = out.success;
    r.label = out.label;
    r.label_norm = out.branch_norm;
    if let Some(e) = est {
        r.set_energy(h, e);
    }
    if let Some(s) = out.state {
        r.set_state(h, h.from_eigen(&s));
    }
}

/// Ground-state preparation without knowledge of the ground energy: search
/// over the grid `E_j = j/L` on `[0, 1]`.
pub fn prepare_ground_unknown_energy(oracle: &SpectralOracle, trial: &TrialState, cfg: &UnknownEnergyConfig, seed: u64) -> Result<RunResult> {
    let plan = GridPlan::new(cfg.delta_lb, 0.0, 1.0, cfg)?;
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut ledger = ResourceLedger::new();
    let (out, est) = plan.run(oracle, trial, cfg, &mut rng, &mut ledger)?;
    let mut r = RunResult::new("grid", oracle.hamiltonian, trial.overlap.norm(), seed);
    r.delta_lb = Some(cfg.delta_lb);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);
    fill(&mut r, oracle, out, est);
    r.stages.push(("search".into(), ledger));
    r.ledger = ledger;
    Ok(r)
}

/// Ground-energy estimate to additive precision `xi` with the grid search.
pub fn estimate_ground_energy_grid(oracle: &SpectralOracle, trial: &TrialState, xi: f64, cfg: &UnknownEnergyConfig, seed: u64) -> Result<RunResult> {
    if !(xi > 0.0 && xi < 0.5) {
        return invalid(format!("xi = {xi} outside (0, 1/2)"));
    }
    let plan = GridPlan::for_accuracy(xi, 0.0, 1.0, cfg)?;
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut ledger = ResourceLedger::new();
    let (out, est) = plan.run(oracle, trial, cfg, &mut rng, &mut ledger)?;
    let mut r = RunResult::new("grid-estimate", oracle.hamiltonian, trial.overlap.norm(), seed);
    r.delta_lb = Some(plan.params.delta_precision * 4.0 * plan.params.log_term);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);
    r.xi = Some(xi);
    fill(&mut r, oracle, out, est);
    r.stages.push(("search".into(), ledger));
    r.ledger = ledger;
    Ok(r)
}

/// Which unknown-energy pipeline an estimate or preparation uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "kappa")]
pub enum EstimateVariant {
    Grid,
    /// Phase estimation to precision `delta_lb^kappa` first, then the grid
    /// on the returned interval.
    Combined(f64),
}

fn bracket(oracle: &SpectralOracle, trial: &TrialState, cfg: &UnknownEnergyConfig, kappa: f64, rng: &mut Rng, r: &mut RunResult) -> Result<Option<(f64, f64)>> {
    if !(0.0..=1.0).contains(&kappa) {
        return invalid(format!("kappa = {kappa} outside [0, 1]"));
    }
    if !oracle.is_exact() {
        return invalid("the phase-estimation stage needs an exact oracle");
    }
    let mut ledger = ResourceLedger::new();
    let b = pea_bracket(oracle.hamiltonian, &trial.eigen, cfg.chi, cfg.delta_lb.powf(kappa), rng, &mut ledger)?;
    r.kappa = Some(kappa);
    r.ledger += &ledger;
    r.stages.push(("bracket".into(), ledger));
    Ok(b)
}

/// Phase estimation brackets the ground energy to `delta_lb^kappa`; the grid
/// search then runs on that interval only.
pub fn combined_prepare(oracle: &SpectralOracle, trial: &TrialState, cfg: &UnknownEnergyConfig, kappa: f64, seed: u64) -> Result<RunResult> {
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut r = RunResult::new("combined", oracle.hamiltonian, trial.overlap.norm(), seed);
    r.delta_lb = Some(cfg.delta_lb);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);
    let Some((a, b)) = bracket(oracle, trial, cfg, kappa, &mut rng, &mut r)? else {
        return Ok(r);
    };
    let plan = GridPlan::new(cfg.delta_lb, a, b, cfg)?;
    let mut ledger = ResourceLedger::new();
    let (out, est) = plan.run(oracle, trial, cfg, &mut rng, &mut ledger)?;
    fill(&mut r, oracle, out, est);
    r.ledger += &ledger;
    r.stages.push(("search".into(), ledger));
    Ok(r)
}

/// Ground-energy estimate to additive precision `xi`.
pub fn estimate_ground_energy(oracle: &SpectralOracle, trial: &TrialState, xi: f64, variant: EstimateVariant, cfg: &UnknownEnergyConfig, seed: u64) -> Result<RunResult> {
    let kappa = match variant {
        EstimateVariant::Grid => return estimate_ground_energy_grid(oracle, trial, xi, cfg, seed),
        EstimateVariant::Combined(k) => k,
    };
    if !(xi > 0.0 && xi < 0.5) {
        return invalid(format!("xi = {xi} outside (0, 1/2)"));
    }
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut r = RunResult::new("combined-estimate", oracle.hamiltonian, trial.overlap.norm(), seed);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);
    r.xi = Some(xi);
    let Some((a, b)) = bracket(oracle, trial, cfg, kappa, &mut rng, &mut r)? else {
        return Ok(r);
    };
    let plan = GridPlan::for_accuracy(xi, a, b, cfg)?;
    r.delta_lb = Some(plan.params.delta_precision * 4.0 * plan.params.log_term);
    let mut ledger = ResourceLedger::new();
    let (out, est) = plan.run(oracle, trial, cfg, &mut rng, &mut ledger)?;
    fill(&mut r, oracle, out, est);
    r.ledger += &ledger;
    r.stages.push(("search".into(), ledger));
    Ok(r)
}
