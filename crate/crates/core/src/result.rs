use serde::{Deserialize, Serialize};

use crate::ledger::ResourceLedger;
use crate::spectra::Hamiltonian;
use crate::C64;

/// Outcome of one algorithm run, with the context needed to flatten it into a
/// report row.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunResult {
    pub method: String,
    pub success: bool,
    /// `||P out||^2` against the ground-space projector; 0 when no state.
    pub fidelity: f64,
    pub energy_estimate: Option<f64>,
    pub energy_error: Option<f64>,
    pub ledger: ResourceLedger,
    /// Ledgers of the individual stages of multi-stage pipelines.
    pub stages: Vec<(String, ResourceLedger)>,
    pub seed: u64,
    pub wall_ms: f64,
    pub dim: usize,
    pub delta_true: f64,
    pub delta_lb: Option<f64>,
    pub chi: Option<f64>,
    pub phi0: f64,
    pub eps: Option<f64>,
    pub xi: Option<f64>,
    pub kappa: Option<f64>,
    /// Label returned by a minimum-label search, and its branch norm.
    pub label: Option<usize>,
    pub label_norm: Option<f64>,
    /// Flagged-branch norm before amplification.
    pub pre_amplitude: Option<f64>,
    #[serde(skip)]
    pub state: Option<Vec<C64>>,
}

impl RunResult {
    pub fn new(method: &str, h: &Hamiltonian, phi0: f64, seed: u64) -> Self {
        Self {
            method: method.into(),
            seed,
            dim: h.dim,
            delta_true: h.gap,
            phi0,
            ..Default::default()
        }
    }

    /// Records the output system state (computational basis) and its fidelity.
    pub fn set_state(&mut self, h: &Hamiltonian, state: Vec<C64>) {
        self.fidelity = h.projector_fidelity(&state).clamp(0.0, 1.0);
        self.state = Some(state);
    }

    pub fn set_energy(&mut self, h: &Hamiltonian, e: f64) {
        self.energy_estimate = Some(e);
        self.energy_error = Some((e - h.ground_energy()).abs());
    }

    pub fn stage(&self, name: &str) -> Option<&ResourceLedger> {
        self.stages.iter().find(|(n, _)| n == name).map(|(_, l)| l)
    }
}
