use serde::{Deserialize, Serialize};

use super::{FourierParams, LcuCircuit, LcuPrep};
use crate::amplify::{amplitude_amplify_unknown, overlap_doubling_fps, AmplifyOutcome, Engine, PreparedBranch, DEFAULT_LAMBDA_FLOOR};
use crate::error::Result;
use crate::ledger::ResourceLedger;
use crate::registers::DEFAULT_QUBIT_CAP;
use crate::result::RunResult;
use crate::rng::{stream, Rng, STREAM_MEASURE};
use crate::spectra::{SpectralOracle, TrialState};

/// Amplification scheme for the flagged branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmpMode {
    /// Fixed-point search with overlap doubling.
    Fps,
    /// Randomized Grover counts.
    Aa,
}

impl AmpMode {
    /// Amplifies `branch`, charging `ledger`.
    pub fn amplify(self, branch: &PreparedBranch, delta: f64, max_rounds: u32, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<AmplifyOutcome> {
        let engine = Engine::Reduced(branch);
        match self {
            AmpMode::Fps => overlap_doubling_fps(&engine, delta, DEFAULT_LAMBDA_FLOOR, rng, ledger),
            AmpMode::Aa => amplitude_amplify_unknown(&engine, rng, max_rounds, ledger),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnownEnergyConfig {
    pub delta_lb: f64,
    pub chi: f64,
    pub eps: f64,
    /// Energy guess, trusted to satisfy `E <= lambda_0`.
    pub energy: f64,
    pub mode: AmpMode,
    /// Fixed-point search error parameter.
    pub amp_delta: f64,
    pub max_rounds: u32,
    pub qubit_cap: usize,
}

impl KnownEnergyConfig {
    pub fn new(delta_lb: f64, chi: f64, eps: f64, energy: f64) -> Self {
        Self { delta_lb, chi, eps, energy, mode: AmpMode::Fps, amp_delta: 0.1, max_rounds: 400, qubit_cap: DEFAULT_QUBIT_CAP }
    }
}

pub fn prepare_ground_known_energy(oracle: &SpectralOracle, trial: &TrialState, cfg: &KnownEnergyConfig, seed: u64) -> Result<RunResult> {
    let h = oracle.hamiltonian;
    let params = FourierParams::choose(cfg.delta_lb, cfg.chi, cfg.eps)?;
    let circuit = LcuCircuit::new(oracle, &params, cfg.energy)?;
    let prep = LcuPrep::new(&circuit, &trial.eigen, cfg.qubit_cap)?;
    let branch = PreparedBranch::from_prep(&prep, &["anc"])?;
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut ledger = ResourceLedger::new();
    let out = cfg.mode.amplify(&branch, cfg.amp_delta, cfg.max_rounds, &mut rng, &mut ledger)?;

    let mut r = RunResult::new("lcu-fourier", h, trial.overlap.norm(), seed);
    r.delta_lb = Some(cfg.delta_lb);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);
    r.pre_amplitude = Some(branch.lambda);
    r.success = out.success;
    if out.success {
        r.set_state(h, h.from_eigen(&out.flagged));
    }
    r.ledger = ledger;
    Ok(r)
}
