use nalgebra::DMatrix;

use super::{BranchTable, EnergyGrid, LabelSearchParams};
use crate::amplify::StatePrep;
use crate::error::{invalid, Result};
use crate::lcu::{FourierCoefficients, FourierParams, LcuCircuit, TrialReflector};
use crate::ledger::ResourceLedger;
use crate::registers::{QState, RegisterLayout};
use crate::spectra::{Hamiltonian, SpectralOracle};
use crate::C64;

/// Grid length for a given `M`: the power of 2 at or above `2 sqrt(M) width`.
pub fn grid_len(params: &FourierParams, width: f64) -> usize {
    ((2.0 * (params.big_m as f64).sqrt() * width).ceil().max(1.0) as usize).next_power_of_two()
}

/// Cost of one call of the label-controlled circuit.
pub fn v_call_cost(params: &FourierParams, label_bits: usize, sys_qubits: usize) -> ResourceLedger {
    let b = params.b();
    ResourceLedger {
        hamsim_time: 2.0 * params.m0 as f64,
        trial_calls: 1,
        walk_steps: 0,
        elementary_gate_proxy: 2 * (1u64 << b) + b as u64 + label_bits as u64,
        qubits_peak: (label_bits + b + sys_qubits) as u32,
    }
}

/// `V = sum_j |j><j| (x) V_j` preceded by Hadamards on the label register and
/// the trial preparation, on registers `(lab, anc, sys)`. The energy
/// dependence enters only through the phases `exp(2i E_j k)`.
pub struct ControlledV {
    layout: RegisterLayout,
    circuit: LcuCircuit,
    grid: EnergyGrid,
    trial: TrialReflector,
    hadamard: DMatrix<C64>,
}

impl ControlledV {
    pub fn new(oracle: &SpectralOracle, trial_eigen: &[C64], params: &FourierParams, grid: &EnergyGrid, cap: usize) -> Result<Self> {
        let circuit = LcuCircuit::new(oracle, params, 0.0)?;
        let n = trial_eigen.len().trailing_zeros() as usize;
        let l = grid.bits();
        let layout = RegisterLayout::with_cap(&[("lab", l), ("anc", circuit.b()), ("sys", n)], cap)?;
        let d = grid.len;
        let s = 1.0 / (d as f64).sqrt();
        let hadamard = DMatrix::from_fn(d, d, |r, c| C64::new(if (r & c).count_ones() % 2 == 0 { s } else { -s }, 0.0));
        Ok(Self { layout, circuit, grid: grid.clone(), trial: TrialReflector::new(trial_eigen), hadamard })
    }

    fn energy_phase(&self, s: &mut QState, conj: bool, ledger: &mut ResourceLedger) -> Result<()> {
        let m0 = self.circuit.params.m0 as i64;
        let sign = if conj { -1.0 } else { 1.0 };
        let g = &self.grid;
        ledger.charge_gates(g.bits() as u64);
        s.apply_diagonal(&["lab", "anc"], |v| {
            let k = v[1] as i64 - m0;
            if k.abs() > m0 {
                return C64::new(1.0, 0.0);
            }
            C64::from_polar(1.0, sign * 2.0 * g.energy(v[0]) * k as f64)
        })
    }
}

impl StatePrep for ControlledV {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }
    fn apply(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        ledger.charge_trial(1);
        ledger.note_qubits(self.layout.total_qubits());
        self.trial.apply(s, "sys")?;
        s.apply_on_register("lab", &self.hadamard)?;
        self.circuit.apply_b(s, "anc", ledger)?;
        self.circuit.apply_u(s, "anc", "sys", false, ledger)?;
        self.energy_phase(s, false, ledger)?;
        self.circuit.apply_b(s, "anc", ledger)
    }
    fn apply_inverse(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        self.circuit.apply_b(s, "anc", ledger)?;
        self.energy_phase(s, true, ledger)?;
        self.circuit.apply_u(s, "anc", "sys", true, ledger)?;
        self.circuit.apply_b(s, "anc", ledger)?;
        s.apply_on_register("lab", &self.hadamard)?;
        ledger.charge_trial(1);
        self.trial.apply_inverse(s, "sys")
    }
}

/// Branches `Phi_j = G_j phi / sqrt(L)` on eigenbasis coordinates, for an
/// exact oracle.
pub fn grid_branch_table(h: &Hamiltonian, trial_eigen: &[C64], params: &FourierParams, coeffs: &FourierCoefficients, grid: &EnergyGrid) -> Result<BranchTable> {
    let n = h.dim;
    let norm = 1.0 / (coeffs.alpha_sum * (grid.len as f64).sqrt());
    let mut v = Vec::with_capacity(grid.len * n);
    for j in 0..grid.len {
        let e = grid.energy(j);
        for (phi, &l) in trial_eigen.iter().zip(&h.eigenvalues) {
            v.push(phi * (coeffs.series(l - e + params.tau) * norm));
        }
    }
    BranchTable::new(grid.bits(), n, v, v_call_cost(params, grid.bits(), h.qubits()))
}

/// Threshold certified by `chi <= |phi_0|`: the last grid point at or below
/// the ground energy has branch norm at least this.
pub fn certified_zeta(chi: f64, params: &FourierParams, coeffs: &FourierCoefficients, grid: &EnergyGrid) -> Result<f64> {
    let h = (params.tau + grid.step).min(std::f64::consts::FRAC_PI_2);
    let z = chi * (coeffs.full(h) - coeffs.dropped) / (coeffs.alpha_sum * (grid.len as f64).sqrt());
    if !(z > 0.0) {
        return invalid("grid step too coarse for a positive threshold");
    }
    Ok(z.min(0.999))
}

/// Width `w` such that every label returned by the search satisfies
/// `lambda_0 - w < E_j <= lambda_0`, from the worst-case decay of the branch
/// norms below the ground energy.
pub fn predicted_width(params: &FourierParams, coeffs: &FourierCoefficients, grid: &EnergyGrid, search: &LabelSearchParams) -> f64 {
    let budget = search.zeta * search.zeta * search.rho;
    let scale = 1.0 / (coeffs.alpha_sum * coeffs.alpha_sum * grid.len as f64);
    let mass = |d: f64| {
        let mut s = 0.0;
        for i in 0..grid.len {
            let h = (params.tau + d + i as f64 * grid.step).min(std::f64::consts::FRAC_PI_2);
            let a = coeffs.full(h) + coeffs.dropped;
            s += a * a;
            if a * a < 1e-30 * s {
                break;
            }
        }
        s * scale
    };
    let (mut lo, mut hi) = (0.0, 1.5);
    if mass(hi) >= budget {
        return f64::INFINITY;
    }
    if mass(lo) < budget {
        return grid.step;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi + grid.step
}
