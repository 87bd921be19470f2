use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{build_walk, ChebCoefficients, SparseOracle, WalkSpace};
use crate::amplify::PreparedBranch;
use crate::error::{invalid, Result};
use crate::label_search::{min_label_find, BranchTable, EnergyGrid, LabelSearchParams, DEFAULT_SEARCH_DELTA};
use crate::lcu::{label_bits, AmpMode, FourierParams};
use crate::ledger::ResourceLedger;
use crate::result::RunResult;
use crate::rng::{stream, STREAM_MEASURE};
use crate::spectra::{Hamiltonian, TrialState};
use crate::C64;

/// Parameters of the `(1 - (H/d)^2)^M` projection, `H = H~ - (E - tau)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebParams {
    pub tau: f64,
    /// Even.
    pub big_m: u64,
    pub m0: u64,
    pub d: usize,
    pub log_term: f64,
}

impl ChebParams {
    /// `M` matches the cosine projection after rescaling by `d`:
    /// `(1 - (h/d)^2)^M ~ exp(-M h^2/d^2)` against `cos^M' h ~ exp(-M' h^2/2)`.
    pub fn choose(delta_lb: f64, chi: f64, eps: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return invalid("sparsity must be positive");
        }
        let f = FourierParams::choose(delta_lb, chi, eps)?;
        let mut big_m = (f.big_m as f64 * (d * d) as f64 / 2.0).ceil() as u64;
        big_m += big_m % 2;
        let m0 = ((2.0 * (big_m as f64 * f.log_term).sqrt()).ceil() as u64).min(big_m);
        Ok(Self { tau: f.tau, big_m, m0, d, log_term: f.log_term })
    }

    pub fn manual(tau: f64, big_m: u64, m0: u64, d: usize) -> Result<Self> {
        if m0 < 1 || m0 > big_m || d == 0 {
            return invalid(format!("need 1 <= m0 <= M and d >= 1, got m0 = {m0}, M = {big_m}, d = {d}"));
        }
        Ok(Self { tau, big_m, m0, d, log_term: 0.0 })
    }

    pub fn coefficients(&self) -> Result<ChebCoefficients> {
        ChebCoefficients::new(self.big_m, self.m0)
    }

    /// Ancilla qubits selecting `k in [0, m0]`.
    pub fn b(&self) -> usize {
        label_bits(self.m0 as usize + 1)
    }
}

/// `H~ - shift` in the computational basis.
pub fn shifted_entries(h: &Hamiltonian, shift: f64) -> DMatrix<C64> {
    let mut m = h.entries.clone();
    for i in 0..h.dim {
        m[(i, i)] -= C64::new(shift, 0.0);
    }
    m
}

/// One call of the walk LCU: `2 m0` walk steps (controlled powers
/// `W^{2k}`), one trial preparation, `b + q` qubits.
pub fn cheb_call_cost(params: &ChebParams, walk_qubits: usize) -> ResourceLedger {
    let b = params.b();
    ResourceLedger {
        hamsim_time: 0.0,
        trial_calls: 1,
        walk_steps: 2 * params.m0,
        elementary_gate_proxy: 2 * b as u64 + 2 * params.m0 * walk_qubits as u64,
        qubits_peak: (b + walk_qubits) as u32,
    }
}

/// Flagged branch `(1/alpha) sum_k alpha_k T_{2k}(H/d) phi` in eigenbasis
/// coordinates, with `H = H~ - shift`.
pub fn cheb_branch(h: &Hamiltonian, trial_eigen: &[C64], shift: f64, d: usize, coeffs: &ChebCoefficients) -> Vec<C64> {
    trial_eigen
        .iter()
        .zip(&h.eigenvalues)
        .map(|(p, &l)| p * (coeffs.series((l - shift) / d as f64) / coeffs.alpha_sum))
        .collect()
}

/// Same branch computed on the walk space: `T^+ (sum_k alpha_k W^{2k}) T phi / alpha`,
/// computational basis in and out.
pub fn cheb_branch_walk(ws: &WalkSpace, phi: &[C64], coeffs: &ChebCoefficients) -> Vec<C64> {
    let mut v = ws.apply_t(phi);
    let mut acc = vec![C64::new(0.0, 0.0); ws.n];
    for (k, a) in coeffs.alpha.iter().enumerate() {
        if k > 0 {
            v = ws.step(&ws.step(&v));
        }
        for (z, y) in acc.iter_mut().zip(ws.apply_t_adjoint(&v)) {
            *z += y * (a / coeffs.alpha_sum);
        }
    }
    acc
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChebConfig {
    pub delta_lb: f64,
    pub chi: f64,
    pub eps: f64,
    /// Trusted lower-side guess of the ground energy.
    pub energy: f64,
    /// Sparsity; the row sparsity of the shifted matrix when absent.
    pub sparsity: Option<usize>,
    pub mode: AmpMode,
    pub amp_delta: f64,
    pub max_rounds: u32,
    /// Compute the branch on the walk space rather than from the spectrum.
    pub literal: bool,
}

impl ChebConfig {
    pub fn new(delta_lb: f64, chi: f64, eps: f64, energy: f64) -> Self {
        Self { delta_lb, chi, eps, energy, sparsity: None, mode: AmpMode::Fps, amp_delta: 0.1, max_rounds: 400, literal: true }
    }
}

fn walk_for(h: &Hamiltonian, shift: f64, sparsity: Option<usize>) -> Result<WalkSpace> {
    build_walk(&SparseOracle::new(shifted_entries(h, shift), sparsity)?)
}

/// Ground-state preparation with the Chebyshev expansion on the walk.
pub fn prepare_ground_cheb(h: &Hamiltonian, trial: &TrialState, cfg: &ChebConfig, seed: u64) -> Result<RunResult> {
    let probe = SparseOracle::new(shifted_entries(h, cfg.energy), cfg.sparsity)?;
    let params = ChebParams::choose(cfg.delta_lb, cfg.chi, cfg.eps, probe.d)?;
    let shift = cfg.energy - params.tau;
    let ws = walk_for(h, shift, Some(probe.d))?;
    let coeffs = params.coefficients()?;
    let branch = if cfg.literal {
        h.to_eigen(&cheb_branch_walk(&ws, &trial.amplitudes, &coeffs))
    } else {
        cheb_branch(h, &trial.eigen, shift, params.d, &coeffs)
    };
    let lambda = branch.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(lambda > 0.0) {
        return invalid("flagged branch vanishes");
    }
    let prepared = PreparedBranch { lambda, state: branch.into_iter().map(|z| z / lambda).collect(), call_cost: cheb_call_cost(&params, ws.qubits()) };
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut ledger = ResourceLedger::new();
    let out = cfg.mode.amplify(&prepared, cfg.amp_delta, cfg.max_rounds, &mut rng, &mut ledger)?;
    let mut r = RunResult::new("chebwalk", h, trial.overlap.norm(), seed);
    r.delta_lb = Some(cfg.delta_lb);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);
    r.pre_amplitude = Some(lambda);
    r.success = out.success;
    if out.success {
        r.set_state(h, h.from_eigen(&out.flagged));
    }
    r.ledger = ledger;
    Ok(r)
}

/// Unknown ground energy: minimum-label search over `E_j = j/L` with the walk
/// projection as branch preparation. Branches are taken from the spectrum.
pub fn prepare_ground_cheb_unknown(h: &Hamiltonian, trial: &TrialState, delta_lb: f64, chi: f64, eps: f64, seed: u64) -> Result<RunResult> {
    let d = SparseOracle::new(h.entries.clone(), None)?.d;
    let params = ChebParams::choose(delta_lb, chi, eps, d)?;
    let coeffs = params.coefficients()?;
    let f = FourierParams::choose(delta_lb, chi, eps)?;
    let len = crate::label_search::grid_len(&f, 1.0);
    let grid = EnergyGrid::over(0.0, 1.0, len)?;
    let x = ((params.tau + grid.step) / d as f64).min(1.0);
    let zeta = chi * (coeffs.full(x) - coeffs.dropped) / (coeffs.alpha_sum * (len as f64).sqrt());
    if !(zeta > 0.0) {
        return invalid("grid step too coarse for a positive threshold");
    }
    let search = LabelSearchParams::new(grid.bits(), zeta.min(0.999), DEFAULT_SEARCH_DELTA)?;
    let s = 1.0 / (len as f64).sqrt();
    let mut v = Vec::with_capacity(len * h.dim);
    for j in 0..len {
        let shift = grid.energy(j) - params.tau;
        v.extend(cheb_branch(h, &trial.eigen, shift, d, &coeffs).into_iter().map(|z| z * s));
    }
    let walk_qubits = 2 * h.qubits() + 2;
    let mut cost = cheb_call_cost(&params, walk_qubits);
    cost.qubits_peak += grid.bits() as u32;
    let mut table = BranchTable::new(grid.bits(), h.dim, v, cost)?;
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut ledger = ResourceLedger::new();
    ledger.note_qubits(cost.qubits_peak as usize);
    let out = min_label_find(&mut table, &search, &mut rng, &mut ledger)?;
    let mut r = RunResult::new("chebwalk-grid", h, trial.overlap.norm(), seed);
    r.delta_lb = Some(delta_lb);
    r.chi = Some(chi);
    r.eps = Some(eps);
    r.success = out.success;
    r.label = out.label;
    r.label_norm = out.branch_norm;
    if let Some(j) = out.label {
        r.set_energy(h, grid.energy(j));
    }
    if let Some(st) = out.state {
        r.set_state(h, h.from_eigen(&st));
    }
    r.stages.push(("search".into(), ledger));
    r.ledger = ledger;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcu::TrialReflector;
    use crate::registers::{MatrixFamily, QState, RegisterLayout};
    use crate::spectra::{build_hamiltonian, make_trial_state, Model, ModelSpec};

    fn instance(dim: usize, seed: u64) -> Hamiltonian {
        build_hamiltonian(&ModelSpec::new(Model::RandomHermitian { dim, gap: 0.1, ground: None }, seed).walk()).unwrap()
    }

    fn dense_series(x: &DMatrix<C64>, c: &ChebCoefficients) -> DMatrix<C64> {
        let n = x.nrows();
        let y = x * x * C64::new(2.0, 0.0) - DMatrix::<C64>::identity(n, n);
        let (mut prev, mut cur) = (DMatrix::<C64>::identity(n, n), y.clone());
        let mut acc = &prev * C64::new(c.alpha[0], 0.0);
        for a in &c.alpha[1..] {
            acc += &cur * C64::new(*a, 0.0);
            let next = &y * &cur * C64::new(2.0, 0.0) - &prev;
            prev = std::mem::replace(&mut cur, next);
        }
        acc
    }

    #[test]
    fn walk_branch_matches_dense_function() {
        let h = instance(8, 2);
        let trial = make_trial_state(&h, 0.5, 2).unwrap();
        let shift = h.ground_energy() - 0.02;
        let ws = walk_for(&h, shift, None).unwrap();
        let c = ChebCoefficients::new(400, 120).unwrap();
        let got = cheb_branch_walk(&ws, &trial.amplitudes, &c);
        let dense = dense_series(&ws.h_over_d, &c) / C64::new(c.alpha_sum, 0.0);
        let want = &dense * nalgebra::DVector::from_column_slice(&trial.amplitudes);
        let spec = h.from_eigen(&cheb_branch(&h, &trial.eigen, shift, ws.d, &c));
        for i in 0..8 {
            assert!((got[i] - want[i]).norm() < 1e-9);
            assert!((spec[i] - want[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn signs_carried_by_the_prepare_unprepare_pair() {
        // tiny explicit LCU: anc selects W^{2k}, right prepare carries the signs
        let h = instance(2, 5);
        let ws = walk_for(&h, h.ground_energy() - 0.01, None).unwrap();
        let c = ChebCoefficients::new(2, 2).unwrap();
        let w = ws.w_matrix().unwrap();
        let w2 = &w * &w;
        let mut mats = vec![DMatrix::<C64>::identity(ws.dim(), ws.dim())];
        for _ in 1..4 {
            let next = mats.last().unwrap() * &w2;
            mats.push(next);
        }
        let fam = MatrixFamily::new(mats).unwrap();
        let mut right: Vec<C64> = c.alpha.iter().map(|a| C64::new(a.signum() * (a.abs() / c.alpha_sum).sqrt(), 0.0)).collect();
        let mut left: Vec<C64> = c.alpha.iter().map(|a| C64::new((a.abs() / c.alpha_sum).sqrt(), 0.0)).collect();
        right.push(C64::new(0.0, 0.0));
        left.push(C64::new(0.0, 0.0));
        let layout = RegisterLayout::new(&[("anc", 2), ("walk", ws.qubits())]).unwrap();
        let trial = make_trial_state(&h, 0.6, 1).unwrap();
        let mut s = QState::product(layout, &[vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], ws.apply_t(&trial.amplitudes)]).unwrap();
        TrialReflector::new(&right).apply(&mut s, "anc").unwrap();
        s.apply_label_controlled("anc", "walk", &fam, &mut ResourceLedger::new()).unwrap();
        TrialReflector::new(&left).apply_inverse(&mut s, "anc").unwrap();
        let (b, _) = s.flagged_branch(&[("anc", 0)]).unwrap();
        let got = ws.apply_t_adjoint(b.amplitudes());
        let want = cheb_branch_walk(&ws, &trial.amplitudes, &c);
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn exact_ground_trial() {
        let h = instance(8, 1);
        let trial = make_trial_state(&h, 1.0, 1).unwrap();
        let cfg = ChebConfig::new(0.1, 1.0, 1e-2, h.ground_energy());
        let r = prepare_ground_cheb(&h, &trial, &cfg, 0).unwrap();
        assert!(r.success && r.fidelity >= 1.0 - 1e-2);
    }

    #[test]
    fn dense_as_sparse_instance() {
        let h = instance(8, 4);
        let cfg = ChebConfig::new(0.1, 0.5, 1e-2, h.ground_energy());
        for seed in 0..5 {
            let trial = make_trial_state(&h, 0.5, seed).unwrap();
            let r = prepare_ground_cheb(&h, &trial, &cfg, seed).unwrap();
            assert!(r.success && r.fidelity >= 0.9, "{}", r.fidelity);
            assert!(r.ledger.walk_steps > 0 && r.ledger.hamsim_time == 0.0);
        }
        let lit = prepare_ground_cheb(&h, &make_trial_state(&h, 0.5, 0).unwrap(), &cfg, 0).unwrap();
        let mut spec = cfg.clone();
        spec.literal = false;
        let red = prepare_ground_cheb(&h, &make_trial_state(&h, 0.5, 0).unwrap(), &spec, 0).unwrap();
        assert!((lit.pre_amplitude.unwrap() - red.pre_amplitude.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn truncation_grows_linearly_in_sparsity() {
        let a = ChebParams::choose(0.1, 0.5, 1e-2, 4).unwrap();
        let b = ChebParams::choose(0.1, 0.5, 1e-2, 8).unwrap();
        let r = b.m0 as f64 / a.m0 as f64;
        assert!((r - 2.0).abs() < 0.01, "{r}");
        assert_eq!(a.big_m % 2, 0);
    }

    #[test]
    fn unknown_energy_grid() {
        let h = instance(8, 6);
        let mut ok = 0;
        for seed in 0..10 {
            let trial = make_trial_state(&h, 0.6, seed).unwrap();
            let r = prepare_ground_cheb_unknown(&h, &trial, 0.1, 0.5, 1e-2, seed).unwrap();
            if r.success && r.fidelity > 0.9 && r.energy_estimate.unwrap() <= h.ground_energy() + 1e-12 {
                ok += 1;
            }
        }
        assert!(ok >= 9, "{ok}");
    }
}
