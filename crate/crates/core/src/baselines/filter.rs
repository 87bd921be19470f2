use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::pea::{dirichlet, pea_bracket};
use super::transforms::{fwht, fwht_register, qft_basis};
use crate::amplify::{PreparedBranch, StatePrep};
use crate::error::{invalid, Error, Result};
use crate::label_search::{min_label_find, BranchTable, LabelSearchOutcome, LabelSearchParams, DEFAULT_SEARCH_DELTA};
use crate::lcu::{AmpMode, TrialReflector};
use crate::ledger::ResourceLedger;
use crate::registers::{DiagonalPhaseFamily, QState, RegisterLayout};
use crate::result::RunResult;
use crate::rng::{stream, Rng, STREAM_MEASURE};
use crate::spectra::{Hamiltonian, SpectralOracle, TrialState, NORMALIZATION_MARGIN};
use crate::C64;

/// Default limit on the algorithmic qubit count `log N + eta k`. The copies
/// are never materialized, so this is a budget, not a simulator limit.
pub const DEFAULT_FILTER_QUBIT_BUDGET: usize = 64;

/// How `|mu>` is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentumMode {
    /// Amplitudes written down directly.
    Direct,
    /// Fourier transform of `|2^(k+l) mu>` on `k+l` qubits, Hadamards on the
    /// top `l`, which are then dropped.
    Recipe { l: u32 },
}

/// `2^{-k/2} sum_x exp(2 pi i mu x)|x>` on `k` qubits.
pub fn filter_momentum_state(mu: f64, k: u32, mode: MomentumMode) -> Result<Vec<C64>> {
    let kk = 1usize << k;
    match mode {
        MomentumMode::Direct => {
            let s = 1.0 / (kk as f64).sqrt();
            Ok((0..kk).map(|x| C64::from_polar(s, 2.0 * PI * mu * x as f64)).collect())
        }
        MomentumMode::Recipe { l } => {
            let bits = (k + l) as usize;
            let y = mu * (bits as f64).exp2();
            if (y - y.round()).abs() > 1e-9 || y.round() < 0.0 || y.round() >= (bits as f64).exp2() {
                return invalid(format!("mu = {mu} is not a multiple of 2^-{bits} in [0, 1)"));
            }
            let v = qft_basis(y.round() as usize, bits);
            // x = x_low + 2^k x_high; Hadamards act on x_high
            let hi = 1usize << l;
            let mut m = vec![C64::new(0.0, 0.0); v.len()];
            for low in 0..kk {
                let mut f: Vec<C64> = (0..hi).map(|h| v[low + kk * h]).collect();
                fwht(&mut f);
                for h in 0..hi {
                    m[low + kk * h] = f[h];
                }
            }
            // the state is a product, so any nonzero slice of the top qubits
            // is the reduced state
            let best = (0..hi)
                .max_by(|&a, &b| {
                    let na: f64 = (0..kk).map(|x| m[x + kk * a].norm_sqr()).sum();
                    let nb: f64 = (0..kk).map(|x| m[x + kk * b].norm_sqr()).sum();
                    na.total_cmp(&nb)
                })
                .unwrap_or(0);
            let mut out: Vec<C64> = (0..kk).map(|x| m[x + kk * best]).collect();
            let nrm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let ph = out[0].conj() / out[0].norm();
            out.iter_mut().for_each(|z| *z *= ph / nrm);
            Ok(out)
        }
    }
}

/// `<phi_i|mu> = 2^{-k} sum_x exp(2 pi i (mu - lambda_i) x)`.
pub fn filter_overlap(mu: f64, lambda: f64, k: u32) -> C64 {
    dirichlet(mu - lambda, k)
}

/// Flagged branch `sum_i phi_i <phi_i|mu>^eta |lambda_i>` in eigenbasis
/// coordinates.
pub fn filter_branch(h: &Hamiltonian, trial_eigen: &[C64], mu: f64, k: u32, eta: u32) -> Vec<C64> {
    trial_eigen.iter().zip(&h.eigenvalues).map(|(p, &l)| p * filter_overlap(mu, l, k).powu(eta)).collect()
}

/// One run of the `eta`-copy filter: each copy prepares `|mu>` on `k + l`
/// qubits and undoes phase estimation without the Fourier transform.
pub fn filter_call_cost(k: u32, l: u32, eta: u32, sys_qubits: usize) -> ResourceLedger {
    let (k64, e) = (k as u64, eta as u64);
    ResourceLedger {
        hamsim_time: eta as f64 * 2.0 * PI * ((k as f64).exp2() - 1.0),
        trial_calls: 1,
        walk_steps: 0,
        elementary_gate_proxy: e * (2 * k64 + (k64 + l as u64).pow(2)),
        qubits_peak: (sys_qubits + (eta * k) as usize) as u32,
    }
}

/// Filter parameters for a known reference energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub k: u32,
    pub eta: u32,
    /// `ceil(log2(2 pi sqrt(eta)))`: extra digits to which `mu` is fixed.
    pub l: u32,
}

impl FilterConfig {
    pub fn new(k: u32, eta: u32) -> Self {
        Self { k, eta, l: (2.0 * PI * (eta as f64).sqrt()).log2().ceil() as u32 }
    }

    /// `k = ceil(log2(1/Delta)) + ceil(log2 L)`, `eta = ceil(L / ln L)` with
    /// `L = ln(1/(chi eps))`.
    pub fn choose(delta_lb: f64, chi: f64, eps: f64) -> Result<Self> {
        if !(delta_lb > 0.0 && delta_lb < 1.0 && chi > 0.0 && chi <= 1.0 && eps > 0.0 && eps < 1.0) {
            return invalid("filter parameters need Delta, eps in (0,1) and chi in (0,1]");
        }
        let lg = (1.0 / (chi * eps)).ln().max(1.0);
        let k = (1.0 / delta_lb).log2().ceil() as u32 + lg.log2().ceil() as u32;
        let eta = (lg / lg.ln().max(1.0)).ceil().max(1.0) as u32;
        Ok(Self::new(k.max(1), eta))
    }

    /// Width of the window around the ground energy in which `mu` keeps the
    /// ground overlap power at or above 1/2.
    pub fn mu_tolerance(&self) -> f64 {
        1.0 / ((self.k + 1) as f64).exp2() / (PI * (self.eta as f64).sqrt())
    }

    /// `mu` rounded to `k + l` binary digits.
    pub fn round_mu(&self, mu: f64) -> f64 {
        let s = ((self.k + self.l) as f64).exp2();
        (mu * s).round().rem_euclid(s) / s
    }

    pub fn qubits(&self, sys_qubits: usize) -> usize {
        sys_qubits + (self.eta * self.k) as usize
    }
}

/// Materialized filter on registers `(c0, .., c{eta-1}, sys)`, for checking
/// the lazy branch on small cases.
pub struct FilterPrep {
    layout: RegisterLayout,
    copies: Vec<String>,
    trial: TrialReflector,
    momentum: TrialReflector,
    fwd: DiagonalPhaseFamily,
    inv: DiagonalPhaseFamily,
    gates: u64,
}

impl FilterPrep {
    pub fn new(oracle: &SpectralOracle, trial_eigen: &[C64], mu: f64, cfg: &FilterConfig, cap: usize) -> Result<Self> {
        if !oracle.is_exact() {
            return invalid("the filter is simulated with the exact oracle only");
        }
        let h = oracle.hamiltonian;
        let copies: Vec<String> = (0..cfg.eta).map(|i| format!("c{i}")).collect();
        let mut regs: Vec<(&str, usize)> = copies.iter().map(|c| (c.as_str(), cfg.k as usize)).collect();
        regs.push(("sys", h.qubits()));
        let layout = RegisterLayout::with_cap(&regs, cap)?;
        let kk = 1usize << cfg.k;
        let mut table = Vec::with_capacity(kk * h.dim);
        for x in 0..kk {
            for &l in &h.eigenvalues {
                table.push(C64::from_polar(1.0, -2.0 * PI * l * x as f64));
            }
        }
        let time = 2.0 * PI * (kk as f64 - 1.0);
        let fwd = DiagonalPhaseFamily { table: table.clone(), dim: h.dim, time_charge: time, gate_charge: cfg.k as u64 };
        let inv = DiagonalPhaseFamily { table: table.iter().map(|z| z.conj()).collect(), dim: h.dim, time_charge: time, gate_charge: cfg.k as u64 };
        let momentum = TrialReflector::new(&filter_momentum_state(mu, cfg.k, MomentumMode::Direct)?);
        let gates = (cfg.k + (cfg.k + cfg.l).pow(2)) as u64;
        Ok(Self { layout, copies, trial: TrialReflector::new(trial_eigen), momentum, fwd, inv, gates })
    }
}

impl StatePrep for FilterPrep {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }
    fn apply(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        ledger.charge_trial(1);
        ledger.note_qubits(self.layout.total_qubits());
        self.trial.apply(s, "sys")?;
        for c in &self.copies {
            ledger.charge_gates(self.gates);
            self.momentum.apply(s, c)?;
            // A^dagger: inverse controlled powers, then Hadamards
            s.apply_label_controlled(c, "sys", &self.fwd, ledger)?;
            fwht_register(s, c)?;
        }
        Ok(())
    }
    fn apply_inverse(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        for c in self.copies.iter().rev() {
            ledger.charge_gates(self.gates);
            fwht_register(s, c)?;
            s.apply_label_controlled(c, "sys", &self.inv, ledger)?;
            self.momentum.apply_inverse(s, c)?;
        }
        ledger.charge_trial(1);
        self.trial.apply_inverse(s, "sys")
    }
}

/// Label search over reference energies `mu_j` on the lattice of spacing
/// `2^-k1`, each branch filtered by `eta` copies on `k` qubits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilterGridPlan {
    pub k: u32,
    pub eta: u32,
    pub l: u32,
    pub k1: u32,
    /// First lattice index of the window.
    pub j0: u64,
    pub len: usize,
    pub search: LabelSearchParams,
    /// Returned `mu_j` lie in `[lambda_0 - xi, lambda_0 + 2^-(k1+1)]`.
    pub xi: f64,
}

impl FilterGridPlan {
    /// Smallest `k` whose certified prefix mass below `lambda_0 - xi` fits the
    /// search slack; `interval` restricts the grid.
    pub fn new(xi: f64, chi: f64, interval: Option<(f64, f64)>, search_delta: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 0.5) {
            return invalid(format!("xi = {xi} outside (0, 1/2)"));
        }
        let start = ((1.0 / xi).log2().floor() as u32).saturating_sub(3).max(1);
        for k in start..=40 {
            let mut eta = 2u32;
            for _ in 0..4 {
                let l = (2.0 * PI * (eta as f64).sqrt()).log2().ceil() as u32;
                let k1 = k + l;
                let step = (-(k1 as f64)).exp2();
                let (j0, len) = match interval {
                    None => (0u64, 1usize << k1),
                    Some((a, b)) => {
                        let j0 = (a / step).floor().max(0.0) as u64;
                        let j1 = ((b / step).ceil() as u64).max(j0 + 1);
                        (j0, ((j1 - j0) as usize).next_power_of_two())
                    }
                };
                let n = len.trailing_zeros() as usize;
                let zeta = chi / (2.0 * (len as f64).sqrt());
                let search = LabelSearchParams::new(n, zeta, search_delta)?;
                let x = (4.0 / (chi * chi * search.rho)).ln();
                let want = ((x / x.ln()).ceil() as u32).max(2);
                if want != eta {
                    eta = want;
                    continue;
                }
                let plan = Self { k, eta, l, k1, j0, len, search, xi };
                if step / 2.0 <= xi && plan.certified_mass() <= zeta * zeta * plan.search.rho {
                    return Ok(plan);
                }
                break;
            }
        }
        invalid(format!("no filter grid reaches precision {xi}"))
    }

    pub fn step(&self) -> f64 {
        (-(self.k1 as f64)).exp2()
    }

    pub fn mu(&self, j: usize) -> f64 {
        (self.j0 + j as u64) as f64 * self.step()
    }

    /// Worst-case branch mass at `mu_j <= lambda_0 - xi`.
    pub fn certified_mass(&self) -> f64 {
        let kk = (self.k as f64).exp2();
        let step = self.step();
        let mut total = 0.0;
        for i in 0..=self.len {
            let d = self.xi + i as f64 * step;
            if d >= 1.0 {
                break;
            }
            let dist = d.min(1.0 - d).max(NORMALIZATION_MARGIN.min(d));
            let t = (1.0 / (2.0 * kk * dist)).min(1.0).powi(2 * self.eta as i32);
            total += t;
            if t < 1e-18 * total {
                break;
            }
        }
        total / self.len as f64
    }

    pub fn call_cost(&self, sys_qubits: usize) -> ResourceLedger {
        let mut c = filter_call_cost(self.k, self.l, self.eta, sys_qubits);
        let n = self.len.trailing_zeros();
        c.elementary_gate_proxy += n as u64;
        c.qubits_peak += n;
        c
    }

    pub fn branch_table(&self, h: &Hamiltonian, trial_eigen: &[C64]) -> Result<BranchTable> {
        let s = 1.0 / (self.len as f64).sqrt();
        let mut v = Vec::with_capacity(self.len * h.dim);
        for j in 0..self.len {
            v.extend(filter_branch(h, trial_eigen, self.mu(j), self.k, self.eta).into_iter().map(|z| z * s));
        }
        BranchTable::new(self.len.trailing_zeros() as usize, h.dim, v, self.call_cost(h.qubits()))
    }

    pub fn run(&self, h: &Hamiltonian, trial_eigen: &[C64], rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<(LabelSearchOutcome, Option<f64>)> {
        let mut table = self.branch_table(h, trial_eigen)?;
        ledger.note_qubits(table.call_cost().qubits_peak as usize);
        let out = min_label_find(&mut table, &self.search, rng, ledger)?;
        let mu = out.label.map(|j| self.mu(j));
        Ok((out, mu))
    }
}

/// How the reference energy is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum FilterMode {
    Known(f64),
    /// Grid search over the whole unit interval first.
    Unknown,
    /// Phase estimation at precision `Delta^kappa`, then the grid search on
    /// the resulting interval.
    Combined(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilterPrepareConfig {
    pub delta_lb: f64,
    pub chi: f64,
    pub eps: f64,
    /// Overrides the chosen filter.
    pub filter: Option<FilterConfig>,
    pub mode: AmpMode,
    pub amp_delta: f64,
    pub max_rounds: u32,
    pub qubit_budget: usize,
}

impl FilterPrepareConfig {
    pub fn new(delta_lb: f64, chi: f64, eps: f64) -> Self {
        Self { delta_lb, chi, eps, filter: None, mode: AmpMode::Fps, amp_delta: 0.1, max_rounds: 400, qubit_budget: DEFAULT_FILTER_QUBIT_BUDGET }
    }

    pub fn filter(&self) -> Result<FilterConfig> {
        match self.filter {
            Some(f) => Ok(f),
            None => FilterConfig::choose(self.delta_lb, self.chi, self.eps),
        }
    }
}

fn push_stage(r: &mut RunResult, name: &str, ledger: ResourceLedger) {
    r.ledger += &ledger;
    r.stages.push((name.into(), ledger));
}

/// Filtering-method ground-state preparation.
pub fn filtering_prepare(oracle: &SpectralOracle, trial: &TrialState, mode: FilterMode, cfg: &FilterPrepareConfig, seed: u64) -> Result<RunResult> {
    let h = oracle.hamiltonian;
    if !oracle.is_exact() {
        return invalid("the filter is simulated with the exact oracle only");
    }
    let f = cfg.filter()?;
    let needed = f.qubits(h.qubits());
    if needed > cfg.qubit_budget {
        return Err(Error::CapacityExceeded { needed, cap: cfg.qubit_budget });
    }
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut r = RunResult::new("filter", h, trial.overlap.norm(), seed);
    r.delta_lb = Some(cfg.delta_lb);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);

    let interval = match mode {
        FilterMode::Known(_) | FilterMode::Unknown => None,
        FilterMode::Combined(kappa) => {
            r.kappa = Some(kappa);
            let mut ledger = ResourceLedger::new();
            let b = pea_bracket(h, &trial.eigen, cfg.chi, cfg.delta_lb.powf(kappa), &mut rng, &mut ledger)?;
            push_stage(&mut r, "bracket", ledger);
            match b {
                Some(b) => Some(b),
                None => return Ok(r),
            }
        }
    };
    let mu = match mode {
        FilterMode::Known(mu) => mu,
        _ => {
            let plan = FilterGridPlan::new(f.mu_tolerance() / 2.0, cfg.chi, interval, DEFAULT_SEARCH_DELTA)?;
            let mut ledger = ResourceLedger::new();
            let (out, mu) = plan.run(h, &trial.eigen, &mut rng, &mut ledger)?;
            push_stage(&mut r, "search", ledger);
            r.label = out.label;
            r.label_norm = out.branch_norm;
            match mu {
                Some(mu) if out.success => mu,
                _ => return Ok(r),
            }
        }
    };
    let mu = f.round_mu(mu);
    let b = filter_branch(h, &trial.eigen, mu, f.k, f.eta);
    let lambda = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(lambda > 0.0) {
        return invalid("filtered branch vanishes");
    }
    let branch = PreparedBranch { lambda, state: b.into_iter().map(|z| z / lambda).collect(), call_cost: filter_call_cost(f.k, f.l, f.eta, h.qubits()) };
    let mut ledger = ResourceLedger::new();
    ledger.note_qubits(needed);
    let out = cfg.mode.amplify(&branch, cfg.amp_delta, cfg.max_rounds, &mut rng, &mut ledger)?;
    push_stage(&mut r, "prepare", ledger);
    r.pre_amplitude = Some(lambda);
    r.success = out.success;
    if out.success {
        r.set_energy(h, mu);
        r.set_state(h, h.from_eigen(&out.flagged));
    }
    Ok(r)
}

/// Ground-energy estimate to precision `xi` by the filtered grid search.
pub fn filtering_estimate(oracle: &SpectralOracle, trial: &TrialState, chi: f64, xi: f64, seed: u64) -> Result<RunResult> {
    let h = oracle.hamiltonian;
    if !oracle.is_exact() {
        return invalid("the filter is simulated with the exact oracle only");
    }
    let plan = FilterGridPlan::new(xi, chi, None, DEFAULT_SEARCH_DELTA)?;
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut ledger = ResourceLedger::new();
    let (out, mu) = plan.run(h, &trial.eigen, &mut rng, &mut ledger)?;
    let mut r = RunResult::new("filter-estimate", h, trial.overlap.norm(), seed);
    r.chi = Some(chi);
    r.xi = Some(xi);
    r.success = out.success;
    r.label = out.label;
    r.label_norm = out.branch_norm;
    if let Some(mu) = mu {
        r.set_energy(h, mu);
    }
    push_stage(&mut r, "search", ledger);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::DEFAULT_QUBIT_CAP;
    use crate::spectra::{build_hamiltonian, make_trial_state, Model, ModelSpec};

    fn instance(dim: usize, gap: f64, seed: u64) -> Hamiltonian {
        build_hamiltonian(&ModelSpec::new(Model::RandomHermitian { dim, gap, ground: None }, seed)).unwrap()
    }

    #[test]
    fn momentum_state_modes_agree() {
        assert!(filter_momentum_state(0.0, 3, MomentumMode::Direct).unwrap().iter().all(|z| (z - C64::new(8f64.powf(-0.5), 0.0)).norm() < 1e-15));
        for (mu, k, l) in [(0.3125, 4u32, 3u32), (5.0 / 64.0, 3, 3), (0.75, 5, 2)] {
            let a = filter_momentum_state(mu, k, MomentumMode::Direct).unwrap();
            let b = filter_momentum_state(mu, k, MomentumMode::Recipe { l }).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-10);
            }
        }
        assert!(filter_momentum_state(0.3, 4, MomentumMode::Recipe { l: 2 }).is_err());
    }

    #[test]
    fn overlap_bounds() {
        let k = 6;
        for i in 0..200 {
            let l = 0.2 + 0.003 * i as f64;
            let mu = 0.41;
            let o = filter_overlap(mu, l, k).norm();
            if (l - mu).abs() > 1e-12 && (l - mu).abs() < 0.5 {
                assert!(o <= 1.0 / (2.0 * 64.0 * (l - mu).abs()) + 1e-12);
            }
        }
        for eta in [1u32, 4, 9] {
            let cfg = FilterConfig::new(5, eta);
            let off = cfg.mu_tolerance() * 0.999;
            assert!(filter_overlap(0.3 + off, 0.3, 5).norm().powi(eta as i32) >= 0.5);
        }
    }

    #[test]
    fn materialized_copies_match_overlap_powers() {
        let h = instance(4, 0.2, 2);
        let oracle = SpectralOracle::new(&h);
        let trial = make_trial_state(&h, 0.6, 2).unwrap();
        for (k, eta) in [(3u32, 1u32), (4, 2), (2, 2)] {
            let cfg = FilterConfig::new(k, eta);
            let mu = h.eigenvalues[0] + 0.01;
            let prep = FilterPrep::new(&oracle, &trial.eigen, mu, &cfg, DEFAULT_QUBIT_CAP).unwrap();
            let mut s = QState::zero(prep.layout().clone());
            let mut ledger = ResourceLedger::new();
            prep.apply(&mut s, &mut ledger).unwrap();
            let flags: Vec<(String, usize)> = (0..eta).map(|i| (format!("c{i}"), 0)).collect();
            let fl: Vec<(&str, usize)> = flags.iter().map(|(a, b)| (a.as_str(), *b)).collect();
            let (b, _) = s.flagged_branch(&fl).unwrap();
            let want = filter_branch(&h, &trial.eigen, mu, k, eta);
            for (x, y) in b.amplitudes().iter().zip(&want) {
                assert!((x - y).norm() < 1e-10);
            }
            assert!((ledger.hamsim_time - filter_call_cost(k, cfg.l, eta, 2).hamsim_time).abs() < 1e-9);
            prep.apply_inverse(&mut s, &mut ledger).unwrap();
            assert!((s.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn one_more_copy_multiplies_weights() {
        let h = instance(8, 0.1, 1);
        let trial = make_trial_state(&h, 0.5, 1).unwrap();
        let mu = 0.37;
        let a = filter_branch(&h, &trial.eigen, mu, 5, 3);
        let b = filter_branch(&h, &trial.eigen, mu, 5, 4);
        for ((x, y), &l) in a.iter().zip(&b).zip(&h.eigenvalues) {
            assert!((y.norm_sqr() - x.norm_sqr() * filter_overlap(mu, l, 5).norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn known_reference_energy() {
        let h = instance(16, 0.1, 4);
        let oracle = SpectralOracle::new(&h);
        let eps = 1e-2;
        let cfg = FilterPrepareConfig::new(0.1, 0.5, eps);
        for seed in 0..10 {
            let trial = make_trial_state(&h, 0.5, seed).unwrap();
            let r = filtering_prepare(&oracle, &trial, FilterMode::Known(h.ground_energy()), &cfg, seed).unwrap();
            assert!(r.success && r.fidelity >= 1.0 - 10.0 * eps);
            assert!(r.ledger.qubits_peak as usize > 4 + 2 * cfg.filter().unwrap().k as usize);
        }
        let mut tight = cfg.clone();
        tight.qubit_budget = 10;
        let trial = make_trial_state(&h, 0.5, 0).unwrap();
        assert!(matches!(filtering_prepare(&oracle, &trial, FilterMode::Known(0.1), &tight, 0), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn grid_plan_ground_label_clears_threshold() {
        let plan = FilterGridPlan::new(0.02, 0.5, None, 0.04).unwrap();
        let step = plan.step();
        for i in 0..50 {
            let l0 = 0.1 + 0.0137 * i as f64;
            let j = (l0 / step).round();
            let o = filter_overlap(j * step, l0, plan.k).norm().powi(plan.eta as i32);
            assert!(o >= 0.5, "{l0}");
        }
    }

    #[test]
    fn unknown_and_estimate() {
        let h = instance(16, 0.1, 6);
        let oracle = SpectralOracle::new(&h);
        let cfg = FilterPrepareConfig::new(0.1, 0.5, 1e-2);
        let mut good = 0;
        let xi = 0.025;
        for seed in 0..10 {
            let trial = make_trial_state(&h, 0.5, seed).unwrap();
            let r = filtering_prepare(&oracle, &trial, FilterMode::Unknown, &cfg, seed).unwrap();
            assert!(r.success && r.fidelity >= 0.9);
            let e = filtering_estimate(&oracle, &trial, 0.5, xi, seed).unwrap();
            if e.success && e.energy_error.unwrap() <= xi {
                good += 1;
            }
        }
        assert!(good >= 9);
        let trial = make_trial_state(&h, 0.5, 0).unwrap();
        let c = filtering_prepare(&oracle, &trial, FilterMode::Combined(1.0), &cfg, 0).unwrap();
        assert!(c.stage("bracket").is_some());
    }
}
