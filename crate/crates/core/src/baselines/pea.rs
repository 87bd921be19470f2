use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::transforms::{fwht_register, qft_register};
use crate::amplify::{reduced_amplitude, FpsSchedule, PreparedBranch, StatePrep};
use crate::error::{invalid, Result};
use crate::label_search::{min_label_find, BranchSearch, BranchTable, LabelSearchOutcome, LabelSearchParams, DEFAULT_SEARCH_DELTA};
use crate::lcu::{AmpMode, TrialReflector};
use crate::ledger::ResourceLedger;
use crate::registers::{DiagonalPhaseFamily, QState, RegisterLayout, DEFAULT_QUBIT_CAP};
use crate::result::RunResult;
use crate::rng::{stream, Rng, STREAM_MEASURE};
use crate::spectra::{Hamiltonian, SpectralOracle, TrialState, NORMALIZATION_MARGIN};
use crate::C64;

/// `K theta` closer than this to an integer counts as an exact bin.
pub const EXACT_BIN_TOL: f64 = 1e-9;

/// Half-width of the window summed term by term in [`dirichlet_mass`].
const EXACT_WINDOW: f64 = 32.0;

/// `sin(pi r)^2` with the argument reduced first, so large `r` keeps full
/// relative precision.
fn sin2_pi(r: f64) -> f64 {
    (PI * (r - r.round())).sin().powi(2)
}

/// Dirichlet kernel at `theta = r / 2^k`, taking `r` directly.
fn dirichlet_scaled(r: f64, k: u32) -> C64 {
    let kk = (k as f64).exp2();
    let f = r - r.round();
    if f.abs() < EXACT_BIN_TOL {
        return if r.round().rem_euclid(kk) == 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let sign = if r.round().rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
    let theta = r / kk;
    let mag = sign * (PI * f).sin() / (kk * (PI * theta).sin());
    C64::from_polar(mag, PI * (kk - 1.0) * theta)
}

/// `(1/2^k) sum_{y < 2^k} exp(2 pi i theta y)`.
pub fn dirichlet(theta: f64, k: u32) -> C64 {
    dirichlet_scaled((k as f64).exp2() * theta, k)
}

/// Phase-estimation amplitude of outcome `x` for eigenvalue `lambda` with
/// `k` ancillas.
pub fn gamma_amplitude(lambda: f64, x: u64, k: u32) -> C64 {
    dirichlet_scaled((k as f64).exp2() * lambda - x as f64, k)
}

/// `sum_{lo <= x < hi} |gamma(lambda, x, k)|^2`. Terms near the peak are
/// summed directly; the smooth remainder uses the `cot` antiderivative with
/// endpoint corrections.
pub fn dirichlet_mass(lambda: f64, k: u32, lo: u64, hi: u64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let kk = (k as f64).exp2();
    let c = (kk * lambda).rem_euclid(kk);
    if (c - c.round()).abs() < EXACT_BIN_TOL {
        let p = (c.round() as u64) % (1u64 << k);
        return if (lo..hi).contains(&p) { 1.0 } else { 0.0 };
    }
    let s2 = sin2_pi(c) / (kk * kk);
    let a = PI / kk;
    let g = |x: f64| 1.0 / (a * (c - x)).sin().powi(2);
    let direct = |from: i64, to: i64| (from..=to).map(|x| g(x as f64)).sum::<f64>();
    let (lo, last) = (lo as i64, hi as i64 - 1);
    if last - lo < 8 * EXACT_WINDOW as i64 {
        return s2 * direct(lo, last);
    }
    let em = |from: i64, to: i64| {
        let (fa, fb) = (from as f64, to as f64);
        let parts = |x: f64| {
            let p = a * (c - x);
            let (s, ct) = (p.sin(), p.cos() / p.sin());
            let csc2 = 1.0 / (s * s);
            (ct, csc2, 2.0 * a * csc2 * ct, 8.0 * a.powi(3) * (csc2 * ct.powi(3) + 2.0 * csc2 * csc2 * ct))
        };
        let (ca, ga, d1a, d3a) = parts(fa);
        let (cb, gb, d1b, d3b) = parts(fb);
        (cb - ca) / a + 0.5 * (ga + gb) + (d1b - d1a) / 12.0 - (d3b - d3a) / 720.0
    };
    let mut windows: Vec<(i64, i64)> = [-kk, 0.0, kk]
        .iter()
        .map(|off| ((c + off - EXACT_WINDOW).ceil() as i64, (c + off + EXACT_WINDOW).floor() as i64))
        .map(|(x, y)| (x.max(lo), y.min(last)))
        .filter(|(x, y)| x <= y)
        .collect();
    windows.sort_unstable();
    let mut total = 0.0;
    let mut cursor = lo;
    for (x, y) in windows {
        let x = x.max(cursor);
        if x > y {
            continue;
        }
        if cursor < x {
            total += em(cursor, x - 1);
        }
        total += direct(x, y);
        cursor = y + 1;
    }
    if cursor <= last {
        total += em(cursor, last);
    }
    s2 * total
}

/// Cost of one run of the phase-estimation circuit with `k` ancillas.
pub fn pea_call_cost(k: u32, sys_qubits: usize) -> ResourceLedger {
    let k64 = k as u64;
    ResourceLedger {
        hamsim_time: 2.0 * PI * ((k as f64).exp2() - 1.0),
        trial_calls: 1,
        walk_steps: 0,
        elementary_gate_proxy: 2 * k64 + k64 * (k64 + 1) / 2,
        qubits_peak: (k as usize + sys_qubits) as u32,
    }
}

/// Phase estimation on registers `(anc, sys)`: trial preparation,
/// Hadamards, controlled powers of `U = exp(-2 pi i H)`, and the Fourier
/// transform on `anc`. Outcome `x` carries `sum_i phi_i conj(gamma_ix)|lambda_i>`.
pub struct PeaPrep {
    layout: RegisterLayout,
    k: u32,
    trial: TrialReflector,
    fwd: DiagonalPhaseFamily,
    inv: DiagonalPhaseFamily,
}

impl PeaPrep {
    pub fn new(oracle: &SpectralOracle, trial_eigen: &[C64], k: u32, cap: usize) -> Result<Self> {
        if !oracle.is_exact() {
            return invalid("phase estimation is simulated with the exact oracle only");
        }
        let h = oracle.hamiltonian;
        let layout = RegisterLayout::with_cap(&[("anc", k as usize), ("sys", h.qubits())], cap)?;
        let kk = 1usize << k;
        let mut table = Vec::with_capacity(kk * h.dim);
        for y in 0..kk {
            for &l in &h.eigenvalues {
                table.push(C64::from_polar(1.0, -2.0 * PI * l * y as f64));
            }
        }
        let time = 2.0 * PI * (kk as f64 - 1.0);
        let inv = DiagonalPhaseFamily { table: table.iter().map(|z| z.conj()).collect(), dim: h.dim, time_charge: time, gate_charge: k as u64 };
        let fwd = DiagonalPhaseFamily { table, dim: h.dim, time_charge: time, gate_charge: k as u64 };
        Ok(Self { layout, k, trial: TrialReflector::new(trial_eigen), fwd, inv })
    }

    fn transform_gates(&self) -> u64 {
        let k = self.k as u64;
        k + k * (k + 1) / 2
    }
}

impl StatePrep for PeaPrep {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }
    fn apply(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        ledger.charge_trial(1);
        ledger.note_qubits(self.layout.total_qubits());
        ledger.charge_gates(self.transform_gates());
        self.trial.apply(s, "sys")?;
        fwht_register(s, "anc")?;
        s.apply_label_controlled("anc", "sys", &self.fwd, ledger)?;
        qft_register(s, "anc", false)
    }
    fn apply_inverse(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        ledger.charge_trial(1);
        ledger.charge_gates(self.transform_gates());
        qft_register(s, "anc", true)?;
        s.apply_label_controlled("anc", "sys", &self.inv, ledger)?;
        fwht_register(s, "anc")?;
        self.trial.apply_inverse(s, "sys")
    }
}

/// Output state of phase estimation with `k` ancillas (system in eigenbasis
/// coordinates).
pub fn pea_state(oracle: &SpectralOracle, trial: &TrialState, k: u32, cap: usize, ledger: &mut ResourceLedger) -> Result<QState> {
    let prep = PeaPrep::new(oracle, &trial.eigen, k, cap)?;
    let mut s = QState::zero(prep.layout().clone());
    prep.apply(&mut s, ledger)?;
    Ok(s)
}

/// Branch `Phi_x` of the phase-estimation output, eigenbasis coordinates.
pub fn pea_branch(h: &Hamiltonian, trial_eigen: &[C64], k: u32, x: u64) -> Vec<C64> {
    trial_eigen.iter().zip(&h.eigenvalues).map(|(p, &l)| p * gamma_amplitude(l, x, k).conj()).collect()
}

/// Explicit branch table; only for small `k`.
pub fn pea_branch_table(h: &Hamiltonian, trial_eigen: &[C64], k: u32) -> Result<BranchTable> {
    if k > 20 {
        return invalid(format!("branch table with {k} label bits is too large"));
    }
    let mut v = Vec::with_capacity(h.dim << k);
    for x in 0..1u64 << k {
        v.extend(pea_branch(h, trial_eigen, k, x));
    }
    BranchTable::new(k as usize, h.dim, v, pea_call_cost(k, h.qubits()))
}

/// `sum_{x < below} ||Phi_x||^2`.
pub fn pea_prefix_mass(h: &Hamiltonian, trial_eigen: &[C64], k: u32, below: u64) -> f64 {
    trial_eigen.iter().zip(&h.eigenvalues).map(|(p, &l)| p.norm_sqr() * dirichlet_mass(l, k, 0, below)).sum()
}

/// Infidelity of the normalized branch `Phi_z` with the ground space.
pub fn pea_postselected_infidelity(h: &Hamiltonian, trial_eigen: &[C64], k: u32, z: u64) -> f64 {
    let b = pea_branch(h, trial_eigen, k, z);
    let total: f64 = b.iter().map(|c| c.norm_sqr()).sum();
    let ground: f64 = b[..h.ground_degeneracy].iter().map(|c| c.norm_sqr()).sum();
    ((total - ground) / total).max(0.0)
}

/// Label search over phase-estimation outcomes without storing branches:
/// prefix masses come from [`dirichlet_mass`] per eigencomponent.
pub struct PeaSearch<'a> {
    h: &'a Hamiltonian,
    trial: &'a [C64],
    k: u32,
    call_cost: ResourceLedger,
    last: Option<(u64, u64)>,
}

impl<'a> PeaSearch<'a> {
    pub fn new(h: &'a Hamiltonian, trial_eigen: &'a [C64], k: u32) -> Result<Self> {
        if !(1..=52).contains(&k) {
            return invalid(format!("k = {k} outside 1..=52"));
        }
        Ok(Self { h, trial: trial_eigen, k, call_cost: pea_call_cost(k, h.qubits()), last: None })
    }

    pub fn range_mass(&self, lo: u64, hi: u64) -> f64 {
        self.trial
            .iter()
            .zip(&self.h.eigenvalues)
            .filter(|(p, _)| p.norm_sqr() > 0.0)
            .map(|(p, &l)| p.norm_sqr() * dirichlet_mass(l, self.k, lo, hi))
            .sum()
    }

    fn range(&self, prefix: usize, bits: usize) -> (u64, u64) {
        let shift = self.k as usize - bits;
        ((prefix as u64) << shift, (prefix as u64 + 1) << shift)
    }
}

impl BranchSearch for PeaSearch<'_> {
    fn label_bits(&self) -> usize {
        self.k as usize
    }

    fn search(&mut self, prefix: usize, k: usize, schedule: &FpsSchedule, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<bool> {
        let (lo, hi) = self.range(prefix, k);
        let amp = reduced_amplitude(self.range_mass(lo, hi).max(0.0).sqrt(), &schedule.phase_angles);
        ledger.charge_repeated(&self.call_cost, schedule.t);
        let ok = rng.gen::<f64>() < amp * amp;
        if ok {
            self.last = Some((lo, hi));
        }
        Ok(ok)
    }

    fn measure_label(&mut self, rng: &mut Rng) -> Result<(usize, Vec<C64>)> {
        let Some((mut lo, mut hi)) = self.last else {
            return invalid("no successful search to measure");
        };
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let left = self.range_mass(lo, mid);
            let right = self.range_mass(mid, hi);
            if !(left + right > 0.0) {
                return invalid("measured an empty branch");
            }
            if rng.gen::<f64>() * (left + right) < left {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let b = pea_branch(self.h, self.trial, self.k, lo);
        let nrm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(nrm > 0.0) {
            return invalid("measured an empty branch");
        }
        Ok((lo as usize, b.into_iter().map(|z| z / nrm).collect()))
    }

    fn branch_norm(&self, j: usize) -> f64 {
        self.range_mass(j as u64, j as u64 + 1).sqrt()
    }
}

/// Parameters of phase-estimation energy estimation: `n` precision bits and
/// `2^d_bits` extra outcomes per precision bin, enough that the outcome mass
/// more than `2^d_bits` below the ground bin stays within the search slack.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeaEstimatePlan {
    pub n: u32,
    pub d_bits: u32,
    pub k: u32,
    pub search: LabelSearchParams,
}

impl PeaEstimatePlan {
    pub fn new(chi: f64, xi: f64, search_delta: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return invalid(format!("xi = {xi} outside (0, 1)"));
        }
        if !(chi > 0.0 && chi <= 1.0) {
            return invalid(format!("chi = {chi} outside (0, 1]"));
        }
        let n = (1.0 / xi).log2().ceil().max(1.0) as u32;
        let zeta = 2.0 * chi / PI;
        for d_bits in 1..=52u32.saturating_sub(n) {
            let k = n + d_bits;
            let search = LabelSearchParams::new(k as usize, zeta, search_delta)?;
            let d = (d_bits as f64).exp2();
            let wrap = NORMALIZATION_MARGIN * (k as f64).exp2();
            let tail = 0.25 / (d - 1.0) + if wrap > 1.0 { 0.25 / (wrap - 1.0) } else { 1.0 };
            if tail <= zeta * zeta * search.rho {
                return Ok(Self { n, d_bits, k, search });
            }
        }
        invalid(format!("no ancilla count reaches precision {xi} at chi = {chi}"))
    }

    /// Runs the search; returns the outcome and `x / 2^k`.
    pub fn run(&self, h: &Hamiltonian, trial_eigen: &[C64], rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<(LabelSearchOutcome, Option<f64>)> {
        let mut eng = PeaSearch::new(h, trial_eigen, self.k)?;
        ledger.note_qubits(self.k as usize + h.qubits());
        let out = min_label_find(&mut eng, &self.search, rng, ledger)?;
        let est = out.label.map(|x| x as f64 / (self.k as f64).exp2());
        Ok((out, est))
    }
}

/// Interval `[est - xi, est + xi]` clipped to `[0, 1]` from a phase-estimation
/// estimate at precision `xi`; the whole unit interval when `xi >= 1/2`.
/// `None` when the search fails.
pub fn pea_bracket(h: &Hamiltonian, trial_eigen: &[C64], chi: f64, xi: f64, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<Option<(f64, f64)>> {
    if xi >= 0.5 {
        return Ok(Some((0.0, 1.0)));
    }
    let plan = PeaEstimatePlan::new(chi, xi, DEFAULT_SEARCH_DELTA)?;
    let (out, est) = plan.run(h, trial_eigen, rng, ledger)?;
    Ok(match est {
        Some(e) if out.success => Some(((e - xi).max(0.0), (e + xi).min(1.0))),
        _ => None,
    })
}

/// Ground-energy estimate to precision `xi` by phase estimation and the
/// minimum-label search over outcomes.
pub fn pea_estimate_energy(oracle: &SpectralOracle, trial: &TrialState, chi: f64, xi: f64, seed: u64) -> Result<RunResult> {
    let h = oracle.hamiltonian;
    if !oracle.is_exact() {
        return invalid("phase estimation is simulated with the exact oracle only");
    }
    let plan = PeaEstimatePlan::new(chi, xi, DEFAULT_SEARCH_DELTA)?;
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut ledger = ResourceLedger::new();
    let (out, est) = plan.run(h, &trial.eigen, &mut rng, &mut ledger)?;
    let mut r = RunResult::new("pea-estimate", h, trial.overlap.norm(), seed);
    r.chi = Some(chi);
    r.xi = Some(xi);
    r.success = out.success;
    r.label = out.label;
    r.label_norm = out.branch_norm;
    if let Some(e) = est {
        r.set_energy(h, e);
    }
    r.stages.push(("estimate".into(), ledger));
    r.ledger = ledger;
    Ok(r)
}

/// Where the post-selected outcome comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "energy")]
pub enum PeaTarget {
    /// Ground energy supplied.
    Known(f64),
    /// Estimated first at precision `chi eps Delta / pi`.
    Unknown,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeaPrepareConfig {
    pub delta_lb: f64,
    pub chi: f64,
    pub eps: f64,
    /// Overrides the ancilla count.
    pub k: Option<u32>,
    pub mode: AmpMode,
    pub amp_delta: f64,
    pub max_rounds: u32,
    pub qubit_cap: usize,
}

impl PeaPrepareConfig {
    pub fn new(delta_lb: f64, chi: f64, eps: f64) -> Self {
        Self { delta_lb, chi, eps, k: None, mode: AmpMode::Fps, amp_delta: 0.1, max_rounds: 400, qubit_cap: DEFAULT_QUBIT_CAP }
    }

    /// `ceil(log2(1/(pi chi eps Delta)))`.
    pub fn bits(&self) -> u32 {
        self.k.unwrap_or_else(|| (1.0 / (PI * self.chi * self.eps * self.delta_lb)).log2().ceil().max(1.0) as u32)
    }
}

/// Prepares the ground state by post-selecting phase estimation on the
/// outcome nearest `2^k E`, amplified with fixed-point search.
pub fn pea_prepare(oracle: &SpectralOracle, trial: &TrialState, target: PeaTarget, cfg: &PeaPrepareConfig, seed: u64) -> Result<RunResult> {
    let h = oracle.hamiltonian;
    if !oracle.is_exact() {
        return invalid("phase estimation is simulated with the exact oracle only");
    }
    let k = cfg.bits();
    if k > 52 {
        return invalid(format!("k = {k} too large"));
    }
    let mut rng = stream(seed, STREAM_MEASURE);
    let mut r = RunResult::new("pea", h, trial.overlap.norm(), seed);
    r.delta_lb = Some(cfg.delta_lb);
    r.chi = Some(cfg.chi);
    r.eps = Some(cfg.eps);
    let mut total = ResourceLedger::new();
    let energy = match target {
        PeaTarget::Known(e) => e,
        PeaTarget::Unknown => {
            let xi = cfg.chi * cfg.eps * cfg.delta_lb / PI;
            let plan = PeaEstimatePlan::new(cfg.chi, xi, DEFAULT_SEARCH_DELTA)?;
            let mut ledger = ResourceLedger::new();
            let (out, est) = plan.run(h, &trial.eigen, &mut rng, &mut ledger)?;
            r.xi = Some(xi);
            total += &ledger;
            r.stages.push(("estimate".into(), ledger));
            match est {
                Some(e) if out.success => e,
                _ => {
                    r.ledger = total;
                    return Ok(r);
                }
            }
        }
    };
    let kk = (k as f64).exp2();
    let z = ((kk * energy).round().rem_euclid(kk)) as u64;
    let b = pea_branch(h, &trial.eigen, k, z);
    let lambda = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(lambda > 0.0) {
        return invalid("post-selected outcome has zero amplitude");
    }
    let branch = PreparedBranch { lambda, state: b.into_iter().map(|c| c / lambda).collect(), call_cost: pea_call_cost(k, h.qubits()) };
    if k as usize + h.qubits() > cfg.qubit_cap {
        return Err(crate::Error::CapacityExceeded { needed: k as usize + h.qubits(), cap: cfg.qubit_cap });
    }
    let mut ledger = ResourceLedger::new();
    ledger.note_qubits(k as usize + h.qubits());
    let out = cfg.mode.amplify(&branch, cfg.amp_delta, cfg.max_rounds, &mut rng, &mut ledger)?;
    total += &ledger;
    r.stages.push(("prepare".into(), ledger));
    r.ledger = total;
    r.label = Some(z as usize);
    r.label_norm = Some(lambda);
    r.pre_amplitude = Some(lambda);
    r.success = out.success;
    if out.success {
        r.set_energy(h, z as f64 / kk);
        r.set_state(h, h.from_eigen(&out.flagged));
    }
    Ok(r)
}
