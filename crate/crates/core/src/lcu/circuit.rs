use nalgebra::DMatrix;

use super::{FourierCoefficients, FourierParams};
use crate::amplify::StatePrep;
use crate::error::{Error, Result};
use crate::ledger::ResourceLedger;
use crate::registers::{LabelFamily, MatrixFamily, QState, RegisterLayout};
use crate::spectra::SpectralOracle;
use crate::C64;

/// Householder data `(w, phase)` with `phase * (1 - 2ww^+/|w|^2) |0> = v`.
pub fn reflector_to(v: &[C64]) -> (Vec<C64>, C64) {
    let theta = if v[0].norm() > 0.0 { v[0].arg() } else { 0.0 };
    let rot = C64::from_polar(1.0, -theta);
    let mut w: Vec<C64> = v.iter().map(|z| -z * rot).collect();
    w[0] += 1.0;
    if w.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-30 {
        w.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    }
    (w, C64::from_polar(1.0, theta))
}

/// Unitary preparing a fixed unit vector from `|0>` on one register.
#[derive(Clone, Debug)]
pub struct TrialReflector {
    w: Vec<C64>,
    phase: C64,
}

impl TrialReflector {
    pub fn new(v: &[C64]) -> Self {
        let (w, phase) = reflector_to(v);
        Self { w, phase }
    }

    pub fn apply(&self, s: &mut QState, reg: &str) -> Result<()> {
        s.apply_reflector(reg, &self.w)?;
        s.amplitudes_mut().iter_mut().for_each(|z| *z *= self.phase);
        Ok(())
    }

    pub fn apply_inverse(&self, s: &mut QState, reg: &str) -> Result<()> {
        let c = self.phase.conj();
        s.amplitudes_mut().iter_mut().for_each(|z| *z *= c);
        s.apply_reflector(reg, &self.w)
    }
}

/// `B` as a dense unitary on `b` qubits; it is a Householder reflection, so
/// its first column is the normalized `sqrt(alpha_k)` vector and `B = B^+`.
pub fn prepare_b(coeffs: &FourierCoefficients) -> DMatrix<C64> {
    let v = b_column(coeffs);
    let (w, _) = reflector_to(&v);
    let ww: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let n = v.len();
    DMatrix::from_fn(n, n, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        let corr = if ww > 0.0 { w[r] * w[c].conj() * (2.0 / ww) } else { C64::new(0.0, 0.0) };
        C64::new(id, 0.0) - corr
    })
}

fn b_column(coeffs: &FourierCoefficients) -> Vec<C64> {
    let n = coeffs.alpha.len().next_power_of_two();
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (slot, a) in v.iter_mut().zip(&coeffs.alpha) {
        *slot = C64::new((a / coeffs.alpha_sum).sqrt(), 0.0);
    }
    v
}

/// Label-controlled `exp(-2i (H~ - shift) k)` for `k = label - m0`,
/// `|k| <= m0`, or its inverse.
pub enum EvolutionFamily {
    Diagonal { table: Vec<C64>, dim: usize, time: f64, gates: u64 },
    Dense { family: MatrixFamily, time: f64, gates: u64 },
}

impl EvolutionFamily {
    /// Family acting on eigenbasis coordinates.
    pub fn new(oracle: &SpectralOracle, shift: f64, m0: u64, inverse: bool) -> Result<Self> {
        let h = oracle.hamiltonian;
        let n = h.dim;
        let sign = if inverse { 1.0 } else { -1.0 };
        let time = 2.0 * m0 as f64;
        let gates = super::label_bits(2 * m0 as usize + 1) as u64;
        let m0 = m0 as i64;
        if oracle.is_exact() {
            let mut table = Vec::with_capacity((2 * m0 as usize + 1) * n);
            for k in -m0..=m0 {
                for &l in &h.eigenvalues {
                    table.push(C64::from_polar(1.0, sign * 2.0 * (l - shift) * k as f64));
                }
            }
            return Ok(Self::Diagonal { table, dim: n, time, gates });
        }
        let mut scratch = ResourceLedger::new();
        let mut mats = Vec::with_capacity(2 * m0 as usize + 1);
        for k in -m0..=m0 {
            let t = 2.0 * k as f64;
            let shift_phase = C64::from_polar(1.0, 2.0 * shift * k as f64);
            let mut u = DMatrix::<C64>::zeros(n, n);
            for c in 0..n {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[c] = C64::new(1.0, 0.0);
                let col = oracle.evolve_eigen(t, &e, &mut scratch);
                for r in 0..n {
                    u[(r, c)] = col[r] * shift_phase;
                }
            }
            mats.push(if inverse { u.adjoint() } else { u });
        }
        Ok(Self::Dense { family: MatrixFamily::new(mats)?, time, gates })
    }
}

impl LabelFamily for EvolutionFamily {
    fn len(&self) -> usize {
        match self {
            Self::Diagonal { table, dim, .. } => table.len() / dim,
            Self::Dense { family, .. } => family.len(),
        }
    }
    fn target_dim(&self) -> usize {
        match self {
            Self::Diagonal { dim, .. } => *dim,
            Self::Dense { family, .. } => family.target_dim(),
        }
    }
    fn apply(&self, label: usize, fiber: &mut [C64]) {
        match self {
            Self::Diagonal { table, dim, .. } => {
                for (z, p) in fiber.iter_mut().zip(&table[label * dim..(label + 1) * dim]) {
                    *z *= p;
                }
            }
            Self::Dense { family, .. } => family.apply(label, fiber),
        }
    }
    fn charge(&self, ledger: &mut ResourceLedger) {
        let (Self::Diagonal { time, gates, .. } | Self::Dense { time, gates, .. }) = self;
        ledger.charge_time(*time);
        ledger.charge_gates(*gates);
    }
}

/// The sandwich `(B^+ (x) 1) U (B (x) 1)` for one energy guess.
pub struct LcuCircuit {
    pub params: FourierParams,
    pub coeffs: FourierCoefficients,
    pub energy: f64,
    b_w: Vec<C64>,
    fwd: EvolutionFamily,
    inv: EvolutionFamily,
}

impl LcuCircuit {
    pub fn new(oracle: &SpectralOracle, params: &FourierParams, energy: f64) -> Result<Self> {
        let coeffs = FourierCoefficients::new(params.m, params.m0)?;
        let (b_w, _) = reflector_to(&b_column(&coeffs));
        let shift = energy - params.tau;
        Ok(Self {
            params: params.clone(),
            energy,
            b_w,
            fwd: EvolutionFamily::new(oracle, shift, params.m0, false)?,
            inv: EvolutionFamily::new(oracle, shift, params.m0, true)?,
            coeffs,
        })
    }

    pub fn b(&self) -> usize {
        self.params.b()
    }

    pub(crate) fn apply_b(&self, s: &mut QState, anc: &str, ledger: &mut ResourceLedger) -> Result<()> {
        ledger.charge_gates(1u64 << self.b());
        s.apply_reflector(anc, &self.b_w)
    }

    pub(crate) fn apply_u(&self, s: &mut QState, anc: &str, sys: &str, inverse: bool, ledger: &mut ResourceLedger) -> Result<()> {
        s.apply_label_controlled(anc, sys, if inverse { &self.inv } else { &self.fwd }, ledger)
    }

    fn sandwich(&self, s: &mut QState, anc: &str, sys: &str, inverse: bool, ledger: &mut ResourceLedger) -> Result<()> {
        let fam = if inverse { &self.inv } else { &self.fwd };
        let gates = 2 * (1u64 << self.b());
        s.apply_reflector(anc, &self.b_w)?;
        s.apply_label_controlled(anc, sys, fam, ledger)?;
        s.apply_reflector(anc, &self.b_w)?;
        ledger.charge_gates(gates);
        Ok(())
    }
}

/// Applies the LCU sandwich; the ancilla must start in `|0...0>`.
pub fn apply_g(s: &mut QState, circuit: &LcuCircuit, anc: &str, sys: &str, ledger: &mut ResourceLedger) -> Result<()> {
    let p = s.register_probabilities(anc)?;
    let total: f64 = p.iter().sum();
    if (total - p[0]).abs() > 1e-12 * total.max(1.0) {
        return Err(Error::AncillaNotClean(anc.into()));
    }
    ledger.note_qubits(s.layout().total_qubits());
    circuit.sandwich(s, anc, sys, false, ledger)
}

/// Flagged block `<0|G|0>` on eigenbasis coordinates, column by column.
pub fn flagged_block(circuit: &LcuCircuit, n: usize) -> Result<DMatrix<C64>> {
    let layout = RegisterLayout::new(&[("anc", circuit.b()), ("sys", n.trailing_zeros() as usize)])?;
    let mut out = DMatrix::<C64>::zeros(n, n);
    for c in 0..n {
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        amps[c] = C64::new(1.0, 0.0);
        let mut s = QState::from_amplitudes(layout.clone(), amps, crate::registers::NormKind::Normalized)?;
        apply_g(&mut s, circuit, "anc", "sys", &mut ResourceLedger::new())?;
        for r in 0..n {
            out[(r, c)] = s.amplitudes()[r];
        }
    }
    Ok(out)
}

/// `C = (B^+ U B) (1 (x) trial)` as a state-preparation circuit on
/// `(anc, sys)`; the flag is `anc = 0`.
pub struct LcuPrep<'a> {
    layout: RegisterLayout,
    circuit: &'a LcuCircuit,
    trial: TrialReflector,
}

impl<'a> LcuPrep<'a> {
    pub fn new(circuit: &'a LcuCircuit, trial_eigen: &[C64], cap: usize) -> Result<Self> {
        let n = trial_eigen.len().trailing_zeros() as usize;
        let layout = RegisterLayout::with_cap(&[("anc", circuit.b()), ("sys", n)], cap)?;
        Ok(Self { layout, circuit, trial: TrialReflector::new(trial_eigen) })
    }
}

impl StatePrep for LcuPrep<'_> {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }
    fn apply(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        ledger.charge_trial(1);
        ledger.note_qubits(self.layout.total_qubits());
        self.trial.apply(s, "sys")?;
        self.circuit.sandwich(s, "anc", "sys", false, ledger)
    }
    fn apply_inverse(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()> {
        self.circuit.sandwich(s, "anc", "sys", true, ledger)?;
        ledger.charge_trial(1);
        self.trial.apply_inverse(s, "sys")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::NormKind;
    use crate::spectra::{build_hamiltonian, Hamiltonian, Model, ModelSpec};

    fn diag(vals: &[f64]) -> Hamiltonian {
        build_hamiltonian(&ModelSpec::new(Model::Diagonal { eigenvalues: vals.to_vec(), degeneracy: None }, 0)).unwrap()
    }

    #[test]
    fn b_first_column_example() {
        let c = FourierCoefficients::new(1, 1).unwrap();
        let b = prepare_b(&c);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (r, want) in [0.5, h, 0.5, 0.0].iter().enumerate() {
            assert!((b[(r, 0)] - C64::new(*want, 0.0)).norm() < 1e-15);
        }
        assert!(crate::registers::unitarity_deviation(&b) < 1e-12);
        let c = FourierCoefficients::new(40, 17).unwrap();
        let b = prepare_b(&c);
        assert!(crate::registers::unitarity_deviation(&b) < 1e-12);
        assert!((b[(0, 0)].re - (c.alpha[0] / c.alpha_sum).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eigenvector_branch_is_cos_squared() {
        // shifted eigenvalue h = lambda - E + tau = 0.5
        let h = diag(&[0.3, 0.6]);
        let oracle = SpectralOracle::new(&h);
        let p = FourierParams::manual(0.2, 1, 1).unwrap();
        let circ = LcuCircuit::new(&oracle, &p, 0.0).unwrap();
        let layout = RegisterLayout::new(&[("anc", 2), ("sys", 1)]).unwrap();
        let mut s = QState::zero(layout);
        let mut led = ResourceLedger::new();
        apply_g(&mut s, &circ, "anc", "sys", &mut led).unwrap();
        let (_, n) = s.flagged_branch(&[("anc", 0)]).unwrap();
        assert!((n - 0.5f64.cos().powi(2)).abs() < 1e-12);
        assert!((n - 0.770151).abs() < 1e-6);
        assert_eq!(led.hamsim_time, 2.0);
    }

    #[test]
    fn zero_of_cosine_gives_zero_branch() {
        let h = diag(&[0.5, 0.6]);
        let oracle = SpectralOracle::new(&h);
        let tau = std::f64::consts::FRAC_PI_2 - 0.5;
        let circ = LcuCircuit::new(&oracle, &FourierParams::manual(tau, 3, 3).unwrap(), 0.0).unwrap();
        let block = flagged_block(&circ, 2).unwrap();
        assert!(block[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn full_series_is_cos_power_and_hermitian() {
        let spec = ModelSpec::new(Model::RandomHermitian { dim: 8, gap: 0.1, ground: None }, 3);
        let h = build_hamiltonian(&spec).unwrap();
        let oracle = SpectralOracle::new(&h);
        for &(m, m0) in &[(10u64, 10u64), (40, 12)] {
            let p = FourierParams::manual(0.05, m, m0).unwrap();
            let circ = LcuCircuit::new(&oracle, &p, 0.2).unwrap();
            let g = flagged_block(&circ, 8).unwrap() * C64::new(circ.coeffs.alpha_sum, 0.0);
            let dev = (&g - g.adjoint()).norm();
            assert!(dev < 1e-10);
            for i in 0..8 {
                let x = h.eigenvalues[i] - 0.2 + 0.05;
                let want = x.cos().powi(2 * m as i32);
                let err = (g[(i, i)].re - want).abs();
                if m0 == m {
                    assert!(err < 1e-10);
                } else {
                    assert!(err <= circ.coeffs.tail_bound);
                }
            }
        }
    }

    #[test]
    fn dirty_ancilla_rejected() {
        let h = diag(&[0.3, 0.6]);
        let oracle = SpectralOracle::new(&h);
        let circ = LcuCircuit::new(&oracle, &FourierParams::manual(0.1, 1, 1).unwrap(), 0.0).unwrap();
        let layout = RegisterLayout::new(&[("anc", 2), ("sys", 1)]).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[2] = C64::new(1.0, 0.0);
        let mut s = QState::from_amplitudes(layout, amps, NormKind::Normalized).unwrap();
        assert!(matches!(apply_g(&mut s, &circ, "anc", "sys", &mut ResourceLedger::new()), Err(Error::AncillaNotClean(_))));
    }

    #[test]
    fn noisy_oracle_family_stays_close() {
        let spec = ModelSpec::new(Model::RandomHermitian { dim: 4, gap: 0.1, ground: None }, 5);
        let h = build_hamiltonian(&spec).unwrap();
        let exact = SpectralOracle::new(&h);
        let noisy = SpectralOracle::with_error(&h, 1e-9, 2);
        let p = FourierParams::manual(0.05, 6, 4).unwrap();
        let a = flagged_block(&LcuCircuit::new(&exact, &p, 0.1).unwrap(), 4).unwrap();
        let b = flagged_block(&LcuCircuit::new(&noisy, &p, 0.1).unwrap(), 4).unwrap();
        assert!((a - b).norm() < 1e-6);
    }

    #[test]
    fn prep_inverse_undoes_prep() {
        let h = diag(&[0.1, 0.3, 0.6, 0.9]);
        let oracle = SpectralOracle::new(&h);
        let circ = LcuCircuit::new(&oracle, &FourierParams::manual(0.05, 5, 3).unwrap(), 0.1).unwrap();
        let trial = [C64::new(0.5, 0.0), C64::new(0.5, 0.1), C64::new(0.0, -0.5), C64::new(0.49, 0.0)];
        let nrm: f64 = trial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let trial: Vec<C64> = trial.iter().map(|z| z / nrm).collect();
        let prep = LcuPrep::new(&circ, &trial, 24).unwrap();
        let mut s = QState::zero(prep.layout().clone());
        let mut led = ResourceLedger::new();
        prep.apply(&mut s, &mut led).unwrap();
        prep.apply_inverse(&mut s, &mut led).unwrap();
        assert!((s.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(led.trial_calls, 2);
        assert_eq!(led.hamsim_time, 12.0);
    }
}
