use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::hamiltonian::sorted_eigen;
use super::Hamiltonian;
use crate::ledger::ResourceLedger;
use crate::rng::{stream, STREAM_NOISE};
use crate::C64;

/// Seeded coherent error: every evolution for time `t` is followed by
/// `exp(-i * strength * |t| * K)` with `K` Hermitian of unit operator norm.
#[derive(Clone, Debug)]
pub struct ErrorInjection {
    pub strength: f64,
    k_vals: Vec<f64>,
    /// Eigenvectors of `K` in the computational basis.
    k_vecs: DMatrix<C64>,
}

impl ErrorInjection {
    pub fn new(dim: usize, strength: f64, seed: u64) -> Self {
        let mut rng = stream(seed, STREAM_NOISE);
        let g = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let k = (&g + g.adjoint()) * C64::new(0.5, 0.0);
        let (mut vals, vecs) = sorted_eigen(&k);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            vals.iter_mut().for_each(|v| *v /= scale);
        }
        Self { strength, k_vals: vals, k_vecs: vecs }
    }

    fn apply(&self, s: f64, v: &mut [C64]) {
        let n = v.len();
        let c: Vec<C64> = (0..n)
            .map(|i| (0..n).map(|r| self.k_vecs[(r, i)].conj() * v[r]).sum::<C64>() * C64::from_polar(1.0, -s * self.k_vals[i]))
            .collect();
        for (r, slot) in v.iter_mut().enumerate() {
            *slot = (0..n).map(|i| self.k_vecs[(r, i)] * c[i]).sum();
        }
    }
}

/// Exact time evolution under `H~`, treated by all algorithms as a black box
/// whose only observable cost is the charged time.
#[derive(Clone, Debug)]
pub struct SpectralOracle<'a> {
    pub hamiltonian: &'a Hamiltonian,
    pub error_injection: Option<ErrorInjection>,
}

impl<'a> SpectralOracle<'a> {
    pub fn new(hamiltonian: &'a Hamiltonian) -> Self {
        Self { hamiltonian, error_injection: None }
    }

    pub fn with_error(hamiltonian: &'a Hamiltonian, strength: f64, seed: u64) -> Self {
        let inj = (strength > 0.0).then(|| ErrorInjection::new(hamiltonian.dim, strength, seed));
        Self { hamiltonian, error_injection: inj }
    }

    /// `exp(-i H~ t) v`, charging `|t|`.
    pub fn evolve(&self, t: f64, v: &[C64], ledger: &mut ResourceLedger) -> Vec<C64> {
        ledger.charge_time(t);
        let h = self.hamiltonian;
        let mut c = h.to_eigen(v);
        for (ci, &l) in c.iter_mut().zip(&h.eigenvalues) {
            *ci *= C64::from_polar(1.0, -l * t);
        }
        let mut out = h.from_eigen(&c);
        if let Some(inj) = &self.error_injection {
            inj.apply(inj.strength * t.abs(), &mut out);
        }
        out
    }

    /// Same as [`SpectralOracle::evolve`] on eigenbasis coordinates.
    pub fn evolve_eigen(&self, t: f64, c: &[C64], ledger: &mut ResourceLedger) -> Vec<C64> {
        if self.error_injection.is_some() {
            let v = self.hamiltonian.from_eigen(c);
            let out = self.evolve(t, &v, ledger);
            return self.hamiltonian.to_eigen(&out);
        }
        ledger.charge_time(t);
        c.iter()
            .zip(&self.hamiltonian.eigenvalues)
            .map(|(z, &l)| z * C64::from_polar(1.0, -l * t))
            .collect()
    }

    /// Charges simulation time for an evolution whose action is applied
    /// analytically by the caller.
    pub fn charge(&self, t: f64, ledger: &mut ResourceLedger) {
        ledger.charge_time(t);
    }

    pub fn is_exact(&self) -> bool {
        self.error_injection.is_none()
    }
}
