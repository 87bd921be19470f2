use rand::Rng as _;
use rand_distr::StandardNormal;

use super::Hamiltonian;
use crate::error::{invalid, Result};
use crate::rng::{stream, STREAM_TRIAL};
use crate::C64;

/// Trial state `phi0 |lambda_0> + sqrt(1 - phi0^2) |r>` with `|r>` orthogonal
/// to the ground space.
#[derive(Clone, Debug)]
pub struct TrialState {
    /// Computational-basis amplitudes.
    pub amplitudes: Vec<C64>,
    /// Coordinates in the eigenbasis of the Hamiltonian it was built for.
    pub eigen: Vec<C64>,
    /// `<lambda_0|phi>`.
    pub overlap: C64,
}

impl TrialState {
    /// Trial state given directly by eigenbasis coordinates (normalized here).
    pub fn from_eigen(h: &Hamiltonian, coords: &[C64]) -> Result<Self> {
        if coords.len() != h.dim {
            return invalid("coordinate vector does not match the Hamiltonian dimension");
        }
        let norm = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return invalid("zero trial state");
        }
        let eigen: Vec<C64> = coords.iter().map(|z| z / norm).collect();
        let amplitudes = h.from_eigen(&eigen);
        Ok(Self { overlap: eigen[0], amplitudes, eigen })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn make_trial_state(h: &Hamiltonian, overlap: f64, seed: u64) -> Result<TrialState> {
    if !(overlap > 0.0 && overlap <= 1.0) {
        return invalid(format!("overlap {overlap} outside (0, 1]"));
    }
    let n = h.dim;
    let g = h.ground_degeneracy;
    let mut eigen = vec![C64::new(0.0, 0.0); n];
    eigen[0] = C64::new(overlap, 0.0);
    let rest = (1.0 - overlap * overlap).max(0.0).sqrt();
    if rest > 0.0 {
        if g == n {
            return invalid("no excited states to carry the orthogonal component");
        }
        let mut rng = stream(seed, STREAM_TRIAL);
        let mut r: Vec<C64> = (g..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
            .collect();
        let nr = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in r.iter_mut() {
            *z *= rest / nr;
        }
        eigen[g..].copy_from_slice(&r);
    }
    let amplitudes = h.from_eigen(&eigen);
    Ok(TrialState { amplitudes, overlap: eigen[0], eigen })
}
