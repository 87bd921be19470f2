use serde::{Deserialize, Serialize};

use crate::amplify::FpsSchedule;
use crate::error::{invalid, Result};

/// Default failure parameter of the label search.
pub const DEFAULT_SEARCH_DELTA: f64 = 0.04;

/// Control parameters of the minimum-label search. Logarithms of `n/delta`
/// are base 2; `ln(2/delta)` is natural.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSearchParams {
    pub n: usize,
    pub zeta: f64,
    pub delta: f64,
    /// Repetitions per prefix.
    pub k_reps: u32,
    pub delta_prime: f64,
    /// Allowed prefix mass below the acceptable range, as a fraction of
    /// `zeta^2`.
    pub rho: f64,
}

impl LabelSearchParams {
    pub fn new(n: usize, zeta: f64, delta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta < 1.0) {
            return invalid(format!("zeta = {zeta} outside (0, 1)"));
        }
        if !(delta > 0.0 && delta < 0.2) {
            return invalid(format!("delta = {delta} outside (0, 1/5)"));
        }
        let nn = n.max(1) as f64;
        let lg = (nn / delta).log2();
        let ln2d = (2.0 / delta).ln();
        Ok(Self {
            n,
            zeta,
            delta,
            k_reps: lg.ceil() as u32,
            delta_prime: delta / (2.0 * nn * lg),
            rho: delta / (4.0 * nn * lg * ln2d * ln2d),
        })
    }

    pub fn schedule(&self) -> Result<FpsSchedule> {
        FpsSchedule::new(self.zeta, self.delta_prime)
    }
}

/// Equally spaced energies `offset + j step`, `j < len`, `len` a power of 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub len: usize,
    pub offset: f64,
    pub step: f64,
}

impl EnergyGrid {
    pub fn new(len: usize, offset: f64, step: f64) -> Result<Self> {
        if !len.is_power_of_two() {
            return invalid(format!("grid length {len} is not a power of 2"));
        }
        Ok(Self { len, offset, step })
    }

    /// `len` points covering `[a, b)`.
    pub fn over(a: f64, b: f64, len: usize) -> Result<Self> {
        Self::new(len, a, (b - a) / len as f64)
    }

    pub fn energy(&self, j: usize) -> f64 {
        self.offset + j as f64 * self.step
    }

    pub fn bits(&self) -> usize {
        self.len.trailing_zeros() as usize
    }
}
