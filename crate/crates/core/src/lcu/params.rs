use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Parameters of the `cos^M` projection. `H = H~ - (E - tau)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierParams {
    pub tau: f64,
    /// `M = 2m`.
    pub big_m: u64,
    pub m: u64,
    pub m0: u64,
    /// Precision to which the ground energy must be known.
    pub delta_precision: f64,
    /// `ln(1/(chi eps))`.
    pub log_term: f64,
}

impl FourierParams {
    pub fn choose(delta_lb: f64, chi: f64, eps: f64) -> Result<Self> {
        if !(delta_lb > 0.0 && delta_lb < 1.0) {
            return invalid(format!("gap bound {delta_lb} outside (0, 1)"));
        }
        if !(chi > 0.0 && chi <= 1.0) {
            return invalid(format!("overlap bound {chi} outside (0, 1]"));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return invalid(format!("eps {eps} outside (0, 1)"));
        }
        let lg = (1.0 / (chi * eps)).ln();
        let m = (4.0 * lg * lg / (delta_lb * delta_lb)).ceil() as u64;
        let big_m = 2 * m;
        let m0 = ((2.0 * (big_m as f64 * lg).sqrt()).ceil() as u64).min(m);
        if m0 < 1 {
            return invalid("truncation radius below 1");
        }
        Ok(Self { tau: delta_lb / (2.0 * lg), big_m, m, m0, delta_precision: delta_lb / (4.0 * lg), log_term: lg })
    }

    /// Explicit parameters, mainly for tests.
    pub fn manual(tau: f64, m: u64, m0: u64) -> Result<Self> {
        if m0 < 1 || m0 > m {
            return invalid(format!("need 1 <= m0 <= m, got m0 = {m0}, m = {m}"));
        }
        Ok(Self { tau, big_m: 2 * m, m, m0, delta_precision: 0.0, log_term: 0.0 })
    }

    /// Qubits of the LCU ancilla, `ceil(log2(2 m0 + 1))`.
    pub fn b(&self) -> usize {
        label_bits(2 * self.m0 as usize + 1)
    }
}

/// Bits needed to hold `n` distinct labels.
pub fn label_bits(n: usize) -> usize {
    n.max(1).next_power_of_two().trailing_zeros() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let p = FourierParams::choose(0.1, 0.5, 0.01).unwrap();
        assert!((p.log_term - 5.298).abs() < 1e-3);
        assert_eq!(p.big_m, 22458);
        assert_eq!(p.m0, 690);
        assert_eq!(p.b(), 11);
        assert!((p.tau - 0.1 / (2.0 * p.log_term)).abs() < 1e-15);
    }

    #[test]
    fn depends_on_product_only() {
        let a = FourierParams::choose(0.1, 0.5, 0.01).unwrap();
        let b = FourierParams::choose(0.1, 0.25, 0.02).unwrap();
        assert_eq!(a.big_m, b.big_m);
        assert_eq!(a.m0, b.m0);
    }

    #[test]
    fn halving_gap_quadruples_m() {
        let a = FourierParams::choose(0.1, 0.5, 0.01).unwrap();
        let b = FourierParams::choose(0.05, 0.5, 0.01).unwrap();
        assert!((b.big_m as i64 - 4 * a.big_m as i64).abs() <= 8);
        assert!(FourierParams::choose(0.0, 0.5, 0.01).is_err());
        assert_eq!(label_bits(3), 2);
        assert_eq!(label_bits(4), 2);
        assert_eq!(label_bits(5), 3);
    }
}
