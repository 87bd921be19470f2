use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Weights `alpha_k = 2^{-2m} C(2m, m+k)` for `|k| <= m0`, stored at `k + m0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    pub m: u64,
    pub m0: u64,
    pub alpha: Vec<f64>,
    pub alpha_sum: f64,
    /// `2 exp(-m0^2 / (4m))`.
    pub tail_bound: f64,
    /// Exact weight `sum_{|k| > m0} alpha_k` left out by the truncation.
    pub dropped: f64,
}

impl FourierCoefficients {
    pub fn new(m: u64, m0: u64) -> Result<Self> {
        if m0 < 1 || m0 > m {
            return invalid(format!("need 1 <= m0 <= m, got m0 = {m0}, m = {m}"));
        }
        // ln alpha_0 = sum_j ln((2j-1)/(2j))
        let ln_a0: f64 = (1..=m).map(|j| ((2 * j - 1) as f64 / (2 * j) as f64).ln()).sum();
        let mut half = Vec::with_capacity(m0 as usize + 1);
        let mut ln_a = ln_a0;
        half.push(ln_a0.exp());
        for k in 0..m0 {
            ln_a += ((m - k) as f64).ln() - ((m + k + 1) as f64).ln();
            half.push(ln_a.exp());
        }
        let mut dropped = 0.0;
        let mut k = m0;
        while k < m {
            ln_a += ((m - k) as f64).ln() - ((m + k + 1) as f64).ln();
            let a = ln_a.exp();
            dropped += 2.0 * a;
            if a < dropped * 1e-17 || a == 0.0 {
                break;
            }
            k += 1;
        }
        if half.iter().any(|a| !a.is_finite()) {
            return invalid("coefficient overflow");
        }
        let mut alpha: Vec<f64> = half[1..].iter().rev().copied().collect();
        alpha.extend_from_slice(&half);
        let alpha_sum = alpha.iter().sum();
        let tail_bound = 2.0 * (-((m0 * m0) as f64) / (4.0 * m as f64)).exp();
        Ok(Self { m, m0, alpha, alpha_sum, tail_bound, dropped })
    }

    pub fn get(&self, k: i64) -> f64 {
        self.alpha[(k + self.m0 as i64) as usize]
    }

    /// `sum_k alpha_k cos(2 h k)`, the truncated series at a scalar `h`.
    pub fn series(&self, h: f64) -> f64 {
        let m0 = self.m0 as usize;
        let c1 = (2.0 * h).cos();
        let (mut prev, mut cur) = (1.0, c1);
        let mut acc = 0.0;
        for k in 1..=m0 {
            acc += self.alpha[m0 + k] * cur;
            let next = 2.0 * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
        self.alpha[m0] + 2.0 * acc
    }

    /// `cos^{2m}(h)`, the untruncated series.
    pub fn full(&self, h: f64) -> f64 {
        h.cos().abs().powf(2.0 * self.m as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_tables() {
        let c = FourierCoefficients::new(1, 1).unwrap();
        for (a, b) in c.alpha.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
        let c = FourierCoefficients::new(2, 2).unwrap();
        for (a, b) in c.alpha.iter().zip([1.0 / 16.0, 0.25, 0.375, 0.25, 1.0 / 16.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((c.alpha_sum - 1.0).abs() < 1e-15);
        let c = FourierCoefficients::new(2, 1).unwrap();
        assert!((c.alpha_sum - 0.875).abs() < 1e-15);
        assert!((c.dropped - 0.125).abs() < 1e-15);
        assert!(1.0 - c.alpha_sum <= (-1.0f64 / 8.0).exp());
    }

    #[test]
    fn large_m_is_finite() {
        let c = FourierCoefficients::new(200_000, 3000).unwrap();
        assert!(c.alpha.iter().all(|a| *a > 0.0 && a.is_finite()));
        assert!(c.alpha_sum >= 1.0 - c.tail_bound);
    }

    proptest! {
        #[test]
        fn symmetric_and_complete(m in 1u64..300) {
            let c = FourierCoefficients::new(m, m).unwrap();
            prop_assert!((c.alpha_sum - 1.0).abs() < 1e-12);
            for k in 0..=m as i64 {
                prop_assert_eq!(c.get(k), c.get(-k));
            }
        }

        #[test]
        fn series_tracks_cos_power(m in 1u64..64, h in -1.5f64..1.5) {
            let full = FourierCoefficients::new(m, m).unwrap();
            prop_assert!((full.series(h) - h.cos().powi(2 * m as i32)).abs() < 1e-12);
            let m0 = (m / 2).max(1);
            let c = FourierCoefficients::new(m, m0).unwrap();
            prop_assert!((c.series(h) - h.cos().powi(2 * m as i32)).abs() <= c.dropped + 1e-12);
            prop_assert!(c.dropped <= c.tail_bound);
        }
    }
}
