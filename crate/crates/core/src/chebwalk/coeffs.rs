use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lcu::FourierCoefficients;

/// Coefficients of `(1 - x^2)^M = sum_{k=0}^M alpha_k T_{2k}(x)`, truncated at
/// `m0`: `alpha_0 = 4^-M C(2M, M)`, `alpha_k = (-1)^k 2^{1-2M} C(2M, M+k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebCoefficients {
    pub big_m: u64,
    pub m0: u64,
    pub alpha: Vec<f64>,
    /// `sum |alpha_k|` over the kept terms.
    pub alpha_sum: f64,
    /// `2 exp(-m0^2 / (2M))`.
    pub tail_bound: f64,
    /// Exact `sum_{k > m0} |alpha_k|`.
    pub dropped: f64,
}

impl ChebCoefficients {
    pub fn new(big_m: u64, m0: u64) -> Result<Self> {
        // same binomial weights as the cosine series with m = M
        let f = FourierCoefficients::new(big_m, m0)?;
        let alpha: Vec<f64> = (0..=m0 as i64)
            .map(|k| {
                let a = f.get(k);
                match k {
                    0 => a,
                    _ if k % 2 == 1 => -2.0 * a,
                    _ => 2.0 * a,
                }
            })
            .collect();
        let alpha_sum = alpha.iter().map(|a| a.abs()).sum();
        let tail_bound = 2.0 * (-((m0 * m0) as f64) / (2.0 * big_m as f64)).exp();
        Ok(Self { big_m, m0, alpha, alpha_sum, tail_bound, dropped: f.dropped })
    }

    /// `sum_k alpha_k T_{2k}(x)` for `|x| <= 1`.
    pub fn series(&self, x: f64) -> f64 {
        let y = 2.0 * x * x - 1.0;
        let (mut prev, mut cur) = (1.0, y);
        let mut acc = self.alpha[0];
        for a in &self.alpha[1..] {
            acc += a * cur;
            let next = 2.0 * y * cur - prev;
            prev = cur;
            cur = next;
        }
        acc
    }

    pub fn full(&self, x: f64) -> f64 {
        (1.0 - x * x).powf(self.big_m as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn double_factorial_form(big_m: u64) -> f64 {
        // 2^{1-2M} C(2M, M) - (2M-1)!!/(2^M M!)
        let mut c = 1.0;
        for j in 1..=big_m {
            c *= (big_m + j) as f64 / j as f64;
        }
        let mut df = 1.0;
        for j in 1..=big_m {
            df *= (2 * j - 1) as f64 / (2 * j) as f64;
        }
        2.0 * c / 4f64.powi(big_m as i32) - df
    }

    #[test]
    fn small_tables() {
        let c = ChebCoefficients::new(1, 1).unwrap();
        assert_eq!(c.alpha, vec![0.5, -0.5]);
        let c = ChebCoefficients::new(2, 2).unwrap();
        for (a, b) in c.alpha.iter().zip([0.375, -0.5, 0.125]) {
            assert!((a - b).abs() < 1e-15);
        }
        for big_m in 1..30 {
            let c = ChebCoefficients::new(big_m, big_m).unwrap();
            assert!((c.alpha[0] - double_factorial_form(big_m)).abs() < 1e-14);
        }
        for i in 0..=40 {
            let x = -1.0 + 0.05 * i as f64;
            assert!((ChebCoefficients::new(1, 1).unwrap().series(x) - (1.0 - x * x)).abs() < 1e-12);
            assert!((c_two().series(x) - (1.0 - x * x).powi(2)).abs() < 1e-12);
        }
    }

    fn c_two() -> ChebCoefficients {
        ChebCoefficients::new(2, 2).unwrap()
    }

    proptest! {
        #[test]
        fn reconstructs_and_alternates(big_m in 1u64..80, x in -1.0f64..1.0) {
            let c = ChebCoefficients::new(big_m, big_m).unwrap();
            prop_assert!((c.series(x) - c.full(x)).abs() < 1e-10);
            for k in 1..c.alpha.len() {
                prop_assert!(c.alpha[k] * c.alpha[k - 1] < 0.0);
            }
            let m0 = (big_m / 3).max(1);
            let t = ChebCoefficients::new(big_m, m0).unwrap();
            prop_assert!((t.series(x) - c.full(x)).abs() <= t.dropped + 1e-12);
            prop_assert!(t.dropped <= t.tail_bound);
        }
    }
}
