use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Smallest number of calls used by a fixed-point schedule.
pub const MIN_CALLS: u64 = 5;

/// Chebyshev polynomial of the first kind for real order and argument,
/// `cos(n acos x)` inside `[-1, 1]`, the hyperbolic form outside.
pub fn chebyshev_t(n: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (n * x.acos()).cos()
    } else if x > 1.0 {
        (n * x.acosh()).cosh()
    } else {
        // integer order only: T_n(-x) = (-1)^n T_n(x)
        let sign = if (n.round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
        sign * (n * (-x).acosh()).cosh()
    }
}

/// `1 - delta^2 T_t(T_{1/t}(1/delta) sqrt(1 - lambda^2))^2` for an explicit
/// number of calls `t`.
pub fn fps_success_probability(lambda: f64, t: u64, delta: f64) -> f64 {
    let t = t as f64;
    let inner = chebyshev_t(1.0 / t, 1.0 / delta) * (1.0 - lambda * lambda).max(0.0).sqrt();
    let v = delta * chebyshev_t(t, inner);
    (1.0 - v * v).clamp(0.0, 1.0)
}

/// Success probability after the schedule chosen for `(lambda_prime, delta)`.
pub fn fps_success_closed_form(lambda: f64, lambda_prime: f64, delta: f64) -> f64 {
    let t = FpsSchedule::calls_for(lambda_prime, delta);
    fps_success_probability(lambda, t, delta)
}

/// Phase schedule of the fixed-point search with `t = 2l + 1` calls of the
/// state preparation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpsSchedule {
    pub lambda_prime: f64,
    pub delta: f64,
    pub t: u64,
    /// `(alpha_j, beta_j)` for `j = 1..=l`.
    pub phase_angles: Vec<(f64, f64)>,
}

impl FpsSchedule {
    /// `ceil(ln(2/delta)/lambda')`, raised to at least [`MIN_CALLS`] and made odd.
    pub fn calls_for(lambda_prime: f64, delta: f64) -> u64 {
        let t = ((2.0 / delta).ln() / lambda_prime).ceil().max(1.0) as u64;
        let t = t.max(MIN_CALLS);
        if t % 2 == 0 {
            t + 1
        } else {
            t
        }
    }

    pub fn new(lambda_prime: f64, delta: f64) -> Result<Self> {
        if !(lambda_prime > 0.0 && lambda_prime <= 1.0) {
            return invalid(format!("lambda' = {lambda_prime} outside (0, 1]"));
        }
        let mut s = Self::with_calls(Self::calls_for(lambda_prime, delta), delta)?;
        s.lambda_prime = lambda_prime;
        Ok(s)
    }

    /// Schedule with an explicit odd number of calls.
    pub fn with_calls(t: u64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("delta = {delta} outside (0, 1)"));
        }
        if t % 2 == 0 {
            return invalid(format!("schedule needs an odd number of calls, got {t}"));
        }
        let l = (t - 1) / 2;
        let tf = t as f64;
        let gamma_inv = chebyshev_t(1.0 / tf, 1.0 / delta);
        let s = (1.0 - 1.0 / (gamma_inv * gamma_inv)).max(0.0).sqrt();
        let alpha = |j: u64| {
            let x = (2.0 * std::f64::consts::PI * j as f64 / tf).tan() * s;
            2.0 * (1.0 / x).atan()
        };
        let phase_angles = (1..=l).map(|j| (alpha(j), -alpha(l - j + 1))).collect();
        let lambda_prime = (2.0 / delta).ln() / tf;
        Ok(Self { lambda_prime, delta, t, phase_angles })
    }

    pub fn iterations(&self) -> usize {
        self.phase_angles.len()
    }
}
