use rustfft::{FftDirection, FftPlanner};

use crate::error::Result;
use crate::registers::QState;
use crate::C64;

/// Normalized Walsh-Hadamard transform in place.
pub(crate) fn fwht(v: &mut [C64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (n as f64).sqrt();
    v.iter_mut().for_each(|z| *z *= s);
}

/// Hadamard on every qubit of `reg`.
pub(crate) fn fwht_register(s: &mut QState, reg: &str) -> Result<()> {
    s.for_each_fiber(reg, |_, f| fwht(f))
}

/// `|y> -> 2^{-k/2} sum_x exp(2 pi i xy/2^k)|x>` on `reg`, or its inverse.
pub(crate) fn qft_register(s: &mut QState, reg: &str, inverse: bool) -> Result<()> {
    let d = s.layout().reg_dim(s.layout().index_of(reg)?);
    let dir = if inverse { FftDirection::Forward } else { FftDirection::Inverse };
    let fft = FftPlanner::new().plan_fft(d, dir);
    let scale = 1.0 / (d as f64).sqrt();
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    s.for_each_fiber(reg, |_, f| {
        fft.process_with_scratch(f, &mut scratch);
        f.iter_mut().for_each(|z| *z *= scale);
    })
}

/// QFT of a basis state `|y>` on `bits` qubits.
pub(crate) fn qft_basis(y: usize, bits: usize) -> Vec<C64> {
    let d = 1usize << bits;
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[y] = C64::new(1.0, 0.0);
    let fft = FftPlanner::new().plan_fft(d, FftDirection::Inverse);
    fft.process(&mut v);
    let scale = 1.0 / (d as f64).sqrt();
    v.iter_mut().for_each(|z| *z *= scale);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::{NormKind, RegisterLayout};
    use std::f64::consts::PI;

    #[test]
    fn qft_matches_definition_and_inverts() {
        let v = qft_basis(3, 3);
        for (x, z) in v.iter().enumerate() {
            let want = C64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * 3.0 * x as f64 / 8.0);
            assert!((z - want).norm() < 1e-12);
        }
        let layout = RegisterLayout::new(&[("a", 3), ("b", 1)]).unwrap();
        let amps: Vec<C64> = (0..16).map(|i| C64::new(i as f64, 0.5 * i as f64)).collect();
        let mut s = QState::from_amplitudes(layout, amps.clone(), NormKind::Subnormalized).unwrap();
        qft_register(&mut s, "a", false).unwrap();
        qft_register(&mut s, "a", true).unwrap();
        for (a, b) in s.amplitudes().iter().zip(&amps) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn hadamard_is_involution() {
        let mut v: Vec<C64> = (0..8).map(|i| C64::new(i as f64, 1.0)).collect();
        let w = v.clone();
        fwht(&mut v);
        assert!((v[0] - C64::new(28.0 / 8f64.sqrt(), 8.0 / 8f64.sqrt())).norm() < 1e-12);
        fwht(&mut v);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
