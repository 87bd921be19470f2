use rand::Rng as _;

use super::schedule::FpsSchedule;
use crate::error::{invalid, Result};
use crate::ledger::ResourceLedger;
use crate::registers::{Projector, QState, RegisterLayout};
use crate::rng::Rng;
use crate::C64;

/// Smallest `lambda'` tried by [`overlap_doubling_fps`] by default.
pub const DEFAULT_LAMBDA_FLOOR: f64 = 1.0 / 4096.0;

/// A state-preparation circuit `C` acting on the all-zeros state of its layout.
pub trait StatePrep {
    fn layout(&self) -> &RegisterLayout;
    fn apply(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()>;
    fn apply_inverse(&self, s: &mut QState, ledger: &mut ResourceLedger) -> Result<()>;
}

/// The two quantities amplification depends on: the flagged-branch norm of
/// `C|0>` and the normalized flagged branch, plus the cost of one call of `C`.
#[derive(Clone, Debug)]
pub struct PreparedBranch {
    pub lambda: f64,
    pub state: Vec<C64>,
    pub call_cost: ResourceLedger,
}

impl PreparedBranch {
    /// Runs `prep` once on a scratch ledger and extracts the flagged branch on
    /// the registers not named in `flag_regs` (each fixed to zero).
    pub fn from_prep(prep: &dyn StatePrep, flag_regs: &[&str]) -> Result<Self> {
        let mut cost = ResourceLedger::new();
        let mut s = QState::zero(prep.layout().clone());
        prep.apply(&mut s, &mut cost)?;
        let fixed: Vec<(&str, usize)> = flag_regs.iter().map(|r| (*r, 0)).collect();
        let (branch, lambda) = s.flagged_branch(&fixed)?;
        let mut state = branch.into_amplitudes();
        if lambda > 0.0 {
            state.iter_mut().for_each(|z| *z /= lambda);
        }
        Ok(Self { lambda, state, call_cost: cost })
    }
}

/// How an amplification is carried out.
pub enum Engine<'a> {
    /// Every reflection is applied to the full register state.
    Literal { prep: &'a dyn StatePrep, flag: &'a Projector },
    /// The evolution stays in the plane spanned by the flagged and unflagged
    /// parts of `C|0>`; it is tracked there exactly and each call of `C` is
    /// charged at its measured cost.
    Reduced(&'a PreparedBranch),
}

#[derive(Clone, Debug)]
pub struct AmplifyOutcome {
    /// Normalized flagged branch after amplification (on the full layout for
    /// the literal engine, on the unflagged registers for the reduced one).
    pub flagged: Vec<C64>,
    /// Exact norm of the flagged component before measurement.
    pub target_amplitude: f64,
    pub calls_c: u64,
    pub success: bool,
    /// Number of schedules (rungs or rounds) that were run.
    pub rounds: u32,
}

/// Final flagged amplitude when `C|0>` has flagged norm `lambda`, tracked in
/// the plane of the flagged and unflagged components.
pub fn reduced_amplitude(lambda: f64, angles: &[(f64, f64)]) -> f64 {
    let lam = lambda.clamp(0.0, 1.0);
    let mu = (1.0 - lam * lam).sqrt();
    let (mut a, mut c) = (C64::new(lam, 0.0), C64::new(mu, 0.0));
    for &(alpha, beta) in angles {
        a *= C64::from_polar(1.0, beta);
        let proj = a * lam + c * mu;
        let f = (C64::new(1.0, 0.0) - C64::from_polar(1.0, -alpha)) * proj;
        a = -(a - f * lam);
        c = -(c - f * mu);
    }
    a.norm()
}

/// Generic amplification step `psi <- -S_s(alpha) S_T(beta) psi`, `iters`
/// times, after one initial call of `C`.
fn run_sequence(engine: &Engine, angles: &[(f64, f64)], ledger: &mut ResourceLedger) -> Result<(Vec<C64>, f64, u64)> {
    let calls = 1 + 2 * angles.len() as u64;
    match engine {
        Engine::Literal { prep, flag } => {
            let mut s = QState::zero(prep.layout().clone());
            prep.apply(&mut s, ledger)?;
            for &(alpha, beta) in angles {
                s.phase_on(flag, C64::from_polar(1.0, beta))?;
                prep.apply_inverse(&mut s, ledger)?;
                s.amplitudes_mut()[0] *= C64::from_polar(1.0, -alpha);
                prep.apply(&mut s, ledger)?;
                s.amplitudes_mut().iter_mut().for_each(|z| *z = -*z);
            }
            let amp = s.projected_norm(flag)?;
            s.project(flag)?;
            let mut v = s.into_amplitudes();
            if amp > 0.0 {
                v.iter_mut().for_each(|z| *z /= amp);
            }
            Ok((v, amp, calls))
        }
        Engine::Reduced(b) => {
            ledger.charge_repeated(&b.call_cost, calls);
            Ok((b.state.clone(), reduced_amplitude(b.lambda, angles), calls))
        }
    }
}

/// Runs the schedule once. `success` reports whether the contract
/// `amplitude^2 >= 1 - delta^2` is met; no measurement is made.
pub fn fps_run(engine: &Engine, schedule: &FpsSchedule, ledger: &mut ResourceLedger) -> Result<AmplifyOutcome> {
    if schedule.phase_angles.len() as u64 * 2 + 1 != schedule.t {
        return invalid(format!("schedule has {} angle pairs for t = {}", schedule.phase_angles.len(), schedule.t));
    }
    let (flagged, amp, calls) = run_sequence(engine, &schedule.phase_angles, ledger)?;
    Ok(AmplifyOutcome {
        flagged,
        target_amplitude: amp,
        calls_c: calls,
        success: amp * amp >= 1.0 - schedule.delta * schedule.delta,
        rounds: 1,
    })
}

fn measure_flag(amp: f64, rng: &mut Rng) -> bool {
    rng.gen::<f64>() < amp * amp
}

/// Fixed-point search with `lambda' = 1, 1/2, 1/4, ...` until the flag
/// measurement succeeds or `lambda'` drops below `floor`.
pub fn overlap_doubling_fps(
    engine: &Engine,
    delta: f64,
    floor: f64,
    rng: &mut Rng,
    ledger: &mut ResourceLedger,
) -> Result<AmplifyOutcome> {
    let mut lp = 1.0;
    let mut calls = 0;
    let mut rounds = 0;
    let mut last = None;
    while lp >= floor {
        let sched = FpsSchedule::new(lp, delta)?;
        let (flagged, amp, c) = run_sequence(engine, &sched.phase_angles, ledger)?;
        calls += c;
        rounds += 1;
        if measure_flag(amp, rng) {
            return Ok(AmplifyOutcome { flagged, target_amplitude: amp, calls_c: calls, success: true, rounds });
        }
        last = Some((flagged, amp));
        lp /= 2.0;
    }
    let (flagged, amp) = last.unwrap_or_default();
    Ok(AmplifyOutcome { flagged, target_amplitude: amp, calls_c: calls, success: false, rounds })
}

/// Growth factor of the randomized Grover counts.
const GROWTH: f64 = 1.2;

/// Amplitude amplification without knowledge of the overlap: round `r` draws
/// `j` uniformly below `ceil(1.2^r)`, applies `j` Grover iterations and
/// measures the flag.
pub fn amplitude_amplify_unknown(
    engine: &Engine,
    rng: &mut Rng,
    max_rounds: u32,
    ledger: &mut ResourceLedger,
) -> Result<AmplifyOutcome> {
    let pi = std::f64::consts::PI;
    let mut calls = 0;
    let mut last = None;
    for r in 0..max_rounds {
        let m = GROWTH.powi(r as i32).ceil() as u64;
        let j = rng.gen_range(0..m);
        let angles = vec![(pi, pi); j as usize];
        let (flagged, amp, c) = run_sequence(engine, &angles, ledger)?;
        calls += c;
        if measure_flag(amp, rng) {
            return Ok(AmplifyOutcome { flagged, target_amplitude: amp, calls_c: calls, success: true, rounds: r + 1 });
        }
        last = Some((flagged, amp));
    }
    let (flagged, amp) = last.unwrap_or_default();
    Ok(AmplifyOutcome { flagged, target_amplitude: amp, calls_c: calls, success: false, rounds: max_rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplify::{fps_success_closed_form, fps_success_probability};
    use crate::rng::stream;
    use nalgebra::DMatrix;

    /// Rotation by `asin(lambda)` on a single qubit `f`, with the target at
    /// `f = 0` and a spectator qubit `s` put in `|+>` to make the target
    /// two-dimensional when `wide` is set.
    struct Rot {
        layout: RegisterLayout,
        u: DMatrix<C64>,
        wide: bool,
    }

    impl Rot {
        fn new(lambda: f64, wide: bool) -> Self {
            let mu = (1.0 - lambda * lambda).sqrt();
            let c = |x: f64| C64::new(x, 0.0);
            let u = DMatrix::from_row_slice(2, 2, &[c(lambda), c(-mu), c(mu), c(lambda)]);
            let layout = RegisterLayout::new(&[("f", 1), ("s", 1)]).unwrap();
            Self { layout, u, wide }
        }
        fn hadamard() -> DMatrix<C64> {
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            DMatrix::from_row_slice(2, 2, &[h, h, h, -h])
        }
    }

    impl StatePrep for Rot {
        fn layout(&self) -> &RegisterLayout {
            &self.layout
        }
        fn apply(&self, s: &mut QState, l: &mut ResourceLedger) -> Result<()> {
            l.charge_trial(1);
            if self.wide {
                s.apply_on_register("s", &Self::hadamard())?;
            }
            s.apply_on_register("f", &self.u)
        }
        fn apply_inverse(&self, s: &mut QState, l: &mut ResourceLedger) -> Result<()> {
            l.charge_trial(1);
            s.apply_on_register("f", &self.u.adjoint())?;
            if self.wide {
                s.apply_on_register("s", &Self::hadamard())?;
            }
            Ok(())
        }
    }

    fn flag() -> Projector {
        Projector::zeros(&["f"])
    }

    fn literal_amp(lambda: f64, sched: &FpsSchedule, wide: bool) -> f64 {
        let prep = Rot::new(lambda, wide);
        let f = flag();
        let eng = Engine::Literal { prep: &prep, flag: &f };
        let mut l = ResourceLedger::new();
        let out = fps_run(&eng, sched, &mut l).unwrap();
        assert_eq!(l.trial_calls, sched.t);
        out.target_amplitude
    }

    #[test]
    fn literal_matches_closed_form_on_grid() {
        for &delta in &[0.3, 0.1, 0.03] {
            for &lp in &[0.1, 0.3, 0.5] {
                let sched = FpsSchedule::new(lp, delta).unwrap();
                for i in 1..=19 {
                    let lambda = 0.05 * i as f64;
                    let a = literal_amp(lambda, &sched, false);
                    let p = fps_success_closed_form(lambda, lp, delta);
                    assert!((a * a - p).abs() < 1e-8, "lambda {lambda} lp {lp} delta {delta}: {} vs {p}", a * a);
                }
            }
        }
    }

    #[test]
    fn reduced_engine_matches_literal_for_wide_target() {
        let sched = FpsSchedule::new(0.3, 0.1).unwrap();
        for &lambda in &[0.1, 0.35, 0.8] {
            let prep = Rot::new(lambda, true);
            let b = PreparedBranch::from_prep(&prep, &["f"]).unwrap();
            assert!((b.lambda - lambda).abs() < 1e-12);
            let mut l = ResourceLedger::new();
            let out = fps_run(&Engine::Reduced(&b), &sched, &mut l).unwrap();
            assert_eq!(l.trial_calls, sched.t);
            assert!((out.target_amplitude - literal_amp(lambda, &sched, true)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_prep_is_a_fixed_point() {
        let sched = FpsSchedule::new(1.0, 0.2).unwrap();
        let a = literal_amp(1.0, &sched, false);
        assert!(a >= (1.0 - 0.04f64).sqrt());
    }

    #[test]
    fn unknown_amplitude_basic_cases() {
        let b1 = PreparedBranch { lambda: 1.0, state: vec![C64::new(1.0, 0.0)], call_cost: ResourceLedger { trial_calls: 1, ..Default::default() } };
        let mut rng = stream(1, 0);
        let out = amplitude_amplify_unknown(&Engine::Reduced(&b1), &mut rng, 50, &mut ResourceLedger::new()).unwrap();
        assert!(out.success);
        assert_eq!(out.calls_c, 1);
        let b0 = PreparedBranch { lambda: 0.0, ..b1.clone() };
        let out = amplitude_amplify_unknown(&Engine::Reduced(&b0), &mut rng, 30, &mut ResourceLedger::new()).unwrap();
        assert!(!out.success);
        assert_eq!(out.rounds, 30);
    }

    #[test]
    fn unknown_amplitude_mean_calls() {
        let b = PreparedBranch { lambda: 0.1, state: vec![C64::new(1.0, 0.0)], call_cost: ResourceLedger::new() };
        let mut total = 0;
        for seed in 0..500 {
            let mut rng = stream(seed, 3);
            let out = amplitude_amplify_unknown(&Engine::Reduced(&b), &mut rng, 200, &mut ResourceLedger::new()).unwrap();
            assert!(out.success);
            total += out.calls_c;
        }
        let mean = total as f64 / 500.0;
        assert!((5.0..=30.0).contains(&mean), "mean calls {mean}");
    }

    #[test]
    fn doubling_engines_agree_and_residual_is_rung_independent() {
        let prep = Rot::new(0.6, true);
        let f = flag();
        let b = PreparedBranch::from_prep(&prep, &["f"]).unwrap();
        let mut rungs = std::collections::BTreeSet::new();
        let mut first: Option<Vec<C64>> = None;
        for seed in 0..40 {
            let mut r1 = stream(seed, 3);
            let mut r2 = stream(seed, 3);
            let lit = overlap_doubling_fps(&Engine::Literal { prep: &prep, flag: &f }, 0.1, 1e-3, &mut r1, &mut ResourceLedger::new()).unwrap();
            let red = overlap_doubling_fps(&Engine::Reduced(&b), 0.1, 1e-3, &mut r2, &mut ResourceLedger::new()).unwrap();
            assert_eq!(lit.rounds, red.rounds);
            assert_eq!(lit.calls_c, red.calls_c);
            assert!((lit.target_amplitude - red.target_amplitude).abs() < 1e-12);
            rungs.insert(lit.rounds);
            // literal branch lives on (f, s) with f = 0: its first two entries
            let v = lit.flagged[..2].to_vec();
            if let Some(w) = &first {
                let ov: C64 = w.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                assert!((ov.norm() - 1.0).abs() < 1e-10);
            } else {
                first = Some(v);
            }
        }
        assert!(rungs.len() >= 1);
        for lp in [1.0, 0.5] {
            let t = FpsSchedule::calls_for(lp, 0.1);
            if 0.6 >= lp {
                assert!(fps_success_probability(0.6, t, 0.1) >= 0.99);
            }
        }
    }

    #[test]
    fn bounds_hold_pointwise() {
        for &delta in &[0.3, 0.1, 0.03] {
            for &lp in &[0.1, 0.3, 0.5] {
                for i in 0..=100 {
                    let lambda = i as f64 / 100.0;
                    let p = fps_success_closed_form(lambda, lp, delta);
                    if lambda >= lp {
                        assert!(p >= 1.0 - delta * delta - 1e-12);
                    } else {
                        assert!(p.sqrt() < 2.0 * lambda / lp * (2.0 / delta).ln() || lambda == 0.0);
                    }
                }
            }
        }
    }
}
