use serde::{Deserialize, Serialize};
use std::ops::AddAssign;

/// Per-run resource counters. Hamiltonian-simulation time is in units of the
/// simulation cost per unit time; trial calls count uses of the trial-state
/// preparation circuit (or its inverse).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub hamsim_time: f64,
    pub trial_calls: u64,
    pub walk_steps: u64,
    pub elementary_gate_proxy: u64,
    pub qubits_peak: u32,
}

impl ResourceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge_time(&mut self, t: f64) {
        self.hamsim_time += t.abs();
    }

    pub fn charge_trial(&mut self, calls: u64) {
        self.trial_calls += calls;
    }

    pub fn charge_walk(&mut self, steps: u64) {
        self.walk_steps += steps;
    }

    pub fn charge_gates(&mut self, gates: u64) {
        self.elementary_gate_proxy += gates;
    }

    pub fn note_qubits(&mut self, qubits: usize) {
        self.qubits_peak = self.qubits_peak.max(qubits as u32);
    }

    /// Adds `times` copies of `unit` (counters only; the qubit peak is merged).
    pub fn charge_repeated(&mut self, unit: &ResourceLedger, times: u64) {
        self.hamsim_time += unit.hamsim_time * times as f64;
        self.trial_calls += unit.trial_calls * times;
        self.walk_steps += unit.walk_steps * times;
        self.elementary_gate_proxy += unit.elementary_gate_proxy * times;
        self.qubits_peak = self.qubits_peak.max(unit.qubits_peak);
    }
}

impl AddAssign<&ResourceLedger> for ResourceLedger {
    fn add_assign(&mut self, rhs: &ResourceLedger) {
        self.charge_repeated(rhs, 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_charges_add_absolute_values() {
        let mut l = ResourceLedger::new();
        for t in [1.5, -2.25, 0.0, 3.0] {
            l.charge_time(t);
        }
        assert_eq!(l.hamsim_time, 6.75);
    }

    #[test]
    fn repeated_charge_scales_counters() {
        let unit = ResourceLedger {
            hamsim_time: 2.0,
            trial_calls: 1,
            walk_steps: 3,
            elementary_gate_proxy: 5,
            qubits_peak: 7,
        };
        let mut l = ResourceLedger::new();
        l.charge_repeated(&unit, 4);
        assert_eq!(l.hamsim_time, 8.0);
        assert_eq!(l.trial_calls, 4);
        assert_eq!(l.walk_steps, 12);
        assert_eq!(l.elementary_gate_proxy, 20);
        assert_eq!(l.qubits_peak, 7);
    }
}
