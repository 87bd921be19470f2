use rand::Rng as _;

use crate::amplify::{fps_run, reduced_amplitude, Engine, FpsSchedule, StatePrep};
use crate::error::{invalid, Result};
use crate::ledger::ResourceLedger;
use crate::registers::{Condition, Projector, QState};
use crate::rng::Rng;
use crate::C64;

/// The operations the minimum-label search needs from a prepared state
/// `|0>_flags sum_j |j> |Phi_j> + |R>`.
pub trait BranchSearch {
    fn label_bits(&self) -> usize;
    /// One fixed-point search for `flags = 0` and the top `k` label bits equal
    /// to `prefix`, followed by a flag measurement.
    fn search(&mut self, prefix: usize, k: usize, schedule: &FpsSchedule, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<bool>;
    /// Measures the remaining label bits after the last successful search;
    /// returns the label and the normalized system state.
    fn measure_label(&mut self, rng: &mut Rng) -> Result<(usize, Vec<C64>)>;
    /// `||Phi_j||`, for reporting only.
    fn branch_norm(&self, j: usize) -> f64;
}

fn prefix_range(n: usize, k: usize, prefix: usize) -> (usize, usize) {
    let shift = n - k;
    (prefix << shift, (prefix + 1) << shift)
}

/// Draws an index with probability proportional to `weights`.
fn sample(weights: impl Iterator<Item = f64> + Clone, rng: &mut Rng) -> Option<usize> {
    let total: f64 = weights.clone().sum();
    if !(total > 0.0) {
        return None;
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = Some(i);
            acc += w;
            if u < acc {
                return Some(i);
            }
        }
    }
    last
}

/// Branches `Phi_j` stored explicitly; each search is tracked in its
/// two-dimensional invariant plane and charged `t` calls of the circuit.
#[derive(Clone, Debug)]
pub struct BranchTable {
    n: usize,
    dim: usize,
    /// Unnormalized `Phi_j`, row-major `labels x dim`.
    vectors: Vec<C64>,
    norms2: Vec<f64>,
    cumulative: Vec<f64>,
    call_cost: ResourceLedger,
    last: Option<(usize, usize)>,
}

impl BranchTable {
    pub fn new(n: usize, dim: usize, vectors: Vec<C64>, call_cost: ResourceLedger) -> Result<Self> {
        if vectors.len() != dim << n {
            return invalid(format!("branch table has {} entries, expected {}", vectors.len(), dim << n));
        }
        let norms2: Vec<f64> = vectors.chunks(dim).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
        let mut cumulative = Vec::with_capacity(norms2.len() + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in &norms2 {
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self { n, dim, vectors, norms2, cumulative, call_cost, last: None })
    }

    pub fn norms2(&self) -> &[f64] {
        &self.norms2
    }

    pub fn branch(&self, j: usize) -> &[C64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    pub fn prefix_mass(&self, prefix: usize, k: usize) -> f64 {
        let (lo, hi) = prefix_range(self.n, k, prefix);
        (self.cumulative[hi] - self.cumulative[lo]).max(0.0)
    }

    pub fn call_cost(&self) -> &ResourceLedger {
        &self.call_cost
    }
}

impl BranchSearch for BranchTable {
    fn label_bits(&self) -> usize {
        self.n
    }

    fn search(&mut self, prefix: usize, k: usize, schedule: &FpsSchedule, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<bool> {
        let amp = reduced_amplitude(self.prefix_mass(prefix, k).sqrt(), &schedule.phase_angles);
        ledger.charge_repeated(&self.call_cost, schedule.t);
        let ok = rng.gen::<f64>() < amp * amp;
        if ok {
            self.last = Some((prefix, k));
        }
        Ok(ok)
    }

    fn measure_label(&mut self, rng: &mut Rng) -> Result<(usize, Vec<C64>)> {
        let Some((prefix, k)) = self.last else {
            return invalid("no successful search to measure");
        };
        let (lo, hi) = prefix_range(self.n, k, prefix);
        let Some(i) = sample(self.norms2[lo..hi].iter().copied(), rng) else {
            return invalid("measured an empty branch");
        };
        let j = lo + i;
        let nrm = self.norms2[j].sqrt();
        Ok((j, self.branch(j).iter().map(|z| z / nrm).collect()))
    }

    fn branch_norm(&self, j: usize) -> f64 {
        self.norms2[j].sqrt()
    }
}

/// Searches run on the full register state of a circuit whose layout is
/// `(label, flags..., system)`.
pub struct LiteralSearch<'a> {
    prep: &'a dyn StatePrep,
    label: String,
    flags: Vec<String>,
    n: usize,
    last: Option<(QState, usize, usize)>,
}

impl<'a> LiteralSearch<'a> {
    pub fn new(prep: &'a dyn StatePrep, label: &str, flags: &[&str]) -> Result<Self> {
        let layout = prep.layout();
        let n = layout.registers()[layout.index_of(label)?].qubits;
        Ok(Self { prep, label: label.into(), flags: flags.iter().map(|s| s.to_string()).collect(), n, last: None })
    }

    fn projector(&self, prefix: usize, k: usize) -> Projector {
        let flags: Vec<&str> = self.flags.iter().map(|s| s.as_str()).collect();
        Projector::zeros(&flags).and(Condition::prefix(&self.label, self.n, k, prefix))
    }
}

impl BranchSearch for LiteralSearch<'_> {
    fn label_bits(&self) -> usize {
        self.n
    }

    fn search(&mut self, prefix: usize, k: usize, schedule: &FpsSchedule, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<bool> {
        let proj = self.projector(prefix, k);
        let out = fps_run(&Engine::Literal { prep: self.prep, flag: &proj }, schedule, ledger)?;
        let amp = out.target_amplitude;
        let ok = rng.gen::<f64>() < amp * amp;
        if ok {
            let s = QState::from_amplitudes(self.prep.layout().clone(), out.flagged, crate::registers::NormKind::Normalized)?;
            self.last = Some((s, prefix, k));
        }
        Ok(ok)
    }

    fn measure_label(&mut self, rng: &mut Rng) -> Result<(usize, Vec<C64>)> {
        let Some((s, prefix, k)) = self.last.take() else {
            return invalid("no successful search to measure");
        };
        let (lo, hi) = prefix_range(self.n, k, prefix);
        let probs = s.register_probabilities(&self.label)?;
        let Some(i) = sample(probs[lo..hi].iter().copied(), rng) else {
            return invalid("measured an empty branch");
        };
        let j = lo + i;
        let mut fixed: Vec<(&str, usize)> = self.flags.iter().map(|f| (f.as_str(), 0)).collect();
        fixed.push((&self.label, j));
        let (branch, nrm) = s.flagged_branch(&fixed)?;
        Ok((j, branch.into_amplitudes().into_iter().map(|z| z / nrm).collect()))
    }

    fn branch_norm(&self, j: usize) -> f64 {
        let mut s = QState::zero(self.prep.layout().clone());
        if self.prep.apply(&mut s, &mut ResourceLedger::new()).is_err() {
            return f64::NAN;
        }
        let mut fixed: Vec<(&str, usize)> = self.flags.iter().map(|f| (f.as_str(), 0)).collect();
        fixed.push((&self.label, j));
        s.flagged_branch(&fixed).map(|(_, n)| n).unwrap_or(f64::NAN)
    }
}
