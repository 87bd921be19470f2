use serde::{Deserialize, Serialize};

use super::{BranchSearch, LabelSearchParams};
use crate::error::Result;
use crate::ledger::ResourceLedger;
use crate::rng::Rng;
use crate::C64;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LabelSearchOutcome {
    pub success: bool,
    pub label: Option<usize>,
    /// `||Phi_j||` of the returned label.
    pub branch_norm: Option<f64>,
    #[serde(skip)]
    pub state: Option<Vec<C64>>,
    /// Digits fixed by the first stage.
    pub digits_found: usize,
    /// Whether the second stage was entered.
    pub backtracked: bool,
    pub searches: u32,
}

/// Tries `k_reps` searches for the prefix; with `all` every one must succeed,
/// otherwise the first success suffices. Stops early once the result is
/// decided.
fn repeat(
    engine: &mut dyn BranchSearch,
    prefix: usize,
    k: usize,
    all: bool,
    params: &LabelSearchParams,
    sched: &crate::amplify::FpsSchedule,
    rng: &mut Rng,
    ledger: &mut ResourceLedger,
    searches: &mut u32,
) -> Result<bool> {
    for _ in 0..params.k_reps {
        *searches += 1;
        let ok = engine.search(prefix, k, sched, rng, ledger)?;
        if all && !ok {
            return Ok(false);
        }
        if !all && ok {
            return Ok(true);
        }
    }
    Ok(all)
}

/// Binary digit search for the smallest label whose branch norm reaches
/// `zeta`, followed by backtracking when a digit is inconclusive.
pub fn min_label_find(engine: &mut dyn BranchSearch, params: &LabelSearchParams, rng: &mut Rng, ledger: &mut ResourceLedger) -> Result<LabelSearchOutcome> {
    let n = engine.label_bits();
    let sched = params.schedule()?;
    let mut out = LabelSearchOutcome::default();
    let mut a = 0usize;
    let mut found = 0usize;
    let mut complete = true;
    for k in 1..=n {
        let zero = a << 1;
        if repeat(engine, zero, k, true, params, &sched, rng, ledger, &mut out.searches)? {
            a = zero;
        } else if repeat(engine, zero | 1, k, true, params, &sched, rng, ledger, &mut out.searches)? {
            a = zero | 1;
        } else {
            complete = false;
            break;
        }
        found = k;
    }
    out.digits_found = found;
    if n == 0 {
        complete = false;
    }
    if !complete {
        out.backtracked = true;
        let mut hit = false;
        for l in (0..=found).rev() {
            let prefix = a >> (found - l);
            if repeat(engine, prefix, l, false, params, &sched, rng, ledger, &mut out.searches)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(out);
        }
    }
    let (j, state) = engine.measure_label(rng)?;
    out.success = true;
    out.label = Some(j);
    out.branch_norm = Some(engine.branch_norm(j));
    out.state = Some(state);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label_search::BranchTable;
    use crate::rng::stream;

    fn table(norms: &[f64]) -> BranchTable {
        let n = norms.len().trailing_zeros() as usize;
        let v: Vec<C64> = norms.iter().map(|x| C64::new(*x, 0.0)).collect();
        BranchTable::new(n, 1, v, ResourceLedger { trial_calls: 1, ..Default::default() }).unwrap()
    }

    #[test]
    fn two_bit_example() {
        let params = LabelSearchParams::new(2, 0.8, 0.05).unwrap();
        let mut hits = 0;
        for seed in 0..400 {
            let mut t = table(&[0.0, 0.0, 0.9, 0.3]);
            let mut rng = stream(seed, 3);
            let out = min_label_find(&mut t, &params, &mut rng, &mut ResourceLedger::new()).unwrap();
            if out.label == Some(2) {
                hits += 1;
            }
        }
        assert!(hits as f64 / 400.0 >= 1.0 - 5.0 * 0.05);
    }

    #[test]
    fn single_candidate() {
        let zeta = 0.7;
        let params = LabelSearchParams::new(1, zeta, 0.05).unwrap();
        for seed in 0..50 {
            let mut t = table(&[zeta, 0.0]);
            let out = min_label_find(&mut t, &params, &mut stream(seed, 3), &mut ResourceLedger::new()).unwrap();
            assert_eq!(out.label, Some(0));
        }
    }

    #[test]
    fn zero_branches_never_returned() {
        let params = LabelSearchParams::new(3, 0.3, 0.04).unwrap();
        let norms = [0.0, 0.0, 0.0, 0.05, 0.5, 0.2, 0.6, 0.58];
        for seed in 0..200 {
            let mut t = table(&norms);
            let out = min_label_find(&mut t, &params, &mut stream(seed, 3), &mut ResourceLedger::new()).unwrap();
            if let Some(j) = out.label {
                assert!(j >= 3);
                assert!(norms[j] > 0.0);
            }
        }
    }
}
