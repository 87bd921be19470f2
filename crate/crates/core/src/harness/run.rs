use std::time::Instant;

use rayon::prelude::*;

use super::{ExperimentConfig, Method, ReportRow};
use crate::baselines::{
    filtering_estimate, filtering_prepare, pea_estimate_energy, pea_prepare, FilterMode, FilterPrepareConfig,
    PeaPrepareConfig, PeaTarget,
};
use crate::chebwalk::{prepare_ground_cheb, prepare_ground_cheb_unknown, ChebConfig};
use crate::error::{invalid, Result};
use crate::label_search::{
    combined_prepare, estimate_ground_energy, prepare_ground_unknown_energy, EstimateVariant, UnknownEnergyConfig,
};
use crate::lcu::{prepare_ground_known_energy, KnownEnergyConfig};
use crate::result::RunResult;
use crate::spectra::{build_hamiltonian, make_trial_state, SpectralOracle};

/// One run at a sweep point. The run seed is `seed + trial`.
pub fn run_single(cfg: &ExperimentConfig, value: Option<f64>, trial: usize) -> Result<RunResult> {
    let (spec, overlap, p) = cfg.at(value, trial)?;
    let seed = cfg.seed.wrapping_add(trial as u64);
    let h = build_hamiltonian(&spec)?;
    let trial_state = make_trial_state(&h, overlap, seed)?;
    let oracle = SpectralOracle::new(&h);
    let delta_lb = p.delta_lb.unwrap_or(h.gap);
    let chi = p.chi.unwrap_or(overlap);
    let eps = p.eps;
    let guess = p.energy.unwrap_or(h.ground_energy() - p.energy_guess_error);
    let xi = || p.xi.ok_or_else(|| crate::Error::InvalidParameter("this method needs xi".into()));
    let kappa = || p.kappa.ok_or_else(|| crate::Error::InvalidParameter("this method needs kappa".into()));
    let unknown = || {
        let mut u = UnknownEnergyConfig::new(delta_lb, chi, eps);
        u.grid_cap = p.grid_cap;
        u.literal = p.literal;
        u.qubit_cap = cfg.qubit_cap;
        u
    };
    let filter = || {
        let mut f = FilterPrepareConfig::new(delta_lb, chi, eps);
        f.mode = p.mode;
        f
    };
    let mut r = match cfg.method {
        Method::LcuFourier => {
            let mut k = KnownEnergyConfig::new(delta_lb, chi, eps, guess);
            k.mode = p.mode;
            k.qubit_cap = cfg.qubit_cap;
            prepare_ground_known_energy(&oracle, &trial_state, &k, seed)?
        }
        Method::Grid => prepare_ground_unknown_energy(&oracle, &trial_state, &unknown(), seed)?,
        Method::Combined => combined_prepare(&oracle, &trial_state, &unknown(), kappa()?, seed)?,
        Method::GridEstimate => estimate_ground_energy(&oracle, &trial_state, xi()?, EstimateVariant::Grid, &unknown(), seed)?,
        Method::CombinedEstimate => {
            estimate_ground_energy(&oracle, &trial_state, xi()?, EstimateVariant::Combined(kappa()?), &unknown(), seed)?
        }
        Method::Pea | Method::PeaUnknown => {
            let mut c = PeaPrepareConfig::new(delta_lb, chi, eps);
            c.mode = p.mode;
            c.qubit_cap = cfg.qubit_cap;
            let target = if cfg.method == Method::Pea { PeaTarget::Known(guess) } else { PeaTarget::Unknown };
            pea_prepare(&oracle, &trial_state, target, &c, seed)?
        }
        Method::PeaEstimate => pea_estimate_energy(&oracle, &trial_state, chi, xi()?, seed)?,
        Method::Filter => filtering_prepare(&oracle, &trial_state, FilterMode::Known(guess), &filter(), seed)?,
        Method::FilterUnknown => filtering_prepare(&oracle, &trial_state, FilterMode::Unknown, &filter(), seed)?,
        Method::FilterCombined => filtering_prepare(&oracle, &trial_state, FilterMode::Combined(kappa()?), &filter(), seed)?,
        Method::FilterEstimate => filtering_estimate(&oracle, &trial_state, chi, xi()?, seed)?,
        Method::Chebwalk => {
            let mut c = ChebConfig::new(delta_lb, chi, eps, guess);
            c.mode = p.mode;
            c.sparsity = p.sparsity;
            prepare_ground_cheb(&h, &trial_state, &c, seed)?
        }
        Method::ChebwalkGrid => prepare_ground_cheb_unknown(&h, &trial_state, delta_lb, chi, eps, seed)?,
    };
    r.delta_lb.get_or_insert(delta_lb);
    r.chi.get_or_insert(chi);
    if let Some(x) = p.xi {
        r.xi.get_or_insert(x);
    }
    if let Some(k) = p.kappa {
        r.kappa.get_or_insert(k);
    }
    Ok(r)
}

/// All rows of an experiment, ordered by sweep point then trial. Failing runs
/// give rows with `success = false`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let jobs: Vec<(Option<f64>, usize)> =
        cfg.points().into_iter().flat_map(|v| (0..cfg.trials).map(move |t| (v, t))).collect();
    // surface configuration errors before spending time on the batch
    if let Some(&(v, t)) = jobs.first() {
        cfg.at(v, t)?;
        build_hamiltonian(&cfg.at(v, t)?.0)?;
    }
    let rows = jobs
        .par_iter()
        .map(|&(v, t)| {
            let start = Instant::now();
            let res = run_single(cfg, v, t);
            let ms = if cfg.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            match res {
                Ok(mut r) => {
                    r.wall_ms = ms;
                    ReportRow::from_result(cfg.method.name(), &r)
                }
                Err(e) => ReportRow::failed(cfg, v, t, &e.to_string()),
            }
        })
        .collect();
    Ok(rows)
}

/// Runs inside a pool with `threads` workers (0 = rayon default).
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ReportRow>> {
    if threads == 0 {
        return run_experiment(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| crate::Error::InvalidParameter(e.to_string()));
    match pool {
        Ok(pool) => pool.install(|| run_experiment(cfg)),
        Err(e) => invalid(e.to_string()),
    }
}
