//! Phase-estimation and filtering baselines.

mod filter;
mod pea;
mod transforms;

pub use pea::{
    dirichlet, dirichlet_mass, gamma_amplitude, pea_branch, pea_branch_table, pea_call_cost, pea_estimate_energy,
    pea_postselected_infidelity, pea_prefix_mass, pea_prepare, pea_state, PeaEstimatePlan, PeaPrep, PeaPrepareConfig,
    PeaSearch, PeaTarget, EXACT_BIN_TOL,
};
pub use pea::pea_bracket;
pub use filter::{
    filter_branch, filter_call_cost, filter_momentum_state, filter_overlap, filtering_estimate, filtering_prepare,
    FilterConfig, FilterGridPlan, FilterMode, FilterPrep, FilterPrepareConfig, MomentumMode, DEFAULT_FILTER_QUBIT_BUDGET,
};
