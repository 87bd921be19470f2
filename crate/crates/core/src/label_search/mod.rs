//! Minimum-label search and the unknown-energy pipelines built on it: grid
//! search over energy guesses, the combination with a phase-estimation
//! stage, and ground-energy estimation.

mod engine;
mod find;
mod grid;
mod params;
mod pipeline;

pub use engine::{BranchSearch, BranchTable, LiteralSearch};
pub use find::{min_label_find, LabelSearchOutcome};
pub use params::{EnergyGrid, LabelSearchParams, DEFAULT_SEARCH_DELTA};
pub use grid::{
    certified_zeta, grid_branch_table, grid_len, predicted_width, v_call_cost, ControlledV,
};
pub use pipeline::{
    combined_prepare, estimate_ground_energy, estimate_ground_energy_grid, prepare_ground_unknown_energy, EstimateVariant,
    GridPlan, UnknownEnergyConfig,
};
