//! Projection by `(1 - (H/d)^2)^M`, expanded in even Chebyshev polynomials and
//! realized with powers of a quantum walk built from sparse access to `H`.

mod coeffs;
mod prepare;
mod walk;

pub use coeffs::ChebCoefficients;
pub use prepare::{
    cheb_branch, cheb_branch_walk, cheb_call_cost, prepare_ground_cheb, prepare_ground_cheb_unknown, shifted_entries,
    ChebConfig, ChebParams,
};
pub use walk::{build_walk, walk_block_check, walk_block_deviations, SparseOracle, WalkSpace, MAX_WALK_DIM};
