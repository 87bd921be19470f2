//! Hamiltonian models, spectral normalization, trial states and the exact
//! time-evolution oracle.

mod hamiltonian;
mod io;
mod oracle;
mod trial;

pub use hamiltonian::{
    build_hamiltonian, ground_truth, GroundTruth, Hamiltonian, Model, ModelSpec, SpectrumMode,
    NORMALIZATION_MARGIN,
};
#[cfg(test)]
pub(crate) use hamiltonian::haar_unitary;
pub use io::{format_hex, parse_hex, read_hamiltonian, write_hamiltonian};
pub use oracle::{ErrorInjection, SpectralOracle};
pub use trial::{make_trial_state, TrialState};
