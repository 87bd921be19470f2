//! Spectral projection with `cos^M` realized as a truncated Fourier sum of
//! evolutions, for a known ground energy.

mod circuit;
mod coeffs;
mod params;
mod prepare;

pub use circuit::{
    apply_g, flagged_block, prepare_b, reflector_to, EvolutionFamily, LcuCircuit, LcuPrep,
    TrialReflector,
};
pub use coeffs::FourierCoefficients;
pub use params::{label_bits, FourierParams};
pub use prepare::{prepare_ground_known_energy, AmpMode, KnownEnergyConfig};
