//! Statevector simulation of spectral-projection ground-state preparation,
//! minimum-label search, phase-estimation and filtering baselines, and the
//! Chebyshev quantum-walk variant. Every algorithm charges a [`ResourceLedger`]
//! so that query scalings can be measured.

pub mod amplify;
pub mod baselines;
pub mod chebwalk;
pub mod error;
pub mod harness;
pub mod label_search;
pub mod lcu;
pub mod ledger;
pub mod registers;
pub mod result;
pub mod rng;
pub mod spectra;

pub use error::{Error, Result};
pub use ledger::ResourceLedger;
pub use result::RunResult;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
