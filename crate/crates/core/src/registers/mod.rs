//! Multi-register statevector engine. Registers are ordered from slowest to
//! fastest index; bits are little-endian within a register, so a register
//! value is the integer read from its slice of the global index.

mod layout;
mod state;

pub use layout::{Register, RegisterLayout, DEFAULT_QUBIT_CAP};
pub use state::{
    Condition, DiagonalPhaseFamily, LabelFamily, MatrixFamily, NormKind, Projector, QState,
    unitarity_deviation,
};
