//! Fixed-point search, amplitude amplification with unknown overlap, and the
//! overlap-doubling wrapper used by every preparation pipeline.

mod run;
mod schedule;

pub use run::{
    amplitude_amplify_unknown, fps_run, overlap_doubling_fps, AmplifyOutcome, Engine,
    PreparedBranch, StatePrep, reduced_amplitude, DEFAULT_LAMBDA_FLOOR,
};
pub use schedule::{
    chebyshev_t, fps_success_closed_form, fps_success_probability, FpsSchedule, MIN_CALLS,
};
