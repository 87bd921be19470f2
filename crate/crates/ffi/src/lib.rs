//! C interface to the gsprep simulator.
//!
//! Objects cross the boundary as opaque handles created and destroyed by this
//! library. Every fallible call returns a [`GsprepStatus`]; the message of the
//! last failure on the calling thread is available from
//! [`gsprep_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gsprep::harness::{render, run_experiment_with_threads, ExperimentConfig, Format, ReportRow};
use gsprep::label_search::{combined_prepare, estimate_ground_energy, prepare_ground_unknown_energy, EstimateVariant, UnknownEnergyConfig};
use gsprep::lcu::{prepare_ground_known_energy, KnownEnergyConfig};
use gsprep::spectra::{build_hamiltonian, make_trial_state, Hamiltonian, Model, ModelSpec, SpectralOracle};
use gsprep::{Error, RunResult};

pub const GSPREP_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsprepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    CapacityExceeded = 4,
    Io = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsprepFormat {
    Csv = 0,
    Json = 1,
}

/// Outcome of one run. `energy_error` is NaN when the run produced no
/// energy estimate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GsprepRunSummary {
    pub success: bool,
    pub fidelity: f64,
    pub energy_error: f64,
    pub hamsim_time: f64,
    pub trial_calls: u64,
    pub walk_steps: u64,
    pub gate_proxy: u64,
    pub qubits_peak: u32,
}

impl From<&RunResult> for GsprepRunSummary {
    fn from(r: &RunResult) -> Self {
        Self {
            success: r.success,
            fidelity: r.fidelity,
            energy_error: r.energy_error.unwrap_or(f64::NAN),
            hamsim_time: r.ledger.hamsim_time,
            trial_calls: r.ledger.trial_calls,
            walk_steps: r.ledger.walk_steps,
            gate_proxy: r.ledger.elementary_gate_proxy,
            qubits_peak: r.ledger.qubits_peak,
        }
    }
}

impl From<&ReportRow> for GsprepRunSummary {
    fn from(r: &ReportRow) -> Self {
        Self {
            success: r.success,
            fidelity: r.fidelity,
            energy_error: r.energy_error.unwrap_or(f64::NAN),
            hamsim_time: r.hamsim_time,
            trial_calls: r.trial_calls,
            walk_steps: r.walk_steps,
            gate_proxy: r.gate_proxy,
            qubits_peak: r.qubits_peak,
        }
    }
}

/// Opaque Hamiltonian with its spectral decomposition.
pub struct GsprepHamiltonian(Hamiltonian);

/// Opaque experiment configuration.
pub struct GsprepExperiment(ExperimentConfig);

/// Opaque set of report rows.
pub struct GsprepReport {
    rows: Vec<ReportRow>,
    text: Option<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GsprepStatus {
    match e {
        Error::Parse(_) => GsprepStatus::Parse,
        Error::CapacityExceeded { .. } => GsprepStatus::CapacityExceeded,
        Error::Io(_) => GsprepStatus::Io,
        Error::InvalidParameter(_) | Error::Modulus(_) | Error::Dimension(_) => GsprepStatus::InvalidArgument,
        _ => GsprepStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (GsprepStatus, String)>) -> GsprepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GsprepStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside gsprep".into());
            GsprepStatus::Panic
        }
    }
}

fn lib(e: Error) -> (GsprepStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (GsprepStatus, String) {
    (GsprepStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, (GsprepStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

#[no_mangle]
pub extern "C" fn gsprep_abi_version() -> u32 {
    GSPREP_ABI_VERSION
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn gsprep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Random Hermitian instance of dimension `dim` (a power of two) and gap `gap`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_hamiltonian_random(dim: usize, gap: f64, seed: u64, out: *mut *mut GsprepHamiltonian) -> GsprepStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = build_hamiltonian(&ModelSpec::new(Model::RandomHermitian { dim, gap, ground: None }, seed)).map_err(lib)?;
        *out = Box::into_raw(Box::new(GsprepHamiltonian(h)));
        Ok(())
    })
}

/// Diagonal instance with the given eigenvalues (each in `[0, 0.95]`).
///
/// # Safety
/// `values` must point to `len` doubles and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_hamiltonian_diagonal(values: *const f64, len: usize, out: *mut *mut GsprepHamiltonian) -> GsprepStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let eigenvalues = std::slice::from_raw_parts(values, len).to_vec();
        let h = build_hamiltonian(&ModelSpec::new(Model::Diagonal { eigenvalues, degeneracy: None }, 0)).map_err(lib)?;
        *out = Box::into_raw(Box::new(GsprepHamiltonian(h)));
        Ok(())
    })
}

/// # Safety
/// `h` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gsprep_hamiltonian_free(h: *mut GsprepHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gsprep_hamiltonian_dim(h: *const GsprepHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.0.dim)
}

/// # Safety
/// `h` must be a live handle and `energy`, `gap` valid for writes (either may
/// be null).
#[no_mangle]
pub unsafe extern "C" fn gsprep_hamiltonian_spectrum_info(h: *const GsprepHamiltonian, energy: *mut f64, gap: *mut f64) -> GsprepStatus {
    guard(|| {
        let h = &borrow(h, "h")?.0;
        if let Some(e) = energy.as_mut() {
            *e = h.ground_energy();
        }
        if let Some(g) = gap.as_mut() {
            *g = h.gap;
        }
        Ok(())
    })
}

/// Copies up to `len` ascending eigenvalues into `buf`; returns the number
/// written through `written`.
///
/// # Safety
/// `buf` must hold `len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn gsprep_hamiltonian_eigenvalues(h: *const GsprepHamiltonian, buf: *mut f64, len: usize, written: *mut usize) -> GsprepStatus {
    guard(|| {
        let h = &borrow(h, "h")?.0;
        if buf.is_null() && len > 0 {
            return Err(null("buf"));
        }
        let n = len.min(h.dim);
        if n > 0 {
            std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&h.eigenvalues[..n]);
        }
        if let Some(w) = written.as_mut() {
            *w = n;
        }
        Ok(())
    })
}

fn write_summary(out: *mut GsprepRunSummary, r: &RunResult) -> Result<(), (GsprepStatus, String)> {
    // SAFETY: checked for null; the caller guarantees validity for writes.
    unsafe { *out.as_mut().ok_or_else(|| null("out"))? = GsprepRunSummary::from(r) };
    Ok(())
}

/// Known-energy preparation with guess `E = lambda_0 - energy_guess_error`;
/// the gap bound is the true gap and the overlap bound is `overlap`.
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_prepare_known(h: *const GsprepHamiltonian, overlap: f64, eps: f64, energy_guess_error: f64, seed: u64, out: *mut GsprepRunSummary) -> GsprepStatus {
    guard(|| {
        let h = &borrow(h, "h")?.0;
        let trial = make_trial_state(h, overlap, seed).map_err(lib)?;
        let cfg = KnownEnergyConfig::new(h.gap, overlap, eps, h.ground_energy() - energy_guess_error);
        let r = prepare_ground_known_energy(&SpectralOracle::new(h), &trial, &cfg, seed).map_err(lib)?;
        write_summary(out, &r)
    })
}

/// Unknown-energy preparation: grid search when `kappa` is negative, the
/// combined pipeline otherwise.
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_prepare_unknown(h: *const GsprepHamiltonian, overlap: f64, eps: f64, kappa: f64, seed: u64, out: *mut GsprepRunSummary) -> GsprepStatus {
    guard(|| {
        let h = &borrow(h, "h")?.0;
        let trial = make_trial_state(h, overlap, seed).map_err(lib)?;
        let cfg = UnknownEnergyConfig::new(h.gap, overlap, eps);
        let oracle = SpectralOracle::new(h);
        let r = if kappa < 0.0 {
            prepare_ground_unknown_energy(&oracle, &trial, &cfg, seed)
        } else {
            combined_prepare(&oracle, &trial, &cfg, kappa, seed)
        }
        .map_err(lib)?;
        write_summary(out, &r)
    })
}

/// Ground-energy estimate to precision `xi`; `kappa < 0` selects the grid
/// variant. The estimate is written to `energy` (NaN on failure).
///
/// # Safety
/// `h` must be a live handle; `out` and `energy` valid for writes (`energy`
/// may be null).
#[no_mangle]
pub unsafe extern "C" fn gsprep_estimate_energy(h: *const GsprepHamiltonian, overlap: f64, xi: f64, kappa: f64, seed: u64, energy: *mut f64, out: *mut GsprepRunSummary) -> GsprepStatus {
    guard(|| {
        let h = &borrow(h, "h")?.0;
        let trial = make_trial_state(h, overlap, seed).map_err(lib)?;
        let cfg = UnknownEnergyConfig::new(h.gap, overlap, 1e-2);
        let variant = if kappa < 0.0 { EstimateVariant::Grid } else { EstimateVariant::Combined(kappa) };
        let r = estimate_ground_energy(&SpectralOracle::new(h), &trial, xi, variant, &cfg, seed).map_err(lib)?;
        if let Some(e) = energy.as_mut() {
            *e = r.energy_estimate.unwrap_or(f64::NAN);
        }
        write_summary(out, &r)
    })
}

/// Parses an experiment description (TOML text, NUL-terminated).
///
/// # Safety
/// `text` must be a valid C string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_experiment_from_toml(text: *const c_char, out: *mut *mut GsprepExperiment) -> GsprepStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text).to_str().map_err(|e| (GsprepStatus::Parse, e.to_string()))?;
        let cfg = ExperimentConfig::from_toml(s).map_err(lib)?;
        *out = Box::into_raw(Box::new(GsprepExperiment(cfg)));
        Ok(())
    })
}

/// # Safety
/// `e` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gsprep_experiment_free(e: *mut GsprepExperiment) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Runs every point and trial; `threads = 0` uses one worker per core.
///
/// # Safety
/// `e` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_experiment_run(e: *const GsprepExperiment, threads: usize, out: *mut *mut GsprepReport) -> GsprepStatus {
    guard(|| {
        let cfg = &borrow(e, "e")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let rows = run_experiment_with_threads(cfg, threads).map_err(lib)?;
        *out = Box::into_raw(Box::new(GsprepReport { rows, text: None }));
        Ok(())
    })
}

/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gsprep_report_len(r: *const GsprepReport) -> usize {
    r.as_ref().map_or(0, |r| r.rows.len())
}

/// # Safety
/// `r` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_report_row(r: *const GsprepReport, index: usize, out: *mut GsprepRunSummary) -> GsprepStatus {
    guard(|| {
        let r = borrow(r, "r")?;
        let row = r.rows.get(index).ok_or_else(|| (GsprepStatus::InvalidArgument, format!("row {index} out of range")))?;
        *out.as_mut().ok_or_else(|| null("out"))? = GsprepRunSummary::from(row);
        Ok(())
    })
}

/// Renders the report; `*text` stays valid until the next render or until
/// the report is freed.
///
/// # Safety
/// `r` must be a live handle and `text` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gsprep_report_render(r: *mut GsprepReport, format: GsprepFormat, text: *mut *const c_char) -> GsprepStatus {
    guard(|| {
        let r = r.as_mut().ok_or_else(|| null("r"))?;
        if text.is_null() {
            return Err(null("text"));
        }
        let f = match format {
            GsprepFormat::Csv => Format::Csv,
            GsprepFormat::Json => Format::Json,
        };
        let s = render(&r.rows, f).map_err(lib)?;
        let c = CString::new(s).map_err(|e| (GsprepStatus::Internal, e.to_string()))?;
        *text = r.text.insert(c).as_ptr();
        Ok(())
    })
}

/// # Safety
/// `r` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gsprep_report_free(r: *mut GsprepReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
