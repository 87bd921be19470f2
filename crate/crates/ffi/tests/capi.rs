use std::ffi::{CStr, CString};
use std::ptr;

use gsprep_ffi::*;

#[test]
fn hamiltonian_handle_lifecycle() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(gsprep_hamiltonian_random(16, 0.1, 3, &mut h), GsprepStatus::Ok);
        assert_eq!(gsprep_hamiltonian_dim(h), 16);
        let (mut e, mut g) = (0.0, 0.0);
        assert_eq!(gsprep_hamiltonian_spectrum_info(h, &mut e, &mut g), GsprepStatus::Ok);
        assert!((g - 0.1).abs() < 1e-9);
        let mut buf = [0.0; 4];
        let mut n = 0;
        assert_eq!(gsprep_hamiltonian_eigenvalues(h, buf.as_mut_ptr(), 4, &mut n), GsprepStatus::Ok);
        assert_eq!(n, 4);
        assert_eq!(buf[0], e);
        let mut s = GsprepRunSummary::default();
        assert_eq!(gsprep_prepare_known(h, 0.5, 1e-2, 0.0, 1, &mut s), GsprepStatus::Ok);
        assert!(s.success && s.fidelity > 0.9 && s.energy_error.is_nan());
        assert_eq!(gsprep_prepare_unknown(h, 0.5, 1e-2, -1.0, 1, &mut s), GsprepStatus::Ok);
        assert!(s.trial_calls > 0);
        let mut est = 0.0;
        assert_eq!(gsprep_estimate_energy(h, 0.5, 0.025, -1.0, 2, &mut est, &mut s), GsprepStatus::Ok);
        assert!(!est.is_nan());
        gsprep_hamiltonian_free(h);
        gsprep_hamiltonian_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(gsprep_hamiltonian_random(12, 0.1, 0, &mut h), GsprepStatus::InvalidArgument);
        assert!(h.is_null());
        let msg = CStr::from_ptr(gsprep_last_error_message()).to_str().unwrap();
        assert!(!msg.is_empty());
        let mut s = GsprepRunSummary::default();
        assert_eq!(gsprep_prepare_known(ptr::null(), 0.5, 1e-2, 0.0, 0, &mut s), GsprepStatus::NullPointer);
        let vals = [0.2, 0.4];
        assert_eq!(gsprep_hamiltonian_diagonal(vals.as_ptr(), 2, &mut h), GsprepStatus::Ok);
        assert_eq!(gsprep_prepare_known(h, 2.0, 1e-2, 0.0, 0, &mut s), GsprepStatus::InvalidArgument);
        gsprep_hamiltonian_free(h);
        let bad = CString::new("method = 3").unwrap();
        let mut e = ptr::null_mut();
        assert_eq!(gsprep_experiment_from_toml(bad.as_ptr(), &mut e), GsprepStatus::Parse);
        assert_eq!(gsprep_abi_version(), GSPREP_ABI_VERSION);
    }
}

#[test]
fn experiment_round_trip() {
    let text = CString::new(
        "method = \"lcu-fourier\"\noverlap = 0.5\ntrials = 2\n[instance]\nseed = 4\n[instance.model]\nkind = \"random-hermitian\"\ndim = 8\ngap = 0.2\n",
    )
    .unwrap();
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(gsprep_experiment_from_toml(text.as_ptr(), &mut e), GsprepStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(gsprep_experiment_run(e, 1, &mut r), GsprepStatus::Ok);
        assert_eq!(gsprep_report_len(r), 2);
        let mut s = GsprepRunSummary::default();
        assert_eq!(gsprep_report_row(r, 1, &mut s), GsprepStatus::Ok);
        assert!(s.success);
        assert_eq!(gsprep_report_row(r, 2, &mut s), GsprepStatus::InvalidArgument);
        let mut csv = ptr::null();
        assert_eq!(gsprep_report_render(r, GsprepFormat::Csv, &mut csv), GsprepStatus::Ok);
        let body = CStr::from_ptr(csv).to_str().unwrap();
        assert!(body.starts_with("method,dim,"));
        assert_eq!(body.lines().count(), 3);
        gsprep_report_free(r);
        gsprep_experiment_free(e);
    }
}

#[test]
fn header_declares_the_interface() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gsprep.h")).unwrap();
    for name in ["gsprep_hamiltonian_random", "gsprep_last_error_message", "gsprep_experiment_run", "GsprepRunSummary", "GSPREP_STATUS_NULL_POINTER"] {
        assert!(h.contains(name), "{name}");
    }
}
