//! C ABI for the twodemon toolkit.
//!
//! Protocols and device profiles cross the boundary as opaque handles that
//! the caller frees with the matching `*_free` function. Every fallible
//! call returns a [`TdStatus`] and writes its result through an out
//! pointer; on failure `td_last_error_message` describes the error for the
//! calling thread.
//!
//! Pointer arguments must be null or valid for the access implied by the
//! function; handles must come from this library and must not be used after
//! being freed. Strings are NUL-terminated UTF-8.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use twodemon::circuit::sim::{estimate_work, IdealBackend, Sampling};
use twodemon::circuit::NativeGateSet;
use twodemon::cli::protocol_file::parse_protocol;
use twodemon::climit::classical_limit;
use twodemon::engine::{average_work, dephasing_channel, threshold_gamma, Protocol};
use twodemon::noise::{DeviceProfile, NoisyBackend};
use twodemon::superpose::{average_work_superposed, gamma_prime, mean_success_probability};
use twodemon::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// invalid input: out-of-range parameter, malformed protocol or profile
    Validation = 3,
    /// solver non-convergence or impossible post-selection
    Numerical = 4,
    /// the work curve never meets the classical limit
    NoCrossing = 5,
    Panic = 6,
}

/// Opaque work-extraction protocol.
pub struct TdProtocol(Protocol);

/// Opaque device noise profile.
pub struct TdProfile(DeviceProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TdStatus {
    match e {
        Error::NoCrossing(_) => TdStatus::NoCrossing,
        e if e.exit_code() == 2 => TdStatus::Numerical,
        _ => TdStatus::Validation,
    }
}

/// Runs `f`, converting errors and panics into a status and message.
fn guard<F>(f: F) -> TdStatus
where
    F: FnOnce() -> Result<(), TdError>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TdStatus::Ok,
        Ok(Err(TdError(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TdStatus::Panic
        }
    }
}

struct TdError(TdStatus, String);

impl From<Error> for TdError {
    fn from(e: Error) -> Self {
        TdError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> TdError {
    TdError(TdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, TdError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), TdError> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, TdError> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| TdError(TdStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// The built-in σ_z/σ_x protocol on the infinite-temperature qubit.
#[no_mangle]
pub extern "C" fn td_protocol_canonical() -> *mut TdProtocol {
    Box::into_raw(Box::new(TdProtocol(Protocol::canonical())))
}

/// Parses a protocol JSON document.
#[no_mangle]
pub unsafe extern "C" fn td_protocol_from_json(
    json: *const c_char,
    out: *mut *mut TdProtocol,
) -> TdStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let p = parse_protocol(text)?;
        write_out(out, Box::into_raw(Box::new(TdProtocol(p))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn td_protocol_free(p: *mut TdProtocol) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Average work through a single dephasing channel of strength `gamma`.
#[no_mangle]
pub unsafe extern "C" fn td_average_work(p: *const TdProtocol, gamma: f64, out: *mut f64) -> TdStatus {
    guard(|| {
        let p = &deref(p, "protocol")?.0;
        write_out(out, average_work(p, &dephasing_channel(gamma)?)?)
    })
}

/// Average work with superposed channels and post-selection on `|+⟩`.
#[no_mangle]
pub unsafe extern "C" fn td_average_work_superposed(
    p: *const TdProtocol,
    gamma: f64,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let p = &deref(p, "protocol")?.0;
        write_out(out, average_work_superposed(p, gamma)?)
    })
}

/// Mean post-selection success probability.
#[no_mangle]
pub unsafe extern "C" fn td_success_probability(
    p: *const TdProtocol,
    gamma: f64,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let p = &deref(p, "protocol")?.0;
        write_out(out, mean_success_probability(p, gamma)?)
    })
}

/// Effective dephasing strength `2γ/(4−γ)` after post-selection.
#[no_mangle]
pub unsafe extern "C" fn td_gamma_prime(gamma: f64, out: *mut f64) -> TdStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(TdError(TdStatus::Validation, format!("gamma = {gamma} outside [0, 1]")));
        }
        write_out(out, gamma_prime(gamma))
    })
}

/// Optimal classical (hidden-state) work from the SDP.
#[no_mangle]
pub unsafe extern "C" fn td_classical_limit(p: *const TdProtocol, out: *mut f64) -> TdStatus {
    guard(|| {
        let p = &deref(p, "protocol")?.0;
        write_out(out, classical_limit(p)?)
    })
}

/// Dephasing strengths where the single-channel and superposed work meet
/// the classical limit. Returns `TD_STATUS_NO_CROSSING` if either has none;
/// outputs are written only on success.
#[no_mangle]
pub unsafe extern "C" fn td_thresholds(
    p: *const TdProtocol,
    gamma_th: *mut f64,
    gamma_s: *mut f64,
) -> TdStatus {
    guard(|| {
        let p = &deref(p, "protocol")?.0;
        if gamma_th.is_null() || gamma_s.is_null() {
            return Err(null("output pointer"));
        }
        let w_cl = classical_limit(p)?;
        let th = threshold_gamma(|g| average_work(p, &dephasing_channel(g)?), w_cl)?;
        let s = threshold_gamma(|g| average_work_superposed(p, g), w_cl)?;
        write_out(gamma_th, th)?;
        write_out(gamma_s, s)
    })
}

/// Bundled profile by name: `ibmq_jakarta` (or `ibmq`), `ionq`.
#[no_mangle]
pub unsafe extern "C" fn td_profile_builtin(name: *const c_char, out: *mut *mut TdProfile) -> TdStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let p = DeviceProfile::builtin(name)
            .ok_or_else(|| TdError(TdStatus::Validation, format!("no bundled profile {name}")))?;
        write_out(out, Box::into_raw(Box::new(TdProfile(p))))
    })
}

/// Parses and validates a device profile JSON document.
#[no_mangle]
pub unsafe extern "C" fn td_profile_from_json(json: *const c_char, out: *mut *mut TdProfile) -> TdStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let p = DeviceProfile::from_json(text)?;
        write_out(out, Box::into_raw(Box::new(TdProfile(p))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn td_profile_free(p: *mut TdProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Average work from the engine circuit. A null `profile` runs the ideal
/// circuit in the CNOT basis, otherwise the profile's noise model and native
/// gate set. `shots == 0` gives exact expectations; otherwise counts are
/// sampled from `seed`.
#[no_mangle]
pub unsafe extern "C" fn td_circuit_work(
    p: *const TdProtocol,
    profile: *const TdProfile,
    gamma: f64,
    postselect: bool,
    shots: u64,
    seed: u64,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let p = &deref(p, "protocol")?.0;
        let sampling = (shots > 0).then_some(Sampling {
            shots,
            seed,
            stream: 0,
        });
        let estimate = match profile.as_ref() {
            None => estimate_work(&IdealBackend, p, gamma, postselect, NativeGateSet::CnotBasis, sampling)?,
            Some(TdProfile(prof)) => {
                let backend = NoisyBackend::new(prof.clone());
                estimate_work(&backend, p, gamma, postselect, prof.native_gate_set(), sampling)?
            }
        };
        write_out(out, estimate.value)
    })
}
