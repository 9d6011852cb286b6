use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use twodemon_ffi::*;

fn last_error() -> String {
    let p = td_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn canonical() -> *mut TdProtocol {
    td_protocol_canonical()
}

#[test]
fn analytic_work_through_handles() {
    let p = canonical();
    let mut w = f64::NAN;
    unsafe {
        assert_eq!(td_average_work(p, 0.4, &mut w), TdStatus::Ok);
        assert!((w - 0.4).abs() < 1e-12);
        assert_eq!(td_average_work_superposed(p, 0.4, &mut w), TdStatus::Ok);
        let gp = 0.8 / 3.6;
        assert!((w - (2.0 - gp) / 4.0).abs() < 1e-12);
        assert_eq!(td_success_probability(p, 0.4, &mut w), TdStatus::Ok);
        assert!((w - 0.9).abs() < 1e-12);
        assert_eq!(td_gamma_prime(0.4, &mut w), TdStatus::Ok);
        assert!((w - gp).abs() < 1e-15);
        td_protocol_free(p);
    }
    assert!(td_last_error_message().is_null());
}

#[test]
fn classical_limit_and_thresholds() {
    let p = canonical();
    let (mut cl, mut th, mut s) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(td_classical_limit(p, &mut cl), TdStatus::Ok);
        assert!((cl - 1.0 / 8f64.sqrt()).abs() < 1e-6);
        assert_eq!(td_thresholds(p, &mut th, &mut s), TdStatus::Ok);
        assert!((th - (2.0 - 2f64.sqrt())).abs() < 1e-6);
        assert!((s - 0.9061).abs() < 1e-3);
        assert!((th - 2.0 * s / (4.0 - s)).abs() < 1e-6);
        td_protocol_free(p);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let p = canonical();
    let mut w = 0.0;
    unsafe {
        assert_eq!(td_average_work(p, 1.5, &mut w), TdStatus::Validation);
        assert!(last_error().contains("gamma"));
        assert_eq!(td_average_work(ptr::null(), 0.1, &mut w), TdStatus::NullPointer);
        assert_eq!(td_average_work(p, 0.1, ptr::null_mut()), TdStatus::NullPointer);
        assert_eq!(td_gamma_prime(-0.1, &mut w), TdStatus::Validation);

        let mut q = ptr::null_mut();
        let bad = CString::new("{\"settings\": []}").unwrap();
        assert_eq!(td_protocol_from_json(bad.as_ptr(), &mut q), TdStatus::Validation);
        assert!(q.is_null());
        let invalid = [0xffu8, 0];
        assert_eq!(
            td_protocol_from_json(invalid.as_ptr().cast(), &mut q),
            TdStatus::InvalidUtf8
        );
        td_protocol_free(p);
        td_protocol_free(ptr::null_mut());
        td_profile_free(ptr::null_mut());
    }
}

#[test]
fn protocol_json_round_trip() {
    let text = twodemon::cli::protocol_file::CANONICAL;
    let json = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    let mut w = 0.0;
    unsafe {
        assert_eq!(td_protocol_from_json(json.as_ptr(), &mut p), TdStatus::Ok);
        assert_eq!(td_average_work(p, 0.0, &mut w), TdStatus::Ok);
        assert!((w - 0.5).abs() < 1e-12);
        td_protocol_free(p);
    }
}

#[test]
fn circuit_work_ideal_and_noisy() {
    let p = canonical();
    let mut prof = ptr::null_mut();
    let (mut ideal, mut noisy, mut a, mut b) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(td_circuit_work(p, ptr::null(), 0.3, true, 0, 0, &mut ideal), TdStatus::Ok);
        let mut exact = 0.0;
        td_average_work_superposed(p, 0.3, &mut exact);
        assert!((ideal - exact).abs() < 1e-10);

        let name = CString::new("ibmq_jakarta").unwrap();
        assert_eq!(td_profile_builtin(name.as_ptr(), &mut prof), TdStatus::Ok);
        assert_eq!(td_circuit_work(p, prof, 0.3, true, 0, 0, &mut noisy), TdStatus::Ok);
        assert!(noisy < ideal);

        assert_eq!(td_circuit_work(p, prof, 0.3, false, 2000, 11, &mut a), TdStatus::Ok);
        assert_eq!(td_circuit_work(p, prof, 0.3, false, 2000, 11, &mut b), TdStatus::Ok);
        assert_eq!(a.to_bits(), b.to_bits());

        let unknown = CString::new("nope").unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(td_profile_builtin(unknown.as_ptr(), &mut other), TdStatus::Validation);
        td_profile_free(prof);
        td_protocol_free(p);
    }
}

#[test]
fn profile_json_validation() {
    let good = serde_json_profile().replace("\"ionq\"", "\"custom\"");
    let bad = good.replace("0.0304", "-0.5");
    let (g, b) = (CString::new(good).unwrap(), CString::new(bad).unwrap());
    let mut prof = ptr::null_mut();
    unsafe {
        assert_eq!(td_profile_from_json(g.as_ptr(), &mut prof), TdStatus::Ok);
        td_profile_free(prof);
        prof = ptr::null_mut();
        assert_eq!(td_profile_from_json(b.as_ptr(), &mut prof), TdStatus::Validation);
        assert!(prof.is_null());
        assert!(last_error().contains("error_rate"));
    }
}

fn serde_json_profile() -> String {
    include_str!("../../core/data/ionq.json").to_string()
}

const MISMATCHED: &str = r#"{
  "hamiltonian": [[0, 0], [0, 1]],
  "bath_state": [[0.5, 0], [0, 0.5]],
  "settings": [{"label": "z", "probability": 1, "outcomes": [
    {"label": "+1", "probability": 0.5, "state": [[1, 0], [0, 0]], "extraction": [[0, 1], [1, 0]]},
    {"label": "-1", "probability": 0.5, "state": [[0, 0], [0, 1]], "extraction": [[1, 0], [0, 1]]}
  ]}]
}"#;

#[test]
fn no_crossing_status() {
    // extraction unitaries pump energy in: quantum work -1/2, classical limit 1/2
    let json = CString::new(MISMATCHED).unwrap();
    let mut p = ptr::null_mut();
    let (mut w, mut cl, mut th, mut s) = (0.0, 0.0, -1.0, -1.0);
    unsafe {
        assert_eq!(td_protocol_from_json(json.as_ptr(), &mut p), TdStatus::Ok);
        assert_eq!(td_average_work(p, 0.0, &mut w), TdStatus::Ok);
        assert!((w + 0.5).abs() < 1e-12);
        assert_eq!(td_classical_limit(p, &mut cl), TdStatus::Ok);
        assert!((cl - 0.5).abs() < 1e-6);
        assert_eq!(td_thresholds(p, &mut th, &mut s), TdStatus::NoCrossing);
        assert!(last_error().contains("no crossing"));
        assert_eq!((th, s), (-1.0, -1.0));
        td_protocol_free(p);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("twodemon.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for f in [
        "td_last_error_message",
        "td_protocol_canonical",
        "td_protocol_from_json",
        "td_protocol_free",
        "td_average_work",
        "td_average_work_superposed",
        "td_success_probability",
        "td_gamma_prime",
        "td_classical_limit",
        "td_thresholds",
        "td_profile_builtin",
        "td_profile_from_json",
        "td_profile_free",
        "td_circuit_work",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(text.contains("typedef struct TdProtocol TdProtocol;"));
    assert!(text.contains("TD_STATUS_NO_CROSSING = 5"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"twodemon.h\"\nint main(void) { double w; TdProtocol *p = td_protocol_canonical();\n\
         TdStatus s = td_average_work(p, 0.5, &w); td_protocol_free(p); return s == TD_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    for (compiler, extra) in [("cc", &["-std=c99"][..]), ("c++", &["-x", "c++"][..])] {
        let status = Command::new(compiler)
            .args(extra)
            .arg("-fsyntax-only")
            .arg("-Wall")
            .arg("-Werror")
            .arg("-I")
            .arg(&include)
            .arg(&src)
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(e) => panic!("{compiler} not runnable: {e}"),
        }
    }
}
