use std::path::Path;

use twodemon::cli::main_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["twodemon"];
    argv.extend_from_slice(args);
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sweep.csv");
    let (code, out, _) = run(&["sweep", "--steps", "5", "-o", path_str(&file)]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("gamma,theta,w_single,w_superposed"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 5);
    let last: Vec<&str> = rows[4].split(',').collect();
    assert_eq!(last[0].parse::<f64>().unwrap(), 1.0);
    assert!((last[2].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
    assert!((last[3].parse::<f64>().unwrap() - (2.0 - 2.0 / 3.0) / 4.0).abs() < 1e-12);
}

#[test]
fn sweep_json_to_stdout() {
    let (code, out, _) = run(&["sweep", "--steps", "3", "--postselect", "on", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[1]["w_single"].is_null());
    assert!((rows[1]["success_probability"].as_f64().unwrap() - 0.875).abs() < 1e-12);
}

#[test]
fn sampled_sweeps_repeat_with_same_seed() {
    let args = ["sweep", "--steps", "3", "--mode", "circuit", "--shots", "500", "--seed", "11"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let (_, c, _) = run(&["sweep", "--steps", "3", "--mode", "circuit", "--shots", "500", "--seed", "12"]);
    assert_ne!(a, c);
}

#[test]
fn noisy_sweep_needs_profile() {
    let (code, _, err) = run(&["sweep", "--mode", "noisy", "--steps", "2"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
}

#[test]
fn bad_profile_path_is_a_validation_error() {
    let (code, _, err) = run(&[
        "sweep", "--mode", "noisy", "--exact", "--steps", "2", "--profile", "/nonexistent/profile.json",
    ]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn invalid_arguments_exit_one() {
    assert_eq!(run(&["sweep", "--steps", "0"]).0, 1);
    assert_eq!(run(&["sweep", "--gamma-min", "0.8", "--gamma-max", "0.2"]).0, 1);
    assert_eq!(run(&["sweep", "--gamma-max", "1.5"]).0, 1);
    assert_eq!(run(&["decompose", "--gamma", "-0.1"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["sweep", "--shots", "10", "--exact"]).0, 1);
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("classical-limit"));
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn thresholds_json() {
    let (code, out, _) = run(&["thresholds", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let th = v["gamma_th"]["Ok"].as_f64().unwrap();
    assert!((th - (2.0 - 2f64.sqrt())).abs() < 1e-6);
}

#[test]
fn classical_limit_text_and_protocol_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    std::fs::write(&file, twodemon::cli::protocol_file::CANONICAL).unwrap();
    let (code, out, _) = run(&["classical-limit", "--protocol", path_str(&file)]);
    assert_eq!(code, 0);
    assert!(out.contains("0.35355"), "{out}");

    std::fs::write(&file, "{\"hamiltonian\": 3}").unwrap();
    let (code, _, err) = run(&["classical-limit", "--protocol", path_str(&file)]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn decompose_reports_counts() {
    let (code, out, _) = run(&["decompose", "--basis", "xx", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(out.contains('6') && out.contains('8'));
    assert!(v.is_object());
}

#[test]
fn verify_passes_and_rejects_broken_profile() {
    let (code, out, _) = run(&["verify", "--samples", "200", "--states", "50"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.lines().any(|l| l.starts_with("FAIL")), "{out}");
    assert!(out.contains("12 of 12 checks passed"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    let text = serde_json::to_string(&twodemon::noise::DeviceProfile::ionq())
        .unwrap()
        .replacen("\"t1_rate_per_ns\":", "\"t1_rate_per_ns\":-", 1);
    std::fs::write(&file, text).unwrap();
    let (code, out, _) = run(&["verify", "--samples", "200", "--states", "50", "--profile", path_str(&file)]);
    assert_eq!(code, 2, "{out}");
    assert!(out.lines().any(|l| l.starts_with("FAIL")), "{out}");
}
