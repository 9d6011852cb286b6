//! The invariant suite behind `verify`.

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use crate::circuit::sim::Backend;
use crate::circuit::{build_engine_circuit, Basis, Preparation, ENGINE_QUBITS};
use crate::climit::sdp::{solve_sdp, SolverOptions};
use crate::climit::{assemble_sdp, weak_duality_excess};
use crate::engine::{dephasing_channel, Protocol};
use crate::error::{Error, Result};
use crate::noise::profile::DeviceProfile;
use crate::noise::{depolarize_gate, lindblad_kraus, lindblad_propagate_matrix, readout_flip, NoisyBackend};
use crate::qcore::random::{random_density_matrix, seeded_rng};
use crate::qcore::{max_abs, min_eigenvalue, ComplexMatrix, KrausChannel};
use crate::superpose::{gamma_prime, RoutedProcess, Selection};

use super::protocol_file::load_protocol;
use super::sweep::{resolve_profile, sweep_points, to_csv_string, Mode, SweepConfig};

/// Tolerance on trace, positivity and completeness of channels.
pub const CPTP_TOL: f64 = 1e-10;
/// Tolerance on Gibbs preservation and the superposition law.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Allowed excess of a random feasible point over the dual bound.
pub const DUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    /// canonical protocol when absent
    pub protocol: Option<PathBuf>,
    /// extra profiles (names or paths) to load and check
    pub profiles: Vec<String>,
    pub duality_samples: usize,
    pub random_states: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            protocol: None,
            profiles: Vec::new(),
            duality_samples: 10_000,
            random_states: 1000,
            seed: super::sweep::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    fn from_result(name: impl Into<String>, r: Result<(bool, String)>, seconds: f64) -> Self {
        let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        Self {
            name: name.into(),
            passed,
            detail,
            seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: impl Into<String>, r: Result<(bool, String)>) {
        self.checks.push(Check::from_result(name, r, 0.0));
    }

    fn timed<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: FnOnce() -> Result<(bool, String)>,
    {
        let start = Instant::now();
        let r = f();
        let seconds = start.elapsed().as_secs_f64();
        self.checks.push(Check::from_result(name, r, seconds));
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:<width$}  {:>7.2}s  {}", c.name, c.seconds, c.detail)?;
        }
        writeln!(
            f,
            "{} of {} checks passed",
            self.checks.len() - self.failures(),
            self.checks.len()
        )
    }
}

fn gamma_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// Worst trace error and most negative eigenvalue of `map` over `states`.
fn cptp_on_states<F>(states: &[ComplexMatrix], mut map: F) -> Result<(bool, String)>
where
    F: FnMut(&ComplexMatrix) -> Result<ComplexMatrix>,
{
    let (mut trace_err, mut min_eig) = (0.0f64, f64::INFINITY);
    for rho in states {
        let out = map(rho)?;
        trace_err = trace_err.max((out.trace() - rho.trace()).norm());
        min_eig = min_eig.min(min_eigenvalue(&out));
    }
    Ok((
        trace_err <= CPTP_TOL && min_eig >= -CPTP_TOL,
        format!(
            "{} states: trace error {trace_err:.1e}, min eigenvalue {min_eig:.1e}",
            states.len()
        ),
    ))
}

fn completeness(ops: &[ComplexMatrix]) -> Result<f64> {
    Ok(KrausChannel::new(ops.to_vec())?.completeness_error())
}

fn gibbs_single(p: &Protocol) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for g in gamma_grid() {
        let ch = dephasing_channel(g)?;
        for s in p.settings() {
            let mut avg = ComplexMatrix::zeros(p.dim(), p.dim());
            for o in &s.outcomes {
                avg += ch.apply_matrix(o.state.matrix())?.scale(o.probability);
            }
            worst = worst.max(max_abs(&(avg - p.bath_state().matrix())));
        }
    }
    Ok((worst <= IDENTITY_TOL, format!("max deviation {worst:.1e} over 21 gammas")))
}

fn gibbs_superposed(p: &Protocol) -> Result<(bool, String)> {
    if p.dim() != 2 {
        return Ok((true, "skipped: superposed process acts on qubits".into()));
    }
    let mut worst = 0.0f64;
    for g in gamma_grid() {
        let proc = RoutedProcess::superposed(g, Selection::KeepPlus)?;
        for s in p.settings() {
            let mut avg = ComplexMatrix::zeros(2, 2);
            for o in &s.outcomes {
                let (out, _) = proc.apply(&o.state)?;
                avg += out.matrix().scale(o.probability);
            }
            worst = worst.max(max_abs(&(avg - p.bath_state().matrix())));
        }
    }
    Ok((worst <= IDENTITY_TOL, format!("max deviation {worst:.1e} over 21 gammas")))
}

fn superposition_law(states: &[ComplexMatrix]) -> Result<(bool, String)> {
    let (mut law, mut success) = (0.0f64, 0.0f64);
    for g in gamma_grid() {
        let proc = RoutedProcess::superposed(g, Selection::KeepPlus)?;
        let target = dephasing_channel(gamma_prime(g))?;
        for rho in states {
            let sel = proc.selected_operator(rho)?;
            let s = sel.trace().re;
            success = success.max((s - (1.0 - g / 4.0)).abs());
            law = law.max(max_abs(&(sel.unscale(s) - target.apply_matrix(rho)?)));
        }
    }
    Ok((
        law <= IDENTITY_TOL && success <= IDENTITY_TOL,
        format!("channel deviation {law:.1e}, success-probability deviation {success:.1e}"),
    ))
}

fn cptp_dephasing(states: &[ComplexMatrix]) -> Result<(bool, String)> {
    let mut comp = 0.0f64;
    let mut ok = true;
    let mut detail = String::new();
    for g in gamma_grid() {
        let ch = dephasing_channel(g)?;
        comp = comp.max(ch.completeness_error());
        let (pass, d) = cptp_on_states(states, |r| ch.apply_matrix(r))?;
        if !pass {
            ok = false;
            detail = d;
        }
    }
    if detail.is_empty() {
        detail = format!("completeness {comp:.1e}, 21 gammas x {} states", states.len());
    }
    Ok((ok && comp <= CPTP_TOL, detail))
}

fn cptp_profile(profile: &DeviceProfile, states1: &[ComplexMatrix], states2: &[ComplexMatrix]) -> Result<(bool, String)> {
    let mut comp = 0.0f64;
    let mut ok = true;
    for w in 0..ENGINE_QUBITS {
        let q = profile.qubit(w)?;
        for t in [q.single_qubit_gate_time_ns, 1e3, 1e5, 1e7] {
            comp = comp.max(completeness(&lindblad_kraus(q, t)?)?);
            ok &= cptp_on_states(states1, |r| {
                lindblad_propagate_matrix(r, std::slice::from_ref(q), t)
            })?
            .0;
        }
        let ro = profile.readout_error(w)?;
        ok &= cptp_on_states(states1, |r| readout_flip(r, 0, ro))?.0;
    }
    for (a, b) in [(0, 1), (1, 2), (1, 3)] {
        let pe = profile.two_qubit(a, b)?.error_rate;
        ok &= cptp_on_states(states2, |r| depolarize_gate(r, &[0, 1], pe))?.0;
    }
    let backend = NoisyBackend::new(profile.clone());
    let mut circuit_err = 0.0f64;
    for g in [0.0, 0.5, 1.0] {
        let c = build_engine_circuit(g, &Preparation::plus(), Basis::X, true, profile.native_gate_set())?;
        let rho = backend.final_state(&c)?;
        circuit_err = circuit_err
            .max((rho.trace().re - 1.0).abs())
            .max(-min_eigenvalue(&rho));
        let dist = backend.distribution(&c)?;
        circuit_err = circuit_err.max((dist.iter().sum::<f64>() - 1.0).abs());
    }
    ok &= circuit_err <= CPTP_TOL;
    Ok((
        ok && comp <= CPTP_TOL,
        format!("Lindblad/readout/depolarizing maps and engine circuits; completeness {comp:.1e}, circuit error {circuit_err:.1e}"),
    ))
}

fn weak_duality(p: &Protocol, samples: usize, seed: u64) -> Result<(bool, String)> {
    let prob = assemble_sdp(p)?.sdp;
    let sol = solve_sdp(&prob, &SolverOptions::default())?;
    let mut rng = seeded_rng(seed);
    let excess = weak_duality_excess(&mut rng, &prob, sol.dual, samples);
    Ok((
        excess <= DUALITY_TOL,
        format!("{samples} random feasible points, max excess over dual bound {excess:.2e}"),
    ))
}

fn sdp_certificate(p: &Protocol) -> Result<(bool, String)> {
    let prob = assemble_sdp(p)?.sdp;
    let sol = solve_sdp(&prob, &SolverOptions::default())?;
    let (psd, eq) = prob.infeasibility(&sol.blocks);
    Ok((
        sol.gap.abs() <= 1e-8 && psd <= 1e-9 && eq <= 1e-9,
        format!("value {:.10}, gap {:.1e}, psd violation {psd:.1e}, equality violation {eq:.1e}", sol.primal, sol.gap),
    ))
}

fn solver_determinism(p: &Protocol) -> Result<(bool, String)> {
    let prob = assemble_sdp(p)?.sdp;
    let a = solve_sdp(&prob, &SolverOptions::default())?;
    let b = solve_sdp(&prob, &SolverOptions::default())?;
    Ok((a == b, format!("two solves, {} iterations each", a.iterations)))
}

fn sweep_determinism(seed: u64) -> Result<(bool, String)> {
    let profile = DeviceProfile::ibmq_jakarta();
    let cfg = SweepConfig {
        steps: 3,
        mode: Mode::Noisy,
        profile: Some("ibmq_jakarta".into()),
        shots: Some(1000),
        seed,
        ..SweepConfig::default()
    };
    let p = Protocol::canonical();
    let run = || -> Result<String> {
        let rows: Vec<_> = sweep_points(&cfg, &p, Some(&profile))?.into_iter().map(|x| x.row).collect();
        to_csv_string(&rows)
    };
    let (a, b) = (run()?, run()?);
    Ok((a == b, format!("seed {seed}: {} bytes, identical = {}", a.len(), a == b)))
}

pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut report = VerifyReport::default();
    let protocol = match &cfg.protocol {
        Some(path) => {
            let r = load_protocol(path);
            report.push(
                "protocol loads",
                r.as_ref().map(|_| (true, path.display().to_string())).map_err(|e| Error::InvalidConfig(e.to_string())),
            );
            r.ok()
        }
        None => Some(Protocol::canonical()),
    };
    let mut profiles = Vec::new();
    for name in ["ibmq_jakarta", "ionq"].iter().map(|s| s.to_string()).chain(cfg.profiles.iter().cloned()) {
        let r = resolve_profile(&name);
        report.push(format!("profile {name} loads"), r.as_ref().map(|p| (true, p.name.clone())).map_err(|e| Error::InvalidConfig(e.to_string())));
        if let Ok(p) = r {
            profiles.push(p);
        }
    }

    let mut rng = seeded_rng(cfg.seed);
    let states1: Vec<ComplexMatrix> = (0..cfg.random_states)
        .map(|_| random_density_matrix(&mut rng, 1).into_matrix())
        .collect();
    let states2: Vec<ComplexMatrix> = (0..cfg.random_states)
        .map(|_| random_density_matrix(&mut rng, 2).into_matrix())
        .collect();

    report.timed("cptp dephasing channel", || cptp_dephasing(&states1));
    report.timed("superposition law", || superposition_law(&states1));
    for p in &profiles {
        report.timed(format!("cptp noise maps ({})", p.name), || cptp_profile(p, &states1, &states2));
    }
    if let Some(p) = &protocol {
        report.timed("gibbs preservation (single)", || gibbs_single(p));
        report.timed("gibbs preservation (superposed)", || gibbs_superposed(p));
        report.timed("sdp certificate", || sdp_certificate(p));
        report.timed("weak duality", || weak_duality(p, cfg.duality_samples, cfg.seed));
        report.timed("solver determinism", || solver_determinism(p));
    }
    report.timed("sweep determinism", || sweep_determinism(cfg.seed));
    report
}
