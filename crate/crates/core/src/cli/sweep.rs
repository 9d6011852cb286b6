//! γ sweeps in analytic, ideal-circuit and noisy-circuit modes.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::sim::{estimate_work, Backend, IdealBackend, Sampling, WorkEstimate};
use crate::circuit::{theta_of_gamma, NativeGateSet};
use crate::climit::classical_limit;
use crate::engine::{average_work, dephasing_channel, Protocol};
use crate::error::{Error, Result};
use crate::noise::profile::DeviceProfile;
use crate::noise::NoisyBackend;
use crate::superpose::{average_work_superposed, mean_success_probability};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Circuit,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PostSelect {
    Off,
    On,
    Both,
}

impl PostSelect {
    fn single(self) -> bool {
        self != PostSelect::On
    }

    fn superposed(self) -> bool {
        self != PostSelect::Off
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub steps: usize,
    pub mode: Mode,
    /// bundled profile name or JSON path; required in noisy mode
    pub profile: Option<String>,
    pub postselect: PostSelect,
    /// `None` means exact expectations, except in noisy mode where the
    /// profile's default shot count applies unless `exact` is set
    pub shots: Option<u64>,
    pub exact: bool,
    pub seed: u64,
    /// overrides the profile's native gate set
    pub basis: Option<NativeGateSet>,
    pub protocol: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gamma_min: 0.0,
            gamma_max: 1.0,
            steps: 101,
            mode: Mode::Analytic,
            profile: None,
            postselect: PostSelect::Both,
            shots: None,
            exact: false,
            seed: DEFAULT_SEED,
            basis: None,
            protocol: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        if !ok(self.gamma_min) || !ok(self.gamma_max) || self.gamma_min > self.gamma_max {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= gamma_min <= gamma_max <= 1, got [{}, {}]",
                self.gamma_min, self.gamma_max
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidConfig("shots must be positive".into()));
        }
        if self.mode == Mode::Noisy && self.profile.is_none() {
            return Err(Error::InvalidConfig("noisy mode needs --profile".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.gamma_min];
        }
        let span = self.gamma_max - self.gamma_min;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.gamma_max
                } else {
                    self.gamma_min + span * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// Bundled profile name or path to a profile JSON file.
pub fn resolve_profile(spec: &str) -> Result<DeviceProfile> {
    let path = std::path::Path::new(spec);
    if path.exists() {
        return DeviceProfile::load(path);
    }
    DeviceProfile::builtin(spec).ok_or_else(|| {
        Error::InvalidConfig(format!("no profile file or bundled profile named {spec}"))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub theta: f64,
    pub w_single: Option<f64>,
    pub w_superposed: Option<f64>,
    pub w_classical_limit: f64,
    pub success_probability: Option<f64>,
    pub mode: Mode,
    pub shots: Option<u64>,
}

/// A row with the circuit-level estimates behind it (empty in analytic mode).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub row: SweepRow,
    pub single: Option<WorkEstimate>,
    pub superposed: Option<WorkEstimate>,
}

struct Plan<'a> {
    cfg: &'a SweepConfig,
    protocol: &'a Protocol,
    backend: Option<Box<dyn Backend + 'a>>,
    set: NativeGateSet,
    shots: Option<u64>,
    w_cl: f64,
}

impl Plan<'_> {
    fn point(&self, index: usize, gamma: f64) -> Result<SweepPoint> {
        let cfg = self.cfg;
        let mut row = SweepRow {
            gamma,
            theta: theta_of_gamma(gamma)?,
            w_single: None,
            w_superposed: None,
            w_classical_limit: self.w_cl,
            success_probability: None,
            mode: cfg.mode,
            shots: self.shots,
        };
        let Some(backend) = &self.backend else {
            if cfg.postselect.single() {
                row.w_single = Some(average_work(self.protocol, &dephasing_channel(gamma)?)?);
            }
            if cfg.postselect.superposed() {
                row.w_superposed = Some(average_work_superposed(self.protocol, gamma)?);
                row.success_probability = Some(mean_success_probability(self.protocol, gamma)?);
            }
            return Ok(SweepPoint {
                row,
                single: None,
                superposed: None,
            });
        };
        let run = |postselect: bool| {
            let sampling = self.shots.map(|shots| Sampling {
                shots,
                seed: cfg.seed,
                stream: 2 * index as u64 + postselect as u64,
            });
            estimate_work(backend.as_ref(), self.protocol, gamma, postselect, self.set, sampling)
        };
        let single = cfg.postselect.single().then(|| run(false)).transpose()?;
        let superposed = cfg.postselect.superposed().then(|| run(true)).transpose()?;
        row.w_single = single.as_ref().map(|e| e.value);
        row.w_superposed = superposed.as_ref().map(|e| e.value);
        row.success_probability = superposed.as_ref().map(|e| e.success_probability);
        Ok(SweepPoint {
            row,
            single,
            superposed,
        })
    }
}

/// Evaluates the sweep for an already loaded protocol and profile; points
/// run in parallel and come back in grid order.
pub fn sweep_points(
    cfg: &SweepConfig,
    protocol: &Protocol,
    profile: Option<&DeviceProfile>,
) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let (backend, set, shots): (Option<Box<dyn Backend>>, NativeGateSet, Option<u64>) =
        match cfg.mode {
            Mode::Analytic => (None, NativeGateSet::CnotBasis, None),
            Mode::Circuit => (
                Some(Box::new(IdealBackend)),
                cfg.basis.unwrap_or(NativeGateSet::CnotBasis),
                if cfg.exact { None } else { cfg.shots },
            ),
            Mode::Noisy => {
                let profile = profile
                    .ok_or_else(|| Error::InvalidConfig("noisy mode needs a profile".into()))?;
                let shots = if cfg.exact {
                    None
                } else {
                    Some(cfg.shots.unwrap_or(profile.shots()))
                };
                (
                    Some(Box::new(NoisyBackend::new(profile.clone()))),
                    cfg.basis.unwrap_or(profile.native_gate_set()),
                    shots,
                )
            }
        };
    let plan = Plan {
        cfg,
        protocol,
        backend,
        set,
        shots,
        w_cl: classical_limit(protocol)?,
    };
    cfg.grid()
        .into_par_iter()
        .enumerate()
        .map(|(i, g)| plan.point(i, g))
        .collect()
}

/// Loads the protocol (canonical by default) and profile named in `cfg`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let protocol = match &cfg.protocol {
        Some(path) => super::protocol_file::load_protocol(path)?,
        None => Protocol::canonical(),
    };
    let profile = match (&cfg.profile, cfg.mode) {
        (Some(spec), Mode::Noisy) => Some(resolve_profile(spec)?),
        _ => None,
    };
    Ok(sweep_points(cfg, &protocol, profile.as_ref())?
        .into_iter()
        .map(|p| p.row)
        .collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
