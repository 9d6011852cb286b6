//! Command-line front end: `sweep`, `classical-limit`, `thresholds`,
//! `decompose` and `verify`.

pub mod protocol_file;
pub mod reports;
pub mod sweep;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::circuit::NativeGateSet;
use crate::engine::Protocol;
use crate::error::{Error, Result};

use sweep::{Mode, PostSelect, SweepConfig, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "twodemon", version, about = "Two-demon Maxwell engine under pure dephasing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateBasis {
    Cnot,
    Xx,
}

impl From<GateBasis> for NativeGateSet {
    fn from(b: GateBasis) -> Self {
        match b {
            GateBasis::Cnot => NativeGateSet::CnotBasis,
            GateBasis::Xx => NativeGateSet::XxBasis,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
    /// Device profile: `ibmq_jakarta`, `ionq` or a JSON file (noisy mode)
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_enum, default_value_t = PostSelect::Both)]
    pub postselect: PostSelect,
    /// Shots per circuit; noisy mode defaults to the profile's count
    #[arg(long)]
    pub shots: Option<u64>,
    /// Exact expectations even in noisy mode
    #[arg(long, conflicts_with = "shots")]
    pub exact: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Native gate set, overriding the profile's
    #[arg(long, value_enum)]
    pub basis: Option<GateBasis>,
    /// Protocol JSON (canonical σz/σx protocol when omitted)
    #[arg(long)]
    pub protocol: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

impl SweepArgs {
    pub fn config(&self) -> SweepConfig {
        SweepConfig {
            gamma_min: self.gamma_min,
            gamma_max: self.gamma_max,
            steps: self.steps,
            mode: self.mode,
            profile: self.profile.clone(),
            postselect: self.postselect,
            shots: self.shots,
            exact: self.exact,
            seed: self.seed,
            basis: self.basis.map(Into::into),
            protocol: self.protocol.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average work against γ as CSV (or JSON)
    Sweep(SweepArgs),
    /// Solve the classical-limit SDP and print the hidden-state assemblage
    ClassicalLimit {
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Dephasing strengths where the work meets the classical limit
    Thresholds {
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print the controlled-V decomposition and engine gate counts
    Decompose {
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = GateBasis::Cnot)]
        basis: GateBasis,
        #[arg(long)]
        json: bool,
    },
    /// Run the invariant suite
    Verify {
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Extra device profile to load and check (repeatable)
        #[arg(long)]
        profile: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1000)]
        states: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn protocol(path: &Option<PathBuf>) -> Result<Protocol> {
    match path {
        Some(p) => protocol_file::load_protocol(p),
        None => Ok(Protocol::canonical()),
    }
}

fn emit<T: serde::Serialize + std::fmt::Display>(value: &T, json: bool, out: &mut dyn Write) -> Result<()> {
    if json {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)?;
    } else {
        write!(out, "{value}")?;
    }
    Ok(())
}

/// Runs one parsed command, writing reports to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Sweep(args) => {
            let rows = sweep::run_sweep(&args.config())?;
            let write = |w: &mut dyn Write| {
                if args.json {
                    sweep::write_json(&rows, w)
                } else {
                    sweep::write_csv(&rows, w)
                }
            };
            match &args.output {
                Some(path) => write(&mut std::io::BufWriter::new(std::fs::File::create(path)?)),
                None => write(out),
            }
        }
        Command::ClassicalLimit { protocol: path, json } => {
            emit(&reports::classical_limit_report(&protocol(path)?)?, *json, out)
        }
        Command::Thresholds { protocol: path, json } => {
            emit(&reports::threshold_report(&protocol(path)?)?, *json, out)
        }
        Command::Decompose { gamma, basis, json } => {
            emit(&reports::decompose_report(*gamma, (*basis).into())?, *json, out)
        }
        Command::Verify {
            protocol,
            profile,
            samples,
            states,
            seed,
        } => {
            let report = verify::run_verify(&verify::VerifyConfig {
                protocol: protocol.clone(),
                profiles: profile.clone(),
                duality_samples: *samples,
                random_states: *states,
                seed: *seed,
            });
            write!(out, "{report}")?;
            match report.failures() {
                0 => Ok(()),
                n => Err(Error::VerificationFailed(n)),
            }
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
