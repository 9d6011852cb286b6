//! Reports for `classical-limit`, `thresholds` and `decompose`.

use std::fmt;

use serde::Serialize;

use crate::circuit::diagram::render;
use crate::circuit::{
    build_engine_circuit, controlled_v_fragment, controlled_v_reference, gate_counts,
    theta_of_gamma, Basis, NativeGateSet, Preparation,
};
use crate::climit::{classical_limit_with, hs_assemblage};
use crate::climit::sdp::SolverOptions;
use crate::engine::{average_work, dephasing_channel, threshold_gamma, Protocol};
use crate::error::{Error, Result};
use crate::qcore::{identity, phase_insensitive_overlap, ComplexMatrix};
use crate::superpose::{average_work_superposed, gamma_prime};

/// Rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

fn matrix_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn write_matrix(f: &mut fmt::Formatter<'_>, m: &MatrixJson, indent: &str) -> fmt::Result {
    for row in m {
        write!(f, "{indent}[")?;
        for (j, [re, im]) in row.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            if *im == 0.0 {
                write!(f, "{re:>9.6}")?;
            } else {
                write!(f, "{re:.6}{im:+.6}i")?;
            }
        }
        writeln!(f, "]")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyBlock {
    /// outcome `λ(x)` for each setting
    pub strategy: Vec<usize>,
    pub weight: f64,
    pub block: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssemblageEntry {
    pub x: usize,
    pub a: usize,
    pub setting: String,
    pub outcome: String,
    pub state: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalLimitReport {
    pub value: f64,
    pub dual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub strategies: Vec<StrategyBlock>,
    pub assemblage: Vec<AssemblageEntry>,
}

pub fn classical_limit_report(p: &Protocol) -> Result<ClassicalLimitReport> {
    let cl = classical_limit_with(p, &SolverOptions::default())?;
    let blocks = &cl.solution.blocks;
    let strategies = cl
        .problem
        .strategies
        .iter()
        .zip(blocks)
        .map(|(s, b)| StrategyBlock {
            strategy: s.outcomes().to_vec(),
            weight: b.trace().re,
            block: matrix_json(b),
        })
        .collect();
    let hs = hs_assemblage(blocks, &cl.problem.strategies)?;
    let mut assemblage = Vec::new();
    for (x, row) in hs.iter().enumerate() {
        for (a, sigma) in row.iter().enumerate() {
            let o = p.outcome(x, a)?;
            assemblage.push(AssemblageEntry {
                x,
                a,
                setting: p.settings()[x].label.clone(),
                outcome: o.label.clone(),
                state: matrix_json(sigma.matrix()),
            });
        }
    }
    Ok(ClassicalLimitReport {
        value: cl.value,
        dual: cl.solution.dual,
        gap: cl.solution.gap,
        iterations: cl.solution.iterations,
        strategies,
        assemblage,
    })
}

impl fmt::Display for ClassicalLimitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "classical limit W_cl = {:.10}", self.value)?;
        writeln!(f, "dual bound          = {:.10}", self.dual)?;
        writeln!(f, "duality gap         = {:.3e}", self.gap)?;
        writeln!(f, "iterations          = {}", self.iterations)?;
        writeln!(f, "optimal blocks sigma_lambda:")?;
        for s in &self.strategies {
            writeln!(f, "  lambda = {:?}  (weight {:.6})", s.strategy, s.weight)?;
            write_matrix(f, &s.block, "    ")?;
        }
        writeln!(f, "hidden-state assemblage sigma_(a|x):")?;
        for e in &self.assemblage {
            writeln!(f, "  {} | {}", e.outcome, e.setting)?;
            write_matrix(f, &e.state, "    ")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub classical_limit: f64,
    /// single channel; `Err` carries the reason there is no crossing
    pub gamma_th: std::result::Result<f64, String>,
    /// superposed channels with post-selection
    pub gamma_s: std::result::Result<f64, String>,
    /// `|γ′(γ_S) − γ_TH|` when both exist
    pub composition_residual: Option<f64>,
}

fn crossing(r: Result<f64>) -> Result<std::result::Result<f64, String>> {
    match r {
        Ok(g) => Ok(Ok(g)),
        Err(Error::NoCrossing(why)) => Ok(Err(why)),
        Err(e) => Err(e),
    }
}

pub fn threshold_report(p: &Protocol) -> Result<ThresholdReport> {
    let w_cl = crate::climit::classical_limit(p)?;
    let gamma_th = crossing(threshold_gamma(
        |g| average_work(p, &dephasing_channel(g)?),
        w_cl,
    ))?;
    let gamma_s = crossing(threshold_gamma(|g| average_work_superposed(p, g), w_cl))?;
    let composition_residual = match (&gamma_th, &gamma_s) {
        (Ok(t), Ok(s)) => Some((gamma_prime(*s) - t).abs()),
        _ => None,
    };
    Ok(ThresholdReport {
        classical_limit: w_cl,
        gamma_th,
        gamma_s,
        composition_residual,
    })
}

impl fmt::Display for ThresholdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "classical limit W_cl = {:.10}", self.classical_limit)?;
        for (name, r) in [("gamma_TH", &self.gamma_th), ("gamma_S ", &self.gamma_s)] {
            match r {
                Ok(g) => writeln!(f, "{name} = {g:.10}")?,
                Err(why) => writeln!(f, "{name}: no crossing ({why})")?,
            }
        }
        if let Some(r) = self.composition_residual {
            writeln!(f, "|gamma'(gamma_S) - gamma_TH| = {r:.3e}")?;
        }
        Ok(())
    }
}

/// Self-check tolerance of printed decompositions.
pub const DECOMPOSITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposeReport {
    pub gamma: f64,
    pub theta: f64,
    pub basis: String,
    pub diagram: String,
    /// `1 − |Tr(U†V)|/8` against the controlled-V reference
    pub deviation: f64,
    pub identity_up_to_phase: bool,
    pub engine_single_qubit_gates: usize,
    pub engine_two_qubit_gates: usize,
    pub engine_pairs: Vec<([usize; 2], usize)>,
}

pub fn basis_name(set: NativeGateSet) -> &'static str {
    match set {
        NativeGateSet::CnotBasis => "cnot",
        NativeGateSet::XxBasis => "xx",
    }
}

pub fn decompose_report(gamma: f64, set: NativeGateSet) -> Result<DecomposeReport> {
    let theta = theta_of_gamma(gamma)?;
    let fragment = controlled_v_fragment(theta, set)?;
    let u = fragment.unitary()?;
    let deviation = 1.0 - phase_insensitive_overlap(&u, &controlled_v_reference(theta));
    if deviation.abs() > DECOMPOSITION_TOL {
        return Err(Error::DecompositionMismatch(deviation));
    }
    let identity_up_to_phase = 1.0 - phase_insensitive_overlap(&u, &identity(8)) <= DECOMPOSITION_TOL;
    let engine = build_engine_circuit(gamma, &Preparation::zero(), Basis::Z, true, set)?;
    let counts = gate_counts(&engine);
    Ok(DecomposeReport {
        gamma,
        theta,
        basis: basis_name(set).into(),
        diagram: render(&fragment, Some(&["C", "W", "E"])),
        deviation,
        identity_up_to_phase,
        engine_single_qubit_gates: counts.single,
        engine_two_qubit_gates: counts.two,
        engine_pairs: counts.pairs.into_iter().map(|((a, b), n)| ([a, b], n)).collect(),
    })
}

impl fmt::Display for DecomposeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "controlled-V fragment, gamma = {}, theta = {:.10}, {} basis",
            self.gamma, self.theta, self.basis
        )?;
        write!(f, "{}", self.diagram)?;
        writeln!(f, "self-check: 1 - |Tr(U^dag V_ref)|/8 = {:.3e}", self.deviation)?;
        if self.identity_up_to_phase {
            writeln!(f, "fragment is the identity up to phase")?;
        }
        writeln!(
            f,
            "engine circuit: {} single-qubit gates, {} two-qubit gates",
            self.engine_single_qubit_gates, self.engine_two_qubit_gates
        )?;
        for ([a, b], n) in &self.engine_pairs {
            writeln!(f, "  pair ({a}, {b}): {n}")?;
        }
        Ok(())
    }
}
