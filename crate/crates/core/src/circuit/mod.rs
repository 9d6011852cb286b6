//! Gate-level description of the engine: gates, circuits, the decomposition
//! of the controlled dilation into native gate sets, and the four-wire
//! engine circuit on (C, W, E₀, E₁).

pub mod diagram;
pub mod sim;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::qcore::{
    c, embed, hadamard, identity, ket_plus, sigma_x, sigma_z, tensor_product, ComplexMatrix,
    DensityMatrix, ONE, ZERO,
};

pub use crate::superpose::theta_of_gamma;

/// Wire indices of the engine circuit.
pub const CONTROL: usize = 0;
pub const WORK: usize = 1;
pub const ENV0: usize = 2;
pub const ENV1: usize = 3;
pub const ENGINE_QUBITS: usize = 4;

/// Directly prepared single-qubit state (a zero-duration, noise-free tag).
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub label: String,
    pub state: DensityMatrix,
}

impl Preparation {
    pub fn new(label: impl Into<String>, state: DensityMatrix) -> Result<Self> {
        if state.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: state.dim(),
            });
        }
        Ok(Self {
            label: label.into(),
            state,
        })
    }

    pub fn zero() -> Self {
        Self {
            label: "0".into(),
            state: DensityMatrix::basis(&[0]),
        }
    }

    pub fn plus() -> Self {
        Self {
            label: "+".into(),
            state: DensityMatrix::from_trusted(crate::qcore::projector(&ket_plus())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    /// Idle step: identity for the gate duration.
    Id,
    CZ,
    /// Control is the first wire.
    Cnot,
    Xx(f64),
    P(f64),
    U3(f64, f64, f64),
    U1,
    U2,
    /// `u(θ) = P(θ/2)`
    UTheta(f64),
    Prepare(Preparation),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::CZ | GateKind::Cnot | GateKind::Xx(_) => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GateKind::H => "H".into(),
            GateKind::X => "X".into(),
            GateKind::Z => "Z".into(),
            GateKind::Id => "I".into(),
            GateKind::CZ => "CZ".into(),
            GateKind::Cnot => "CNOT".into(),
            GateKind::Xx(t) => format!("XX({:.4})", t + 0.0),
            GateKind::P(t) => format!("P({t:.4})"),
            GateKind::U3(t, p, l) => format!("U3({t:.4},{p:.4},{l:.4})"),
            GateKind::U1 => "u1".into(),
            GateKind::U2 => "u2".into(),
            GateKind::UTheta(t) => format!("u({:.4})", t + 0.0),
            GateKind::Prepare(p) => format!("|{}>", p.label),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub wires: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, wires: Vec<usize>) -> Result<Self> {
        if wires.len() != kind.arity() {
            return Err(Error::InvalidWires(format!(
                "{} acts on {} wires, got {}",
                kind.name(),
                kind.arity(),
                wires.len()
            )));
        }
        if wires.len() == 2 && wires[0] == wires[1] {
            return Err(Error::InvalidWires(format!("{} on repeated wire", kind.name())));
        }
        Ok(Self { kind, wires })
    }

    fn one(kind: GateKind, w: usize) -> Self {
        Self { kind, wires: vec![w] }
    }

    fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self {
            kind,
            wires: vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.wires.len() == 2
    }

    pub fn is_preparation(&self) -> bool {
        matches!(self.kind, GateKind::Prepare(_))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wires: Vec<String> = self.wires.iter().map(|w| w.to_string()).collect();
        write!(f, "{} q[{}]", self.kind.name(), wires.join(","))
    }
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = |a: f64| c(a.cos(), a.sin());
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            c(co, 0.0),
            -e(lambda) * s,
            e(phi) * s,
            e(phi + lambda) * co,
        ],
    )
}

pub fn phase_gate(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(theta.cos(), theta.sin())])
}

/// `XX(θ) = cos(θ/2) 𝟙⊗𝟙 − i sin(θ/2) σ_x⊗σ_x`
pub fn xx_gate(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    identity(4).scale(co) - tensor_product(&sigma_x(), &sigma_x()) * c(0.0, s)
}

pub fn cz_gate() -> ComplexMatrix {
    let mut m = identity(4);
    m[(3, 3)] = c(-1.0, 0.0);
    m
}

pub fn cnot_gate() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub fn unitary_of(g: &Gate) -> Result<ComplexMatrix> {
    Ok(match &g.kind {
        GateKind::H => hadamard(),
        GateKind::X => sigma_x(),
        GateKind::Z => sigma_z(),
        GateKind::Id => identity(2),
        GateKind::CZ => cz_gate(),
        GateKind::Cnot => cnot_gate(),
        GateKind::Xx(t) => xx_gate(*t),
        GateKind::P(t) => phase_gate(*t),
        GateKind::U3(t, p, l) => u3(*t, *p, *l),
        GateKind::U1 => u3(FRAC_PI_2, PI, FRAC_PI_2),
        GateKind::U2 => u3(FRAC_PI_2, FRAC_PI_2, 0.0),
        GateKind::UTheta(t) => phase_gate(t / 2.0),
        GateKind::Prepare(_) => return Err(Error::NoUnitary(g.kind.name())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn label(&self) -> &'static str {
        match self {
            Basis::X => "x",
            Basis::Y => "y",
            Basis::Z => "z",
        }
    }

    /// Rotation taking this basis to the computational basis.
    pub fn rotation(&self) -> ComplexMatrix {
        match self {
            Basis::X => hadamard(),
            Basis::Y => hadamard() * phase_gate(-FRAC_PI_2),
            Basis::Z => identity(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub wire: usize,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
    measurements: Vec<Measurement>,
    /// Keep only runs where measurement `0` returned outcome `0`.
    postselect: bool,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            gates: Vec::new(),
            measurements: Vec::new(),
            postselect: false,
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for &w in &gate.wires {
            if w >= self.qubits {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    qubits: self.qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    pub fn measure(&mut self, wire: usize, basis: Basis) -> Result<()> {
        if wire >= self.qubits {
            return Err(Error::WireOutOfRange {
                wire,
                qubits: self.qubits,
            });
        }
        if self.measurements.iter().any(|m| m.wire == wire) {
            return Err(Error::InvalidWires(format!("wire {wire} measured twice")));
        }
        self.measurements.push(Measurement { wire, basis });
        Ok(())
    }

    pub fn set_postselect(&mut self, on: bool) {
        self.postselect = on;
    }

    pub fn postselect(&self) -> bool {
        self.postselect
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    /// Product of all gate unitaries (preparations are skipped).
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let dim = 1usize << self.qubits;
        let mut u = identity(dim);
        for g in &self.gates {
            if g.is_preparation() {
                continue;
            }
            u = embed(&unitary_of(g)?, &g.wires, self.qubits)? * u;
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NativeGateSet {
    /// CNOT plus single-qubit gates.
    CnotBasis,
    /// Ising XX and CZ plus single-qubit gates.
    XxBasis,
}

impl NativeGateSet {
    pub fn allows(&self, kind: &GateKind) -> bool {
        match (self, kind) {
            (_, k) if k.arity() == 1 => true,
            (NativeGateSet::CnotBasis, GateKind::Cnot) => true,
            (NativeGateSet::XxBasis, GateKind::Xx(_) | GateKind::CZ) => true,
            _ => false,
        }
    }
}

/// `|0⟩⟨0| ⊗ 𝟙 + |1⟩⟨1| ⊗ V_{W,E}(θ)` on (C, W, E).
pub fn controlled_v_reference(theta: f64) -> ComplexMatrix {
    let v = v_of_theta(theta);
    let mut m = identity(8);
    for i in 0..4 {
        for j in 0..4 {
            m[(4 + i, 4 + j)] = v[(i, j)];
        }
    }
    m
}

/// `V_{W,E}(θ) = (H⊗𝟙) XX(θ) (H⊗𝟙)`.
pub fn v_of_theta(theta: f64) -> ComplexMatrix {
    let h = tensor_product(&hadamard(), &identity(2));
    &h * xx_gate(theta) * &h
}

/// `XX(φ)` on (a, b) from two CNOTs and `u₂`, `P(−φ)`, `u₁` on `a`.
fn xx_via_cnot(phi: f64, a: usize, b: usize) -> Vec<Gate> {
    vec![
        Gate::two(GateKind::Cnot, a, b),
        Gate::one(GateKind::U2, a),
        Gate::one(GateKind::UTheta(-2.0 * phi), a),
        Gate::one(GateKind::U1, a),
        Gate::two(GateKind::Cnot, a, b),
    ]
}

fn cz_in(set: NativeGateSet, ctrl: usize, target: usize) -> Vec<Gate> {
    match set {
        NativeGateSet::XxBasis => vec![Gate::two(GateKind::CZ, ctrl, target)],
        NativeGateSet::CnotBasis => vec![
            Gate::one(GateKind::H, target),
            Gate::two(GateKind::Cnot, ctrl, target),
            Gate::one(GateKind::H, target),
        ],
    }
}

fn xx_in(set: NativeGateSet, phi: f64, a: usize, b: usize) -> Vec<Gate> {
    match set {
        NativeGateSet::XxBasis => vec![Gate::two(GateKind::Xx(phi), a, b)],
        NativeGateSet::CnotBasis => xx_via_cnot(phi, a, b),
    }
}

/// Controlled-`V_{W,E}(θ)` on wires `(ctrl, work, env)` in a native gate set:
/// `H(W)`, controlled-`XX(θ)` as `CZ · XX(−θ/2) · CZ · XX(θ/2)`, `H(W)`.
pub fn decompose_controlled_v(
    theta: f64,
    set: NativeGateSet,
    ctrl: usize,
    work: usize,
    env: usize,
) -> Vec<Gate> {
    let mut out = vec![Gate::one(GateKind::H, work)];
    out.extend(cz_in(set, ctrl, work));
    out.extend(xx_in(set, -theta / 2.0, work, env));
    out.extend(cz_in(set, ctrl, work));
    out.extend(xx_in(set, theta / 2.0, work, env));
    out.push(Gate::one(GateKind::H, work));
    out
}

/// Three-qubit circuit holding only the decomposed controlled-V.
pub fn controlled_v_fragment(theta: f64, set: NativeGateSet) -> Result<Circuit> {
    let mut c = Circuit::new(3);
    c.extend(decompose_controlled_v(theta, set, 0, 1, 2))?;
    Ok(c)
}

/// The engine circuit: preparations, `V_T` as two controlled blocks (the
/// first conjugated by `X` on C so it fires on `|0⟩_C`), then `σ_x` on C and
/// `basis` on W.
pub fn build_engine_circuit(
    gamma: f64,
    prep: &Preparation,
    basis: Basis,
    postselect: bool,
    set: NativeGateSet,
) -> Result<Circuit> {
    let theta = theta_of_gamma(gamma)?;
    let mut c = Circuit::new(ENGINE_QUBITS);
    c.push(Gate::one(GateKind::Prepare(Preparation::plus()), CONTROL))?;
    c.push(Gate::one(GateKind::Prepare(prep.clone()), WORK))?;
    c.push(Gate::one(GateKind::Prepare(Preparation::zero()), ENV0))?;
    c.push(Gate::one(GateKind::Prepare(Preparation::zero()), ENV1))?;
    c.push(Gate::one(GateKind::X, CONTROL))?;
    c.extend(decompose_controlled_v(theta, set, CONTROL, WORK, ENV0))?;
    c.push(Gate::one(GateKind::X, CONTROL))?;
    c.extend(decompose_controlled_v(theta, set, CONTROL, WORK, ENV1))?;
    c.measure(CONTROL, Basis::X)?;
    c.measure(WORK, basis)?;
    c.set_postselect(postselect);
    Ok(c)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub single: usize,
    pub two: usize,
    /// two-qubit gates per unordered wire pair
    pub pairs: BTreeMap<(usize, usize), usize>,
}

/// Counts unitary gates; preparations are not gates on hardware here.
pub fn gate_counts(c: &Circuit) -> GateCounts {
    let mut counts = GateCounts::default();
    for g in c.gates() {
        if g.is_preparation() {
            continue;
        }
        if g.is_two_qubit() {
            counts.two += 1;
            let (a, b) = (g.wires[0].min(g.wires[1]), g.wires[0].max(g.wires[1]));
            *counts.pairs.entry((a, b)).or_default() += 1;
        } else {
            counts.single += 1;
        }
    }
    counts
}
