//! Device profiles: per-qubit relaxation/dephasing rates, gate times and
//! readout errors, plus two-qubit gate entries and connectivity.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, NativeGateSet};
use crate::error::{Error, Result};

const IBMQ_JAKARTA: &str = include_str!("../../data/ibmq_jakarta.json");
const IONQ: &str = include_str!("../../data/ionq.json");

pub const DEFAULT_SHOTS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QubitId {
    Index(usize),
    Named(AllQubits),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllQubits {
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitNoiseParams {
    pub id: QubitId,
    /// `η_T1` in 1/ns
    pub t1_rate_per_ns: f64,
    /// `η_T2` in 1/ns
    pub t2_rate_per_ns: f64,
    pub single_qubit_gate_time_ns: f64,
    #[serde(default)]
    pub readout_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GatePair {
    Pair([usize; 2]),
    Any(AnyPair),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnyPair {
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitGateParams {
    pub qubits: GatePair,
    pub gate_time_ns: f64,
    /// `p_GE`
    pub error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Connectivity {
    Full(FullConnectivity),
    Pairs(Vec<[usize; 2]>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FullConnectivity {
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_shots: Option<u64>,
    pub qubits: Vec<QubitNoiseParams>,
    pub two_qubit_gates: Vec<TwoQubitGateParams>,
    pub connectivity: Connectivity,
}

fn check_nonnegative(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{what} must be finite and >= 0, got {v}")))
    }
}

fn check_probability(what: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{what} must lie in [0, 1], got {v}")))
    }
}

impl DeviceProfile {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidProfile(format!("cannot parse profile: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn ibmq_jakarta() -> Self {
        Self::from_json(IBMQ_JAKARTA).expect("bundled profile is valid")
    }

    pub fn ionq() -> Self {
        Self::from_json(IONQ).expect("bundled profile is valid")
    }

    /// Bundled profile by name (`ibmq_jakarta`/`ibmq`, `ionq`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ibmq_jakarta" | "ibmq" => Some(Self::ibmq_jakarta()),
            "ionq" => Some(Self::ionq()),
            _ => None,
        }
    }

    /// Every rate, time and error zero; full connectivity.
    pub fn noiseless() -> Self {
        Self {
            name: "noiseless".into(),
            default_shots: None,
            qubits: vec![QubitNoiseParams {
                id: QubitId::Named(AllQubits::All),
                t1_rate_per_ns: 0.0,
                t2_rate_per_ns: 0.0,
                single_qubit_gate_time_ns: 0.0,
                readout_error: None,
            }],
            two_qubit_gates: vec![TwoQubitGateParams {
                qubits: GatePair::Any(AnyPair::Any),
                gate_time_ns: 0.0,
                error_rate: 0.0,
            }],
            connectivity: Connectivity::Full(FullConnectivity::Full),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::InvalidProfile("no qubits listed".into()));
        }
        for q in &self.qubits {
            let id = match q.id {
                QubitId::Index(i) => i.to_string(),
                QubitId::Named(_) => "all".into(),
            };
            check_nonnegative(&format!("t1_rate_per_ns of qubit {id}"), q.t1_rate_per_ns)?;
            check_nonnegative(&format!("t2_rate_per_ns of qubit {id}"), q.t2_rate_per_ns)?;
            check_nonnegative(
                &format!("single_qubit_gate_time_ns of qubit {id}"),
                q.single_qubit_gate_time_ns,
            )?;
            if let Some(r) = q.readout_error {
                check_probability(&format!("readout_error of qubit {id}"), r)?;
            }
        }
        for g in &self.two_qubit_gates {
            check_nonnegative("gate_time_ns", g.gate_time_ns)?;
            check_probability("error_rate", g.error_rate)?;
            if let GatePair::Pair([a, b]) = g.qubits {
                if a == b {
                    return Err(Error::InvalidProfile(format!("gate pair ({a}, {b})")));
                }
            }
        }
        if self.default_shots == Some(0) {
            return Err(Error::InvalidProfile("default_shots must be positive".into()));
        }
        Ok(())
    }

    pub fn qubit(&self, wire: usize) -> Result<&QubitNoiseParams> {
        self.qubits
            .iter()
            .find(|q| q.id == QubitId::Index(wire))
            .or_else(|| {
                self.qubits
                    .iter()
                    .find(|q| q.id == QubitId::Named(AllQubits::All))
            })
            .ok_or(Error::MissingQubit(wire))
    }

    pub fn is_connected(&self, a: usize, b: usize) -> bool {
        match &self.connectivity {
            Connectivity::Full(_) => true,
            Connectivity::Pairs(pairs) => pairs
                .iter()
                .any(|&[i, j]| (i, j) == (a, b) || (j, i) == (a, b)),
        }
    }

    pub fn two_qubit(&self, a: usize, b: usize) -> Result<&TwoQubitGateParams> {
        if !self.is_connected(a, b) {
            return Err(Error::UnknownGatePair(a, b));
        }
        self.two_qubit_gates
            .iter()
            .find(|g| match g.qubits {
                GatePair::Pair([i, j]) => (i, j) == (a, b) || (j, i) == (a, b),
                GatePair::Any(_) => false,
            })
            .or_else(|| {
                self.two_qubit_gates
                    .iter()
                    .find(|g| matches!(g.qubits, GatePair::Any(_)))
            })
            .ok_or(Error::UnknownGatePair(a, b))
    }

    /// Duration of a gate; preparations take no time.
    pub fn gate_time(&self, g: &Gate) -> Result<f64> {
        if g.is_preparation() {
            return Ok(0.0);
        }
        match g.wires.as_slice() {
            [w] => Ok(self.qubit(*w)?.single_qubit_gate_time_ns),
            [a, b] => Ok(self.two_qubit(*a, *b)?.gate_time_ns),
            _ => Err(Error::InvalidWires(g.to_string())),
        }
    }

    pub fn readout_error(&self, wire: usize) -> Result<f64> {
        Ok(self.qubit(wire)?.readout_error.unwrap_or(0.0))
    }

    pub fn shots(&self) -> u64 {
        self.default_shots.unwrap_or(DEFAULT_SHOTS)
    }

    /// Fully connected devices run the XX basis, the rest the CNOT basis.
    pub fn native_gate_set(&self) -> NativeGateSet {
        match self.connectivity {
            Connectivity::Full(_) => NativeGateSet::XxBasis,
            Connectivity::Pairs(_) => NativeGateSet::CnotBasis,
        }
    }
}
