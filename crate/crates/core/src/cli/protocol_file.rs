//! JSON encoding of protocols. Matrix entries are either a real number or a
//! `[re, im]` pair.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{MeasurementSetting, Outcome, Protocol};
use crate::error::{Error, Result};
use crate::qcore::{c, ComplexMatrix, DensityMatrix};

pub const CANONICAL: &str = include_str!("../../data/canonical.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

pub type MatrixRows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFile {
    pub label: String,
    pub probability: f64,
    pub state: MatrixRows,
    pub extraction: MatrixRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingFile {
    pub label: String,
    pub probability: f64,
    pub outcomes: Vec<OutcomeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub hamiltonian: MatrixRows,
    pub bath_state: MatrixRows,
    pub settings: Vec<SettingFile>,
}

fn to_matrix(rows: &MatrixRows, what: &str) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidProtocol(format!("{what} must be a non-empty square matrix")));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = match *e {
                Entry::Real(re) => c(re, 0.0),
                Entry::Complex([re, im]) => c(re, im),
            };
        }
    }
    Ok(m)
}

fn from_matrix(m: &ComplexMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    if z.im == 0.0 {
                        Entry::Real(z.re)
                    } else {
                        Entry::Complex([z.re, z.im])
                    }
                })
                .collect()
        })
        .collect()
}

impl ProtocolFile {
    pub fn from_protocol(p: &Protocol) -> Self {
        Self {
            hamiltonian: from_matrix(p.hamiltonian()),
            bath_state: from_matrix(p.bath_state().matrix()),
            settings: p
                .settings()
                .iter()
                .map(|s| SettingFile {
                    label: s.label.clone(),
                    probability: s.probability,
                    outcomes: s
                        .outcomes
                        .iter()
                        .map(|o| OutcomeFile {
                            label: o.label.clone(),
                            probability: o.probability,
                            state: from_matrix(o.state.matrix()),
                            extraction: from_matrix(&o.extraction),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_protocol(&self) -> Result<Protocol> {
        let settings = self
            .settings
            .iter()
            .map(|s| {
                let outcomes = s
                    .outcomes
                    .iter()
                    .map(|o| {
                        let what = format!("state of {}|{}", o.label, s.label);
                        let state = DensityMatrix::new(to_matrix(&o.state, &what)?)?;
                        let what = format!("extraction of {}|{}", o.label, s.label);
                        Outcome::new(&o.label, o.probability, state, to_matrix(&o.extraction, &what)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                MeasurementSetting::new(&s.label, s.probability, outcomes)
            })
            .collect::<Result<Vec<_>>>()?;
        Protocol::new(
            settings,
            to_matrix(&self.hamiltonian, "hamiltonian")?,
            DensityMatrix::new(to_matrix(&self.bath_state, "bath_state")?)?,
        )
    }
}

pub fn parse_protocol(text: &str) -> Result<Protocol> {
    let file: ProtocolFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidProtocol(format!("cannot parse protocol: {e}")))?;
    file.to_protocol()
}

pub fn load_protocol(path: &Path) -> Result<Protocol> {
    parse_protocol(&std::fs::read_to_string(path)?)
}

pub fn protocol_to_json(p: &Protocol) -> String {
    serde_json::to_string_pretty(&ProtocolFile::from_protocol(p)).expect("protocol serializes")
}
