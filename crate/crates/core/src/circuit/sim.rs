//! Density-matrix execution of circuits, measurement statistics, seeded
//! shot sampling and the work estimator built on Pauli measurements of W.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution};

use super::{
    build_engine_circuit, unitary_of, Basis, Circuit, Gate, GateKind, Measurement, NativeGateSet,
    Preparation,
};
use crate::engine::{build_extraction_operators, pauli_coefficients, Protocol};
use crate::error::{Error, Result};
use crate::qcore::{apply_local_kraus, c, hermitian_part, ComplexMatrix};
use crate::superpose::MIN_SUCCESS_PROBABILITY;

/// Anything that turns a circuit into the joint distribution of its
/// measured bits (first measurement is the most significant bit).
pub trait Backend: Sync {
    fn distribution(&self, circuit: &Circuit) -> Result<Vec<f64>>;
}

/// Noise-free execution.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealBackend;

impl Backend for IdealBackend {
    fn distribution(&self, circuit: &Circuit) -> Result<Vec<f64>> {
        let rho = execute(circuit, |_, _| Ok(()))?;
        let rho = rotate_to_computational(&rho, circuit.measurements())?;
        Ok(measured_distribution(&rho, circuit.measurements()))
    }
}

/// Kraus operators resetting a qubit to `state`.
fn reset_kraus(prep: &Preparation) -> Vec<ComplexMatrix> {
    let eig = prep.state.matrix().clone().symmetric_eigen();
    let mut ops = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(i).into_owned() * c(lam.sqrt(), 0.0);
        for j in 0..2 {
            let mut k = ComplexMatrix::zeros(2, 2);
            k.set_column(j, &v);
            ops.push(k);
        }
    }
    ops
}

/// Runs the gates from `|0…0⟩`, calling `after` once after every unitary
/// gate. Preparations reset their wire and are not reported to `after`.
pub fn execute<F>(circuit: &Circuit, mut after: F) -> Result<ComplexMatrix>
where
    F: FnMut(&Gate, &mut ComplexMatrix) -> Result<()>,
{
    let dim = 1usize << circuit.qubits();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    rho[(0, 0)] = c(1.0, 0.0);
    for g in circuit.gates() {
        if let GateKind::Prepare(p) = &g.kind {
            rho = apply_local_kraus(&rho, &reset_kraus(p), &g.wires)?;
            continue;
        }
        rho = apply_local_kraus(&rho, &[unitary_of(g)?], &g.wires)?;
        after(g, &mut rho)?;
    }
    Ok(hermitian_part(&rho))
}

/// Ideal basis changes so that every measurement reads the computational basis.
pub fn rotate_to_computational(rho: &ComplexMatrix, ms: &[Measurement]) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    for m in ms {
        if m.basis != Basis::Z {
            out = apply_local_kraus(&out, &[m.basis.rotation()], &[m.wire])?;
        }
    }
    Ok(out)
}

/// Diagonal of `rho` marginalised onto the measured wires.
pub fn measured_distribution(rho: &ComplexMatrix, ms: &[Measurement]) -> Vec<f64> {
    let dim = rho.nrows();
    let qubits = dim.trailing_zeros() as usize;
    let k = ms.len();
    let mut probs = vec![0.0; 1 << k];
    for g in 0..dim {
        let t = ms.iter().enumerate().fold(0usize, |acc, (j, m)| {
            if g & (1 << (qubits - 1 - m.wire)) != 0 {
                acc | 1 << (k - 1 - j)
            } else {
                acc
            }
        });
        probs[t] += rho[(g, g)].re.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    probs.iter().map(|p| p / total).collect()
}

/// Multinomial counts drawn as a chain of conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let n = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidConfig(format!("binomial sampler: {e}")))?
            .sample(rng);
        counts[i] = n;
        remaining -= n;
        mass -= p;
    }
    Ok(counts)
}

/// Probability of the last measured bit being 1, conditioned on the first
/// bit being 0 when `postselect`. Returns `(p1, kept_weight)`.
pub fn conditional_last_bit(weights: &[f64], postselect: bool) -> (f64, f64) {
    let n = weights.len();
    let (mut w0, mut w1) = (0.0, 0.0);
    for (t, &w) in weights.iter().enumerate() {
        if postselect && n > 2 && t >= n / 2 {
            continue;
        }
        if t & 1 == 1 {
            w1 += w;
        } else {
            w0 += w;
        }
    }
    let kept = w0 + w1;
    (if kept > 0.0 { w1 / kept } else { 0.0 }, kept)
}

/// Distribution and (optionally) sampled counts of one circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcomes {
    pub probabilities: Vec<f64>,
    pub counts: Option<Vec<u64>>,
}

pub fn simulate<B: Backend + ?Sized>(
    backend: &B,
    circuit: &Circuit,
    shots: Option<(u64, &mut ChaCha8Rng)>,
) -> Result<Outcomes> {
    let probabilities = backend.distribution(circuit)?;
    let counts = match shots {
        Some((n, rng)) => Some(sample_counts(&probabilities, n, rng)?),
        None => None,
    };
    Ok(Outcomes {
        probabilities,
        counts,
    })
}

pub fn ideal_simulate(circuit: &Circuit, shots: Option<(u64, u64)>) -> Result<Outcomes> {
    match shots {
        Some((n, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            simulate(&IdealBackend, circuit, Some((n, &mut rng)))
        }
        None => simulate(&IdealBackend, circuit, None),
    }
}

/// Shot budget and seed; `stream` separates independent sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub shots: u64,
    pub seed: u64,
    pub stream: u64,
}

/// One Pauli expectation `⟨σ_basis⟩` of W after preparing `ρ_{a|x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkTerm {
    pub x: usize,
    pub a: usize,
    pub basis: Basis,
    /// weight of `⟨σ_basis⟩` in the average work: `p(a|x) c_basis`
    pub coefficient: f64,
    pub exact: f64,
    pub estimate: f64,
    /// binomial standard error of `estimate` (0 without sampling)
    pub standard_error: f64,
    /// shots kept after post-selection
    pub kept: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkEstimate {
    /// from sampled counts when sampling, otherwise exact
    pub value: f64,
    pub exact: f64,
    /// `Σ p(x)p(a|x) P(C = +)`
    pub success_probability: f64,
    pub terms: Vec<WorkTerm>,
}

const PAULI_CUTOFF: f64 = 1e-14;

/// Average work from measuring W in the Pauli bases that appear in each
/// `F_{a|x}`, with C measured in `σ_x` and optionally post-selected on `+`.
pub fn estimate_work<B: Backend + ?Sized>(
    backend: &B,
    p: &Protocol,
    gamma: f64,
    postselect: bool,
    set: NativeGateSet,
    sampling: Option<Sampling>,
) -> Result<WorkEstimate> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: p.dim(),
        });
    }
    let f = build_extraction_operators(p)?;
    let mut rng = sampling.map(|s| {
        let mut r = ChaCha8Rng::seed_from_u64(s.seed);
        r.set_stream(s.stream);
        r
    });
    let (mut value, mut exact, mut success) = (0.0, 0.0, 0.0);
    let mut terms = Vec::new();
    for (x, a, px, o) in p.outcomes() {
        if o.probability == 0.0 {
            continue;
        }
        let label = format!("{}|{}", o.label, p.settings()[x].label);
        let prep = Preparation::new(label, o.state.clone())?;
        let [ci, cx, cy, cz] = pauli_coefficients(f.get(x, a)?);
        value += o.probability * ci;
        exact += o.probability * ci;
        let mut bases: Vec<(Basis, f64)> = [(Basis::X, cx), (Basis::Y, cy), (Basis::Z, cz)]
            .into_iter()
            .filter(|(_, k)| k.abs() > PAULI_CUTOFF)
            .collect();
        let success_only = bases.is_empty();
        if success_only {
            bases.push((Basis::Z, 0.0));
        }
        for (i, (basis, coeff)) in bases.into_iter().enumerate() {
            let circuit = build_engine_circuit(gamma, &prep, basis, postselect, set)?;
            let probs = backend.distribution(&circuit)?;
            if i == 0 {
                success += px * o.probability * (probs[0] + probs[1]);
            }
            if success_only {
                continue;
            }
            let (p1, kept_mass) = conditional_last_bit(&probs, postselect);
            if kept_mass < MIN_SUCCESS_PROBABILITY {
                return Err(Error::PostSelectionImpossible(kept_mass));
            }
            let ex = 1.0 - 2.0 * p1;
            let (est, se, kept) = match (&mut rng, sampling) {
                (Some(r), Some(s)) => {
                    let counts = sample_counts(&probs, s.shots, r)?;
                    let w: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
                    let (q1, kept) = conditional_last_bit(&w, postselect);
                    if kept == 0.0 {
                        return Err(Error::PostSelectionImpossible(0.0));
                    }
                    let se = 2.0 * (p1 * (1.0 - p1) / kept).sqrt();
                    (1.0 - 2.0 * q1, se, kept as u64)
                }
                _ => (ex, 0.0, 0),
            };
            let weight = o.probability * coeff;
            value += weight * est;
            exact += weight * ex;
            terms.push(WorkTerm {
                x,
                a,
                basis,
                coefficient: weight,
                exact: ex,
                estimate: est,
                standard_error: se,
                kept,
            });
        }
    }
    let total_weight: f64 = p
        .outcomes()
        .filter(|(_, _, _, o)| o.probability > 0.0)
        .map(|(_, _, px, o)| px * o.probability)
        .sum();
    Ok(WorkEstimate {
        value,
        exact,
        success_probability: success / total_weight,
        terms,
    })
}
