//! Single-demon work extraction: Alice's measurement settings, Bob's
//! extraction unitaries, the extraction operators
//! `F_{a|x} = p(x)(H_W − U†H_W U)`, and average work through a channel.

use crate::error::{check_range, Error, Result};
use crate::qcore::{
    c, hadamard, hermiticity_error, identity, is_unitary, ket0, ket1, ket_minus, ket_plus,
    max_abs, projector, sigma_x, sigma_z, unitarity_error, ComplexMatrix, DensityMatrix,
    KrausChannel, StateVector, C64, HERMITIAN_TOL,
};

/// Tolerance on the preparation consistency `Σ_a p(a|x) ρ_{a|x} = ρ_W` and
/// on probability normalisation when loading protocols.
pub const PROTOCOL_TOL: f64 = 1e-9;

/// One outcome `a` of a measurement `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    /// `p(a|x)`
    pub probability: f64,
    /// post-measurement state `ρ_{a|x}`
    pub state: DensityMatrix,
    /// Bob's extraction unitary `U_{a|x}`
    pub extraction: ComplexMatrix,
}

impl Outcome {
    pub fn new(
        label: impl Into<String>,
        probability: f64,
        state: DensityMatrix,
        extraction: ComplexMatrix,
    ) -> Result<Self> {
        let label = label.into();
        check_range("p(a|x)", probability, 0.0, 1.0)?;
        if extraction.nrows() != state.dim() || extraction.ncols() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: extraction.nrows(),
            });
        }
        if !is_unitary(&extraction, 1e-12) {
            return Err(Error::NotUnitary {
                what: format!("U for outcome {label}"),
                deviation: unitarity_error(&extraction),
            });
        }
        Ok(Self {
            label,
            probability,
            state,
            extraction,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    pub label: String,
    /// `p(x)`
    pub probability: f64,
    pub outcomes: Vec<Outcome>,
}

impl MeasurementSetting {
    pub fn new(label: impl Into<String>, probability: f64, outcomes: Vec<Outcome>) -> Result<Self> {
        let label = label.into();
        check_range("p(x)", probability, 0.0, 1.0)?;
        if outcomes.is_empty() {
            return Err(Error::InvalidProtocol(format!("setting {label} has no outcomes")));
        }
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        if (total - 1.0).abs() > PROTOCOL_TOL {
            return Err(Error::InvalidProtocol(format!(
                "outcome probabilities of {label} sum to {total}"
            )));
        }
        Ok(Self {
            label,
            probability,
            outcomes,
        })
    }
}

/// A work-extraction protocol: Alice's settings, the work-medium Hamiltonian
/// and the bath state.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    settings: Vec<MeasurementSetting>,
    hamiltonian: ComplexMatrix,
    bath_state: DensityMatrix,
}

impl Protocol {
    pub fn new(
        settings: Vec<MeasurementSetting>,
        hamiltonian: ComplexMatrix,
        bath_state: DensityMatrix,
    ) -> Result<Self> {
        let dim = bath_state.dim();
        if settings.is_empty() {
            return Err(Error::InvalidProtocol("no measurement settings".into()));
        }
        if hamiltonian.nrows() != dim || hamiltonian.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.nrows(),
            });
        }
        let herr = hermiticity_error(&hamiltonian);
        if herr > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herr));
        }
        let px: f64 = settings.iter().map(|s| s.probability).sum();
        if (px - 1.0).abs() > PROTOCOL_TOL {
            return Err(Error::InvalidProtocol(format!(
                "setting probabilities sum to {px}"
            )));
        }
        for s in &settings {
            let mut avg = ComplexMatrix::zeros(dim, dim);
            for o in &s.outcomes {
                if o.state.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: o.state.dim(),
                    });
                }
                avg += o.state.matrix().scale(o.probability);
            }
            let dev = max_abs(&(avg - bath_state.matrix()));
            if dev > PROTOCOL_TOL {
                return Err(Error::InvalidProtocol(format!(
                    "setting {} does not average to the bath state (deviation {dev:.3e})",
                    s.label
                )));
            }
        }
        Ok(Self {
            settings,
            hamiltonian,
            bath_state,
        })
    }

    /// Alice measures σ_z or σ_x with equal probability on the
    /// infinite-temperature state `𝟙/2`; Bob rotates each post-measurement
    /// state to `|0⟩`. `H_W = |1⟩⟨1|`.
    pub fn canonical() -> Self {
        let pure = |v: StateVector| DensityMatrix::pure(&v).expect("normalized");
        let outcome = |label: &str, v: StateVector, u: ComplexMatrix| {
            Outcome::new(label, 0.5, pure(v), u).expect("canonical outcome")
        };
        let z = MeasurementSetting::new(
            "sigma_z",
            0.5,
            vec![
                outcome("+1", ket0(), identity(2)),
                outcome("-1", ket1(), sigma_x()),
            ],
        )
        .expect("canonical setting");
        let x = MeasurementSetting::new(
            "sigma_x",
            0.5,
            vec![
                outcome("+1", ket_plus(), hadamard()),
                outcome("-1", ket_minus(), sigma_x() * hadamard()),
            ],
        )
        .expect("canonical setting");
        Self::new(
            vec![z, x],
            projector(&ket1()),
            DensityMatrix::maximally_mixed(1),
        )
        .expect("canonical protocol")
    }

    pub fn settings(&self) -> &[MeasurementSetting] {
        &self.settings
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn bath_state(&self) -> &DensityMatrix {
        &self.bath_state
    }

    pub fn dim(&self) -> usize {
        self.bath_state.dim()
    }

    pub fn outcome(&self, x: usize, a: usize) -> Result<&Outcome> {
        self.settings
            .get(x)
            .and_then(|s| s.outcomes.get(a))
            .ok_or(Error::UnknownOutcome { x, a })
    }

    /// Same protocol with `H_W` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            settings: self.settings.clone(),
            hamiltonian: self.hamiltonian.scale(factor),
            bath_state: self.bath_state.clone(),
        }
    }

    /// Iterator over `(x, a, p(x), outcome)`.
    pub fn outcomes(&self) -> impl Iterator<Item = (usize, usize, f64, &Outcome)> {
        self.settings.iter().enumerate().flat_map(|(x, s)| {
            s.outcomes
                .iter()
                .enumerate()
                .map(move |(a, o)| (x, a, s.probability, o))
        })
    }
}

/// `F_{a|x}` indexed as `[x][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionOperators {
    ops: Vec<Vec<ComplexMatrix>>,
}

impl ExtractionOperators {
    pub fn get(&self, x: usize, a: usize) -> Result<&ComplexMatrix> {
        self.ops
            .get(x)
            .and_then(|v| v.get(a))
            .ok_or(Error::UnknownOutcome { x, a })
    }

    pub fn settings(&self) -> &[Vec<ComplexMatrix>] {
        &self.ops
    }

    /// Every operator multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ops: self
                .ops
                .iter()
                .map(|v| v.iter().map(|f| f.scale(factor)).collect())
                .collect(),
        }
    }
}

pub fn build_extraction_operators(p: &Protocol) -> Result<ExtractionOperators> {
    let h = p.hamiltonian();
    let ops = p
        .settings()
        .iter()
        .map(|s| {
            s.outcomes
                .iter()
                .map(|o| {
                    let u = &o.extraction;
                    if !is_unitary(u, 1e-12) {
                        return Err(Error::NotUnitary {
                            what: format!("U for {}|{}", o.label, s.label),
                            deviation: unitarity_error(u),
                        });
                    }
                    let f = (h - u.adjoint() * h * u).scale(s.probability);
                    Ok((&f + f.adjoint()).scale(0.5))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtractionOperators { ops })
}

/// Qubit unitary `U = |0⟩⟨ψ| + |1⟩⟨ψ⊥|` with `U|ψ⟩ = |0⟩` (up to phase).
///
/// `ψ⊥` is the orthogonal complement rotated so its first nonzero component
/// is real and positive.
pub fn optimal_extraction_unitary(psi: &StateVector) -> Result<ComplexMatrix> {
    if psi.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: psi.len(),
        });
    }
    let norm = psi.norm();
    if norm < 1e-300 {
        return Err(Error::ZeroVector);
    }
    let psi = psi / C64::from(norm);
    let mut perp = StateVector::from_vec(vec![-psi[1].conj(), psi[0].conj()]);
    let lead = if perp[0].norm() > 1e-15 { perp[0] } else { perp[1] };
    perp *= lead.conj() / C64::from(lead.norm());
    let mut u = ComplexMatrix::zeros(2, 2);
    for j in 0..2 {
        u[(0, j)] = psi[j].conj();
        u[(1, j)] = perp[j].conj();
    }
    Ok(u)
}

/// Pure dephasing `Λ_γ(ρ) = (1−γ/2)ρ + (γ/2)σ_zρσ_z` in Kraus form
/// `K₀ = √(1−γ/2)𝟙`, `K₁ = −i√(γ/2)σ_z`.
pub fn dephasing_channel(gamma: f64) -> Result<KrausChannel> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    if gamma == 0.0 {
        return Ok(KrausChannel::identity(2));
    }
    let k0 = identity(2).scale((1.0 - gamma / 2.0).sqrt());
    let k1 = sigma_z() * c(0.0, -(gamma / 2.0).sqrt());
    KrausChannel::new(vec![k0, k1])
}

/// `Tr[H Λ(ρ_{a|x})] − Tr[H U Λ(ρ_{a|x}) U†]` for setting `x`, outcome `a`.
pub fn delta_work(p: &Protocol, x: usize, a: usize, channel: &KrausChannel) -> Result<f64> {
    let o = p.outcome(x, a)?;
    let out = channel.apply(&o.state)?;
    let h = p.hamiltonian();
    let u = &o.extraction;
    let before = (h * out.matrix()).trace().re;
    let after = (h * u * out.matrix() * u.adjoint()).trace().re;
    Ok(before - after)
}

/// `Σ_{a,x} Tr[p(a|x) F_{a|x} M(ρ_{a|x})]` for an arbitrary state map `M`.
pub fn average_work_with<M>(p: &Protocol, mut map: M) -> Result<f64>
where
    M: FnMut(&DensityMatrix) -> Result<DensityMatrix>,
{
    let f = build_extraction_operators(p)?;
    let mut total = 0.0;
    for (x, a, _, o) in p.outcomes() {
        if o.probability == 0.0 {
            continue;
        }
        let out = map(&o.state)?;
        if out.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: out.dim(),
            });
        }
        total += o.probability * (f.get(x, a)? * out.matrix()).trace().re;
    }
    Ok(total)
}

pub fn average_work(p: &Protocol, channel: &KrausChannel) -> Result<f64> {
    if channel.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: channel.dim(),
        });
    }
    average_work_with(p, |rho| channel.apply(rho))
}

/// Dephasing strength at which a decreasing work curve meets `w_cl`,
/// by bisection on `[0, 1]` to below 1e-9.
pub fn threshold_gamma<F>(mut work: F, w_cl: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let f_lo = work(lo)? - w_cl;
    let f_hi = work(hi)? - w_cl;
    if f_lo < 0.0 {
        return Err(Error::NoCrossing(format!(
            "work at gamma=0 is already below {w_cl}"
        )));
    }
    if f_hi > 0.0 {
        return Err(Error::NoCrossing(format!(
            "work stays above {w_cl} on [0, 1]"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if work(mid)? - w_cl > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `2×2` Pauli decomposition `(c_I, c_x, c_y, c_z)` of a Hermitian operator.
pub fn pauli_coefficients(m: &ComplexMatrix) -> [f64; 4] {
    let [sx, sy, sz] = crate::qcore::paulis();
    [
        0.5 * m.trace().re,
        0.5 * (m * sx).trace().re,
        0.5 * (m * sy).trace().re,
        0.5 * (m * sz).trace().re,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{random_density_matrix, random_pure_state, seeded_rng};
    use crate::qcore::{expectation, max_abs, ZERO};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn canonical_extraction_operators() {
        let f = build_extraction_operators(&Protocol::canonical()).unwrap();
        let (sz, sx) = (sigma_z(), sigma_x());
        assert!(close(f.get(0, 0).unwrap(), &ComplexMatrix::zeros(2, 2), 1e-15));
        assert!(close(f.get(0, 1).unwrap(), &sz.scale(-0.5), 1e-15));
        assert!(close(f.get(1, 0).unwrap(), &(&sz - &sx).scale(-0.25), 1e-15));
        assert!(close(f.get(1, 1).unwrap(), &(&sz + &sx).scale(-0.25), 1e-15));
        for v in f.settings() {
            for m in v {
                assert!(hermiticity_error(m) < 1e-15);
            }
        }
        assert!(matches!(f.get(2, 0), Err(Error::UnknownOutcome { x: 2, a: 0 })));
    }

    #[test]
    fn extraction_unitaries_match_canonical() {
        assert!(close(&optimal_extraction_unitary(&ket1()).unwrap(), &sigma_x(), 1e-15));
        assert!(close(&optimal_extraction_unitary(&ket_plus()).unwrap(), &hadamard(), 1e-15));
        assert!(close(&optimal_extraction_unitary(&ket0()).unwrap(), &identity(2), 1e-15));
        assert!(close(
            &optimal_extraction_unitary(&ket_minus()).unwrap(),
            &(sigma_x() * hadamard()),
            1e-15
        ));
        let zero = StateVector::from_vec(vec![ZERO, ZERO]);
        assert!(matches!(optimal_extraction_unitary(&zero), Err(Error::ZeroVector)));
    }

    #[test]
    fn extraction_unitary_maps_random_states_to_ground() {
        let mut rng = seeded_rng(3);
        for _ in 0..200 {
            let psi = random_pure_state(&mut rng, 2);
            let u = optimal_extraction_unitary(&psi).unwrap();
            assert!(is_unitary(&u, 1e-13));
            let out = &u * &psi;
            assert!((out[0].norm() - 1.0).abs() < 1e-13);
            assert!(out[1].norm() < 1e-13);
        }
    }

    #[test]
    fn dephasing_edge_cases() {
        assert_eq!(dephasing_channel(0.0).unwrap().kraus_ops().len(), 1);
        assert!(dephasing_channel(-0.1).is_err());
        assert!(dephasing_channel(1.5).is_err());
        assert!(dephasing_channel(f64::NAN).is_err());
        let plus = DensityMatrix::pure(&ket_plus()).unwrap();
        let full = dephasing_channel(1.0).unwrap().apply(&plus).unwrap();
        assert!(close(full.matrix(), &identity(2).scale(0.5), 1e-15));
        let one = DensityMatrix::basis(&[1]);
        for g in [0.0, 0.3, 1.0] {
            let out = dephasing_channel(g).unwrap().apply(&one).unwrap();
            assert!(close(out.matrix(), one.matrix(), 1e-15));
        }
    }

    #[test]
    fn dephasing_matches_closed_form_on_random_states() {
        let mut rng = seeded_rng(5);
        let sz = sigma_z();
        for i in 0..=20 {
            let g = i as f64 / 20.0;
            let ch = dephasing_channel(g).unwrap();
            let plus = DensityMatrix::pure(&ket_plus()).unwrap();
            let sx_exp = expectation(&sigma_x(), &ch.apply(&plus).unwrap()).unwrap();
            assert!((sx_exp - (1.0 - g)).abs() < 1e-14);
            for _ in 0..10 {
                let rho = random_density_matrix(&mut rng, 1);
                let m = rho.matrix();
                let direct = m.scale(1.0 - g / 2.0) + (&sz * m * &sz).scale(g / 2.0);
                assert!(close(ch.apply(&rho).unwrap().matrix(), &direct, 1e-14));
            }
        }
    }

    #[test]
    fn delta_work_examples() {
        let p = Protocol::canonical();
        let id = dephasing_channel(0.0).unwrap();
        assert!((delta_work(&p, 0, 1, &id).unwrap() - 1.0).abs() < 1e-15);
        for g in [0.0, 0.4, 1.0] {
            let ch = dephasing_channel(g).unwrap();
            assert!(delta_work(&p, 0, 0, &ch).unwrap().abs() < 1e-15);
            // |+⟩ dephased: ⟨H⟩ = 1/2, after H rotation ⟨H⟩ = (1 − (1−γ))/2 = γ/2
            let dw = delta_work(&p, 1, 0, &ch).unwrap();
            assert!((dw - (1.0 - g) / 2.0).abs() < 1e-14, "{g}: {dw}");
        }
        assert!(matches!(
            delta_work(&p, 0, 5, &id),
            Err(Error::UnknownOutcome { .. })
        ));
    }

    #[test]
    fn average_work_closed_form() {
        let p = Protocol::canonical();
        for i in 0..=100 {
            let g = i as f64 / 100.0;
            let w = average_work(&p, &dephasing_channel(g).unwrap()).unwrap();
            assert!((w - (2.0 - g) / 4.0).abs() < 1e-12);
        }
        assert!((average_work(&p, &dephasing_channel(0.0).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        assert!((average_work(&p, &dephasing_channel(1.0).unwrap()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn average_work_zero_when_bob_does_nothing() {
        let c = Protocol::canonical();
        let settings = c
            .settings()
            .iter()
            .map(|s| {
                let outs = s
                    .outcomes
                    .iter()
                    .map(|o| Outcome::new(&o.label, o.probability, o.state.clone(), identity(2)).unwrap())
                    .collect();
                MeasurementSetting::new(&s.label, s.probability, outs).unwrap()
            })
            .collect();
        let p = Protocol::new(settings, c.hamiltonian().clone(), c.bath_state().clone()).unwrap();
        let w = average_work(&p, &KrausChannel::identity(2)).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn dephasing_preserves_gibbs_state() {
        let p = Protocol::canonical();
        for i in 0..=100 {
            let ch = dephasing_channel(i as f64 / 100.0).unwrap();
            for s in p.settings() {
                let mut avg = ComplexMatrix::zeros(2, 2);
                for o in &s.outcomes {
                    avg += ch.apply(&o.state).unwrap().matrix().scale(o.probability);
                }
                assert!(close(&avg, p.bath_state().matrix(), 1e-12));
            }
        }
    }

    #[test]
    fn protocol_validation() {
        let c = Protocol::canonical();
        // outcome probabilities that do not sum to one
        let bad = Outcome::new("+", 0.7, DensityMatrix::basis(&[0]), identity(2)).unwrap();
        let other = Outcome::new("-", 0.5, DensityMatrix::basis(&[1]), sigma_x()).unwrap();
        assert!(MeasurementSetting::new("z", 1.0, vec![bad, other]).is_err());
        // not averaging to the bath state
        let skew = MeasurementSetting::new(
            "z",
            1.0,
            vec![
                Outcome::new("+", 0.7, DensityMatrix::basis(&[0]), identity(2)).unwrap(),
                Outcome::new("-", 0.3, DensityMatrix::basis(&[1]), sigma_x()).unwrap(),
            ],
        )
        .unwrap();
        assert!(Protocol::new(vec![skew], c.hamiltonian().clone(), c.bath_state().clone()).is_err());
        // non-unitary extraction
        assert!(matches!(
            Outcome::new("+", 0.5, DensityMatrix::basis(&[0]), identity(2).scale(2.0)),
            Err(Error::NotUnitary { .. })
        ));
        // p(x) not normalised
        let mut settings = c.settings().to_vec();
        settings[0].probability = 0.9;
        assert!(Protocol::new(settings, c.hamiltonian().clone(), c.bath_state().clone()).is_err());
    }

    #[test]
    fn thresholds_for_dephasing_law() {
        let w_cl = 1.0 / (2.0 * 2f64.sqrt());
        let g = threshold_gamma(|g| Ok((2.0 - g) / 4.0), w_cl).unwrap();
        assert!((g - (2.0 - 2f64.sqrt())).abs() < 1e-9);
        assert!(matches!(
            threshold_gamma(|_| Ok(0.6), w_cl),
            Err(Error::NoCrossing(_))
        ));
        assert!(matches!(
            threshold_gamma(|_| Ok(0.1), w_cl),
            Err(Error::NoCrossing(_))
        ));
    }

    #[test]
    fn pauli_coefficients_roundtrip() {
        let f = (sigma_z() - sigma_x()).scale(-0.25);
        let [ci, cx, cy, cz] = pauli_coefficients(&f);
        assert_eq!([ci, cx, cy, cz], [0.0, 0.25, 0.0, -0.25]);
    }
}
