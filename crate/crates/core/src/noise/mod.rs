//! Device noise: amplitude damping and dephasing during every gate, a
//! depolarizing error after two-qubit gates, and readout bit flips.
//!
//! Gates run one after another and every wire decoheres for the duration
//! of each gate.

pub mod profile;

use std::collections::BTreeMap;

use crate::circuit::sim::{measured_distribution, rotate_to_computational, Backend};
use crate::circuit::{gate_counts, Circuit, Gate};
use crate::engine::{average_work_with, Protocol};
use crate::error::{check_range, Error, Result};
use crate::qcore::{
    apply_local_kraus, c, hermitian_part, identity, kron_all, paulis, qubits_for_dim, sigma_x,
    sigma_z, ComplexMatrix, DensityMatrix,
};

pub use profile::{DeviceProfile, QubitNoiseParams, TwoQubitGateParams};

/// Kraus operators of `exp(L t)` on one qubit: amplitude damping with
/// `p = 1 − e^{−η_T1 t}` followed by dephasing with coherence factor
/// `e^{−2η_T2 t}`.
pub fn lindblad_kraus(params: &QubitNoiseParams, duration: f64) -> Result<Vec<ComplexMatrix>> {
    check_range("duration", duration, 0.0, f64::INFINITY)?;
    let decay = (-params.t1_rate_per_ns * duration).exp();
    let lambda = (-2.0 * params.t2_rate_per_ns * duration).exp();
    let mut a0 = identity(2);
    a0[(1, 1)] = c(decay.sqrt(), 0.0);
    let mut a1 = ComplexMatrix::zeros(2, 2);
    a1[(0, 1)] = c((1.0 - decay).sqrt(), 0.0);
    let k0 = identity(2).scale(((1.0 + lambda) / 2.0).sqrt());
    let k1 = sigma_z().scale(((1.0 - lambda) / 2.0).sqrt());
    let mut ops = Vec::with_capacity(4);
    for k in [&k0, &k1] {
        for a in [&a0, &a1] {
            let m = k * a;
            if m.iter().any(|z| z.norm() > 0.0) {
                ops.push(m);
            }
        }
    }
    Ok(ops)
}

/// `exp(L t)` on every wire, wire `w` using `params[w]`.
pub fn lindblad_propagate_matrix(
    rho: &ComplexMatrix,
    params: &[QubitNoiseParams],
    duration: f64,
) -> Result<ComplexMatrix> {
    let qubits = qubits_for_dim(rho.nrows())?;
    if params.len() != qubits {
        return Err(Error::DimensionMismatch {
            expected: qubits,
            found: params.len(),
        });
    }
    if duration == 0.0 {
        return Ok(rho.clone());
    }
    let mut out = rho.clone();
    for (w, p) in params.iter().enumerate() {
        out = apply_local_kraus(&out, &lindblad_kraus(p, duration)?, &[w])?;
    }
    Ok(hermitian_part(&out))
}

pub fn lindblad_propagate(
    rho: &DensityMatrix,
    params: &[QubitNoiseParams],
    duration: f64,
) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(lindblad_propagate_matrix(
        rho.matrix(),
        params,
        duration,
    )?))
}

/// All `4^k` Pauli strings on `k` qubits.
fn pauli_strings(k: usize) -> Vec<ComplexMatrix> {
    let mut single = vec![identity(2)];
    single.extend(paulis());
    let mut out = vec![identity(1)];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|m| single.iter().map(move |p| kron_all(&[m.clone(), p.clone()])))
            .collect();
    }
    out
}

/// Kraus form of `ρ ↦ (1−p)ρ + p (𝟙/d ⊗ Tr_gate ρ)` on `k` wires, as a
/// Pauli twirl.
pub fn depolarizing_kraus(k: usize, p: f64) -> Result<Vec<ComplexMatrix>> {
    check_range("p_GE", p, 0.0, 1.0)?;
    let n = (1usize << (2 * k)) as f64;
    let strings = pauli_strings(k);
    let mut ops = Vec::with_capacity(strings.len());
    for (i, s) in strings.into_iter().enumerate() {
        let w = if i == 0 { 1.0 - p + p / n } else { p / n };
        if w > 0.0 {
            ops.push(s.scale(w.sqrt()));
        }
    }
    Ok(ops)
}

pub fn depolarize_gate(rho: &ComplexMatrix, wires: &[usize], p: f64) -> Result<ComplexMatrix> {
    if p == 0.0 {
        return Ok(rho.clone());
    }
    apply_local_kraus(rho, &depolarizing_kraus(wires.len(), p)?, wires)
}

/// `ρ ↦ (1−Γ)ρ + Γ σ_x ρ σ_x` on `wire`.
pub fn readout_flip(rho: &ComplexMatrix, wire: usize, gamma_ro: f64) -> Result<ComplexMatrix> {
    check_range("readout error", gamma_ro, 0.0, 1.0)?;
    if gamma_ro == 0.0 {
        return Ok(rho.clone());
    }
    let ops = [
        identity(2).scale((1.0 - gamma_ro).sqrt()),
        sigma_x().scale(gamma_ro.sqrt()),
    ];
    apply_local_kraus(rho, &ops, &[wire])
}

/// Executes circuits under a device profile (wire `w` is profile qubit `w`).
#[derive(Debug, Clone)]
pub struct NoisyBackend {
    pub profile: DeviceProfile,
}

impl NoisyBackend {
    pub fn new(profile: DeviceProfile) -> Self {
        Self { profile }
    }

    fn wire_params(&self, qubits: usize) -> Result<Vec<QubitNoiseParams>> {
        (0..qubits).map(|w| self.profile.qubit(w).copied()).collect()
    }

    /// State before measurement: every gate followed by decoherence of all
    /// wires and, for two-qubit gates, the depolarizing error.
    pub fn final_state(&self, circuit: &Circuit) -> Result<ComplexMatrix> {
        let params = self.wire_params(circuit.qubits())?;
        crate::circuit::sim::execute(circuit, |g: &Gate, rho| {
            let t = self.profile.gate_time(g)?;
            *rho = lindblad_propagate_matrix(rho, &params, t)?;
            if g.is_two_qubit() {
                let p = self.profile.two_qubit(g.wires[0], g.wires[1])?.error_rate;
                *rho = depolarize_gate(rho, &g.wires, p)?;
            }
            Ok(())
        })
    }
}

impl Backend for NoisyBackend {
    fn distribution(&self, circuit: &Circuit) -> Result<Vec<f64>> {
        let rho = self.final_state(circuit)?;
        let mut rho = rotate_to_computational(&rho, circuit.measurements())?;
        for m in circuit.measurements() {
            rho = readout_flip(&rho, m.wire, self.profile.readout_error(m.wire)?)?;
        }
        Ok(measured_distribution(&rho, circuit.measurements()))
    }
}

pub fn noisy_simulate(circuit: &Circuit, profile: &DeviceProfile) -> Result<Vec<f64>> {
    NoisyBackend::new(profile.clone()).distribution(circuit)
}

/// Timing and two-qubit gate usage of a circuit on a device.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitStats {
    /// serial execution time in ns
    pub total_time_ns: f64,
    pub single_qubit_gates: usize,
    pub two_qubit_gates: usize,
    /// two-qubit gates touching the work wire, per wire pair
    pub work_pairs: BTreeMap<(usize, usize), usize>,
    pub work_wire: usize,
}

impl CircuitStats {
    pub fn of(circuit: &Circuit, profile: &DeviceProfile, work_wire: usize) -> Result<Self> {
        let counts = gate_counts(circuit);
        let total_time_ns = circuit
            .gates()
            .iter()
            .map(|g| profile.gate_time(g))
            .sum::<Result<f64>>()?;
        Ok(Self {
            total_time_ns,
            single_qubit_gates: counts.single,
            two_qubit_gates: counts.two,
            work_pairs: counts
                .pairs
                .into_iter()
                .filter(|&((a, b), _)| a == work_wire || b == work_wire)
                .collect(),
            work_wire,
        })
    }
}

/// Error budget of the work wire, as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    /// `1 − W̄_noisy/W̄_ideal` from relaxation and dephasing over the total time
    pub relaxation: f64,
    /// `1 − Π (1 − p_GE)^count` over two-qubit gates on the work wire
    pub gate: f64,
    pub readout: f64,
    /// `1 − (1 − relaxation)(1 − gate)(1 − readout)`
    pub total: f64,
    /// `W̄` with only relaxation and dephasing of the work wire
    pub relaxed_work: f64,
}

/// Average work of `p` with no channel other than the work wire's Lindblad
/// evolution over `duration`.
pub fn relaxed_work(p: &Protocol, params: &QubitNoiseParams, duration: f64) -> Result<f64> {
    average_work_with(p, |rho| lindblad_propagate(rho, std::slice::from_ref(params), duration))
}

pub fn effective_error_rates(
    p: &Protocol,
    profile: &DeviceProfile,
    stats: &CircuitStats,
) -> Result<ErrorBudget> {
    let params = profile.qubit(stats.work_wire)?;
    let ideal = average_work_with(p, |rho| Ok(rho.clone()))?;
    let noisy = relaxed_work(p, params, stats.total_time_ns)?;
    let relaxation = if ideal == 0.0 { 0.0 } else { 1.0 - noisy / ideal };
    let mut survival = 1.0;
    for (&(a, b), &n) in &stats.work_pairs {
        survival *= (1.0 - profile.two_qubit(a, b)?.error_rate).powi(n as i32);
    }
    let gate = 1.0 - survival;
    let readout = profile.readout_error(stats.work_wire)?;
    let total = 1.0 - (1.0 - relaxation) * (1.0 - gate) * (1.0 - readout);
    Ok(ErrorBudget {
        relaxation,
        gate,
        readout,
        total,
        relaxed_work: noisy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::{estimate_work, IdealBackend};
    use crate::circuit::{build_engine_circuit, Basis, GateKind, NativeGateSet, Preparation, WORK};
    use crate::qcore::random::{random_density_matrix, seeded_rng};
    use crate::qcore::{max_abs, min_eigenvalue, KrausChannel};
    use profile::QubitId;

    fn params(t1: f64, t2: f64) -> QubitNoiseParams {
        QubitNoiseParams {
            id: QubitId::Index(0),
            t1_rate_per_ns: t1,
            t2_rate_per_ns: t2,
            single_qubit_gate_time_ns: 10.0,
            readout_error: None,
        }
    }

    /// RK4 integration of the master equation, as an independent oracle.
    fn rk4(rho: &ComplexMatrix, t1: f64, t2: f64, t: f64, steps: usize) -> ComplexMatrix {
        let mut sm = ComplexMatrix::zeros(2, 2);
        sm[(0, 1)] = c(1.0, 0.0);
        let sp = sm.adjoint();
        let spsm = &sp * &sm;
        let z = sigma_z();
        let l = |r: &ComplexMatrix| -> ComplexMatrix {
            (&sm * r * &sp).scale(t1) - (&spsm * r + r * &spsm).scale(t1 / 2.0)
                + (&z * r * &z - r).scale(t2)
        };
        let h = t / steps as f64;
        let mut r = rho.clone();
        for _ in 0..steps {
            let k1 = l(&r);
            let k2 = l(&(&r + k1.scale(h / 2.0)));
            let k3 = l(&(&r + k2.scale(h / 2.0)));
            let k4 = l(&(&r + k3.scale(h)));
            r += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        }
        r
    }

    #[test]
    fn lindblad_matches_rk4() {
        let mut rng = seeded_rng(1);
        for (t1, t2, t) in [(7.62e-6, 2.78e-5, 4820.0), (1e-3, 5e-4, 700.0), (0.0, 1e-3, 50.0)] {
            let rho = random_density_matrix(&mut rng, 1);
            let closed = lindblad_propagate(&rho, &[params(t1, t2)], t).unwrap();
            let num = rk4(rho.matrix(), t1, t2, t, 2000);
            assert!(max_abs(&(closed.matrix() - num)) < 1e-10);
        }
    }

    #[test]
    fn lindblad_edge_cases() {
        let rho = DensityMatrix::basis(&[1]);
        let same = lindblad_propagate(&rho, &[params(1.0, 1.0)], 0.0).unwrap();
        assert_eq!(same, rho);
        let half = lindblad_propagate(&rho, &[params(2f64.ln(), 0.0)], 1.0).unwrap();
        assert!(max_abs(&(half.matrix() - identity(2).scale(0.5))) < 1e-15);
        assert!(lindblad_propagate(&rho, &[params(1.0, 1.0)], -1.0).is_err());
        assert!(lindblad_propagate(&rho, &[], 1.0).is_err());
        // coherence decays at η_T1/2 + 2η_T2
        let plus = DensityMatrix::pure(&crate::qcore::ket_plus()).unwrap();
        let (t1, t2, t) = (0.3, 0.2, 1.7);
        let out = lindblad_propagate(&plus, &[params(t1, t2)], t).unwrap();
        assert!((out.matrix()[(0, 1)].re - 0.5 * (-(t1 / 2.0 + 2.0 * t2) * t).exp()).abs() < 1e-15);
    }

    #[test]
    fn noise_maps_are_cptp() {
        let mut rng = seeded_rng(2);
        let lind = KrausChannel::new(lindblad_kraus(&params(1e-3, 2e-3), 321.0).unwrap()).unwrap();
        let dep = KrausChannel::new(depolarizing_kraus(2, 0.37).unwrap()).unwrap();
        assert!(lind.completeness_error() < 1e-14);
        assert!(dep.completeness_error() < 1e-14);
        for _ in 0..1000 {
            let rho = random_density_matrix(&mut rng, 2);
            let m = lindblad_propagate_matrix(
                rho.matrix(),
                &[params(1e-3, 2e-3), params(4e-3, 1e-4)],
                123.0,
            )
            .unwrap();
            let m = depolarize_gate(&m, &[1, 0], 0.2).unwrap();
            let m = readout_flip(&m, 1, 0.1).unwrap();
            assert!((m.trace().re - 1.0).abs() < 1e-10);
            assert!(min_eigenvalue(&m) > -1e-10);
        }
    }

    #[test]
    fn depolarizing_limits() {
        let mut rng = seeded_rng(3);
        let rho = random_density_matrix(&mut rng, 2);
        assert_eq!(depolarize_gate(rho.matrix(), &[0, 1], 0.0).unwrap(), *rho.matrix());
        let full = depolarize_gate(rho.matrix(), &[0, 1], 1.0).unwrap();
        assert!(max_abs(&(full - identity(4).scale(0.25))) < 1e-14);
        // on part of a larger system the rest keeps its marginal
        let rho3 = random_density_matrix(&mut rng, 3);
        let out = depolarize_gate(rho3.matrix(), &[0, 2], 1.0).unwrap();
        let rest = crate::qcore::partial_trace_matrix(rho3.matrix(), &[1]).unwrap();
        let expected = kron_all(&[identity(2).scale(0.5), rest, identity(2).scale(0.5)]);
        assert!(max_abs(&(out - expected)) < 1e-14);
        assert!(depolarize_gate(rho.matrix(), &[0, 1], 1.2).is_err());
    }

    #[test]
    fn repeated_depolarizing_compounds() {
        // the untouched weight after n applications is (1 − p)^n
        let p = 0.0304;
        let mut rho = DensityMatrix::basis(&[0, 0]).into_matrix();
        for _ in 0..8 {
            rho = depolarize_gate(&rho, &[0, 1], p).unwrap();
        }
        let survival = (1.0 - p).powi(8);
        let expected = survival + (1.0 - survival) / 4.0;
        assert!((rho[(0, 0)].re - expected).abs() < 1e-14);
        assert!(((1.0 - survival) - 0.2188).abs() < 5e-5);
    }

    #[test]
    fn readout_flip_values() {
        let zero = DensityMatrix::basis(&[0]).into_matrix();
        assert_eq!(readout_flip(&zero, 0, 0.0).unwrap(), zero);
        let half = readout_flip(&zero, 0, 0.5).unwrap();
        assert!((half[(0, 0)].re - 0.5).abs() < 1e-15 && (half[(1, 1)].re - 0.5).abs() < 1e-15);
        let q0 = readout_flip(&zero, 0, 0.0195).unwrap();
        assert!((q0[(1, 1)].re - 0.0195).abs() < 1e-15);
    }

    #[test]
    fn noiseless_profile_equals_ideal() {
        let backend = NoisyBackend::new(DeviceProfile::noiseless());
        for prep in [Preparation::zero(), Preparation::plus()] {
            for basis in [Basis::X, Basis::Z] {
                let c = build_engine_circuit(0.37, &prep, basis, true, NativeGateSet::CnotBasis).unwrap();
                let a = backend.distribution(&c).unwrap();
                let b = IdealBackend.distribution(&c).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn idle_circuit_is_a_semigroup() {
        let profile = DeviceProfile::ibmq_jakarta();
        let backend = NoisyBackend::new(profile.clone());
        let mut rng = seeded_rng(4);
        let psi = crate::qcore::random::random_pure_state(&mut rng, 2);
        let prep = Preparation::new("psi", DensityMatrix::pure(&psi).unwrap()).unwrap();
        let mut c = Circuit::new(4);
        c.push(Gate::new(GateKind::Prepare(prep.clone()), vec![1]).unwrap()).unwrap();
        let n = 40;
        for i in 0..n {
            c.push(Gate::new(GateKind::Id, vec![i % 4]).unwrap()).unwrap();
        }
        let rho = backend.final_state(&c).unwrap();
        let all: Vec<QubitNoiseParams> = (0..4).map(|w| *profile.qubit(w).unwrap()).collect();
        let start = DensityMatrix::basis(&[0, 0, 0, 0]).into_matrix();
        let start = apply_local_kraus(&start, &[crate::qcore::from_rows(&[
            [psi[0], crate::qcore::ZERO],
            [psi[1], crate::qcore::ZERO],
        ])], &[1])
        .unwrap();
        let direct = lindblad_propagate_matrix(&start, &all, n as f64 * 35.56).unwrap();
        assert!(max_abs(&(rho - direct)) < 1e-12);
    }

    #[test]
    fn desk_check_single_wire() {
        let p = Protocol::canonical();
        let ibm = DeviceProfile::ibmq_jakarta();
        let w = relaxed_work(&p, ibm.qubit(WORK).unwrap(), 4.82e3).unwrap();
        // W̄ = (3e + c − 2)/4 with e = e^{−η1 T}, c = e^{−(η1/2+2η2) T}
        let closed = |q: &QubitNoiseParams, t: f64| {
            let e = (-q.t1_rate_per_ns * t).exp();
            let co = (-(q.t1_rate_per_ns / 2.0 + 2.0 * q.t2_rate_per_ns) * t).exp();
            (3.0 * e + co - 2.0) / 4.0
        };
        assert!((w - closed(ibm.qubit(WORK).unwrap(), 4.82e3)).abs() < 1e-14);
        assert!((w - 0.4107).abs() < 5e-4);
        let ion = DeviceProfile::ionq();
        let w = relaxed_work(&p, ion.qubit(WORK).unwrap(), 1.98e6).unwrap();
        assert!((w - 0.4974).abs() < 5e-4);
    }

    #[test]
    fn error_budgets() {
        let p = Protocol::canonical();
        for (profile, time, rel, gate, total) in [
            (DeviceProfile::ibmq_jakarta(), 4.82e3, 0.1786, 0.0618, 0.2457),
            (DeviceProfile::ionq(), 1.98e6, 0.0052, 0.2188, 0.2259),
        ] {
            let set = profile.native_gate_set();
            let c = build_engine_circuit(0.0, &Preparation::zero(), Basis::Z, false, set).unwrap();
            let mut stats = CircuitStats::of(&c, &profile, WORK).unwrap();
            stats.total_time_ns = time;
            let b = effective_error_rates(&p, &profile, &stats).unwrap();
            assert!((b.relaxation - rel).abs() < 1e-4, "{} {}", profile.name, b.relaxation);
            assert!((b.gate - gate).abs() < 1e-4, "{} {}", profile.name, b.gate);
            assert!((b.total - total).abs() < 1e-4, "{} {}", profile.name, b.total);
        }
        let quiet = DeviceProfile::noiseless();
        let c = build_engine_circuit(0.0, &Preparation::zero(), Basis::Z, false, NativeGateSet::XxBasis)
            .unwrap();
        let stats = CircuitStats::of(&c, &quiet, WORK).unwrap();
        let b = effective_error_rates(&p, &quiet, &stats).unwrap();
        assert_eq!((b.relaxation, b.gate, b.readout, b.total), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn noisy_work_stays_below_ideal() {
        let p = Protocol::canonical();
        for profile in [DeviceProfile::ibmq_jakarta(), DeviceProfile::ionq()] {
            let set = profile.native_gate_set();
            let backend = NoisyBackend::new(profile);
            for g in [0.0, 0.3, 0.7, 1.0] {
                for post in [false, true] {
                    let noisy = estimate_work(&backend, &p, g, post, set, None).unwrap().value;
                    let ideal = estimate_work(&IdealBackend, &p, g, post, set, None).unwrap().value;
                    assert!(noisy <= ideal + 1e-12);
                }
            }
        }
    }

    #[test]
    fn disconnected_pair_is_rejected() {
        let backend = NoisyBackend::new(DeviceProfile::ibmq_jakarta());
        let mut c = Circuit::new(4);
        c.push(Gate::new(GateKind::Cnot, vec![0, 2]).unwrap()).unwrap();
        assert!(matches!(
            backend.distribution(&c),
            Err(Error::UnknownGatePair(0, 2))
        ));
    }
}
