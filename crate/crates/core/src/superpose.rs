//! The second demon: two dephasing channels dilated onto environments
//! E₀, E₁, routed coherently by a control qubit C, followed by Charlie's
//! selective σ_x measurement on C.
//!
//! Wires of the routed process are (C, W, E₀, E₁) = (0, 1, 2, 3). Both
//! environments start in `|0⟩` and are traced out right after routing.

use crate::engine::{average_work_with, Protocol};
use crate::error::{check_range, Error, Result};
use crate::qcore::{
    c, embed, hermitian_part, identity, ket_plus, partial_trace_matrix, projector, tensor_product, ComplexMatrix, DensityMatrix, ONE, ZERO,
};

/// Below this success probability post-selection is reported as impossible.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-14;

/// Stinespring unitary `V_{W,E}(θ)` on the (W, E) pair with `γ = 1 − cos θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationUnitary {
    pub matrix: ComplexMatrix,
    pub theta: f64,
}

/// `θ = arccos(1 − γ)`, in `[0, π/2]` for `γ ∈ [0, 1]`.
pub fn theta_of_gamma(gamma: f64) -> Result<f64> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    Ok((1.0 - gamma).acos())
}

/// `V|0⟩_W|0⟩_E = √(1−γ/2)|00⟩ − i√(γ/2)|01⟩`,
/// `V|1⟩_W|0⟩_E = √(1−γ/2)|10⟩ + i√(γ/2)|11⟩`, completed to the unitary
/// `cos(θ/2)𝟙 − i sin(θ/2) σ_z⊗σ_x`.
pub fn dilation_unitary(gamma: f64) -> Result<DilationUnitary> {
    let theta = theta_of_gamma(gamma)?;
    let (s, co) = (theta / 2.0).sin_cos();
    let mut v = ComplexMatrix::zeros(4, 4);
    for (w, sign) in [(0usize, -1.0), (1usize, 1.0)] {
        let b = 2 * w;
        v[(b, b)] = c(co, 0.0);
        v[(b + 1, b + 1)] = c(co, 0.0);
        v[(b, b + 1)] = c(0.0, sign * s);
        v[(b + 1, b)] = c(0.0, sign * s);
    }
    Ok(DilationUnitary { matrix: v, theta })
}

/// `V_T = |0⟩⟨0|_C ⊗ V_{W,E₀} + |1⟩⟨1|_C ⊗ V_{W,E₁}` on (C, W, E₀, E₁).
pub fn routed_unitary(gamma: f64) -> Result<ComplexMatrix> {
    let v = dilation_unitary(gamma)?.matrix;
    let p0 = ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
    let p1 = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    let branch0 = embed(&p0, &[0], 4)? * embed(&v, &[1, 2], 4)?;
    let branch1 = embed(&p1, &[0], 4)? * embed(&v, &[1, 3], 4)?;
    Ok(branch0 + branch1)
}

/// What Charlie does with the control after routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Discard C without measuring it.
    TraceOut,
    /// Measure σ_x on C and keep only the `|+⟩` outcome.
    KeepPlus,
}

/// Dilation, routing and (optional) selection as a single process on W.
#[derive(Debug, Clone)]
pub struct RoutedProcess {
    pub control: DensityMatrix,
    pub v_total: ComplexMatrix,
    pub selection: Selection,
}

impl RoutedProcess {
    pub fn new(gamma: f64, control: DensityMatrix, selection: Selection) -> Result<Self> {
        if control.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: control.dim(),
            });
        }
        Ok(Self {
            control,
            v_total: routed_unitary(gamma)?,
            selection,
        })
    }

    /// Control prepared in `|+⟩`, the configuration of the two-demon engine.
    pub fn superposed(gamma: f64, selection: Selection) -> Result<Self> {
        Self::new(gamma, DensityMatrix::pure(&ket_plus())?, selection)
    }

    /// Joint (C, W) operator after routing, for any input operator on W.
    /// Linear in `m`.
    pub fn joint_operator(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.nrows(),
            });
        }
        let env = DensityMatrix::basis(&[0, 0]);
        let input = tensor_product(&tensor_product(self.control.matrix(), m), env.matrix());
        let out = &self.v_total * input * self.v_total.adjoint();
        partial_trace_matrix(&out, &[0, 1])
    }

    /// Unnormalised W operator after selection (`Λ₊(m)` when keeping `|+⟩`).
    pub fn selected_operator(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let joint = self.joint_operator(m)?;
        match self.selection {
            Selection::TraceOut => partial_trace_matrix(&joint, &[1]),
            Selection::KeepPlus => project_control_plus(&joint),
        }
    }

    /// Normalised output state on W and the probability that the selection
    /// succeeded.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
        match self.selection {
            Selection::TraceOut => {
                let out = partial_trace_matrix(&self.joint_operator(rho.matrix())?, &[1])?;
                Ok((DensityMatrix::from_trusted(hermitian_part(&out)), 1.0))
            }
            Selection::KeepPlus => {
                let joint = DensityMatrix::from_trusted(self.joint_operator(rho.matrix())?);
                postselect_plus(&joint)
            }
        }
    }
}

/// `Tr_C[(|+⟩⟨+| ⊗ 𝟙) ρ_CW (|+⟩⟨+| ⊗ 𝟙)]`.
fn project_control_plus(rho_cw: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho_cw.nrows() != 4 || rho_cw.ncols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho_cw.nrows(),
        });
    }
    let p = tensor_product(&projector(&ket_plus()), &identity(2));
    partial_trace_matrix(&(&p * rho_cw * &p), &[1])
}

/// Joint state of C and W after routing `rho` with environments in `|0⟩`.
pub fn joint_output(rho: &DensityMatrix, gamma: f64, control: &DensityMatrix) -> Result<DensityMatrix> {
    let process = RoutedProcess::new(gamma, control.clone(), Selection::TraceOut)?;
    let joint = process.joint_operator(rho.matrix())?;
    Ok(DensityMatrix::from_trusted(hermitian_part(&joint)))
}

/// Keeps the `|+⟩_C` outcome: returns `Λ₊(ρ)/Tr[Λ₊(ρ)]` and `Tr[Λ₊(ρ)]`.
pub fn postselect_plus(rho_cw: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let kept = project_control_plus(rho_cw.matrix())?;
    let success = kept.trace().re;
    if success < MIN_SUCCESS_PROBABILITY {
        return Err(Error::PostSelectionImpossible(success));
    }
    Ok((
        DensityMatrix::from_trusted(hermitian_part(&kept.unscale(success))),
        success,
    ))
}

/// Effective dephasing strength after post-selection, `γ′ = 2γ/(4 − γ)`.
pub fn gamma_prime(gamma: f64) -> f64 {
    2.0 * gamma / (4.0 - gamma)
}

/// Inverse of [`gamma_prime`]: `γ = 4γ′/(2 + γ′)`.
pub fn gamma_from_prime(gamma_prime: f64) -> f64 {
    4.0 * gamma_prime / (2.0 + gamma_prime)
}

/// Average work with the post-selected superposition of two dephasing
/// channels, evaluated through the full dilation pipeline.
pub fn average_work_superposed(p: &Protocol, gamma: f64) -> Result<f64> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: p.dim(),
        });
    }
    let process = RoutedProcess::superposed(gamma, Selection::KeepPlus)?;
    average_work_with(p, |rho| process.apply(rho).map(|(out, _)| out))
}

/// Post-selection success probability averaged over Alice's preparations,
/// `Σ_{x,a} p(x) p(a|x) Tr[Λ₊(ρ_{a|x})]`.
pub fn mean_success_probability(p: &Protocol, gamma: f64) -> Result<f64> {
    let process = RoutedProcess::superposed(gamma, Selection::KeepPlus)?;
    let mut total = 0.0;
    for (_, _, px, o) in p.outcomes() {
        total += px * o.probability * process.selected_operator(o.state.matrix())?.trace().re;
    }
    Ok(total)
}
