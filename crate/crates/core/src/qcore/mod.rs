//! Dense complex linear algebra and the state/channel primitives shared by
//! every other module.
//!
//! Wire convention: wire 0 is the leftmost tensor factor. For an `n`-qubit
//! operator the basis index of a computational state `|b_0 b_1 ... b_{n-1}⟩`
//! is `Σ b_w 2^(n-1-w)`, so the engine's wires (C, W, E₀, E₁) map to index
//! `8c + 4w + 2e₀ + e₁`.

pub mod random;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn from_rows(rows: &[[C64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[rows[0][0], rows[0][1], rows[1][0], rows[1][1]])
}

pub fn sigma_x() -> ComplexMatrix {
    from_rows(&[[ZERO, ONE], [ONE, ZERO]])
}

pub fn sigma_y() -> ComplexMatrix {
    from_rows(&[[ZERO, -I], [I, ZERO]])
}

pub fn sigma_z() -> ComplexMatrix {
    from_rows(&[[ONE, ZERO], [ZERO, -ONE]])
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    from_rows(&[[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]])
}

/// Pauli matrices in the order σ_x, σ_y, σ_z.
pub fn paulis() -> [ComplexMatrix; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

pub fn ket0() -> StateVector {
    StateVector::from_vec(vec![ONE, ZERO])
}

pub fn ket1() -> StateVector {
    StateVector::from_vec(vec![ZERO, ONE])
}

pub fn ket_plus() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_vec(vec![c(h, 0.0), c(h, 0.0)])
}

pub fn ket_minus() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_vec(vec![c(h, 0.0), c(-h, 0.0)])
}

/// `|v⟩⟨v|` (not normalized).
pub fn projector(v: &StateVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Tensor product of a list of operators, leftmost first.
pub fn kron_all(ops: &[ComplexMatrix]) -> ComplexMatrix {
    ops.iter()
        .fold(identity(1), |acc, op| tensor_product(&acc, op))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.trace()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && hermiticity_error(m) <= tol
}

pub fn unitarity_error(m: &ComplexMatrix) -> f64 {
    max_abs(&(m.adjoint() * m - identity(m.nrows())))
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && unitarity_error(m) <= tol
}

/// Real eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Number of qubits for a `dim`-dimensional space.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotQubitDimension(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn ensure_square(m: &ComplexMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// `|Tr(A†B)| / dim`; equals 1 iff `A = e^{iφ} B` for unitaries.
pub fn phase_insensitive_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a.adjoint() * b).trace().norm() / a.nrows() as f64
}

/// Index bookkeeping for an operator acting on a subset of wires.
///
/// `spread[t]` places the bits of the local index `t` (first listed wire is
/// the most significant) at the positions of `wires` inside a global index.
#[derive(Debug, Clone)]
pub(crate) struct WireLayout {
    pub local_dim: usize,
    /// global index with target bits cleared
    pub base: Vec<usize>,
    /// local index of the target bits of each global index
    pub local: Vec<usize>,
    pub spread: Vec<usize>,
}

impl WireLayout {
    pub fn new(wires: &[usize], qubits: usize) -> Result<Self> {
        for (i, &w) in wires.iter().enumerate() {
            if w >= qubits {
                return Err(Error::WireOutOfRange { wire: w, qubits });
            }
            if wires[..i].contains(&w) {
                return Err(Error::InvalidWires(format!("wire {w} repeated")));
            }
        }
        let k = wires.len();
        let local_dim = 1usize << k;
        let dim = 1usize << qubits;
        let bit = |w: usize| 1usize << (qubits - 1 - w);
        let spread: Vec<usize> = (0..local_dim)
            .map(|t| {
                wires
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| t & (1 << (k - 1 - j)) != 0)
                    .map(|(_, &w)| bit(w))
                    .sum()
            })
            .collect();
        let mask: usize = wires.iter().map(|&w| bit(w)).sum();
        let mut base = Vec::with_capacity(dim);
        let mut local = Vec::with_capacity(dim);
        for g in 0..dim {
            base.push(g & !mask);
            let t = wires
                .iter()
                .enumerate()
                .filter(|(_, &w)| g & bit(w) != 0)
                .map(|(j, _)| 1usize << (k - 1 - j))
                .sum();
            local.push(t);
        }
        Ok(Self {
            local_dim,
            base,
            local,
            spread,
        })
    }
}

/// Full `2^n`-dimensional matrix of `op` acting on `wires`.
pub fn embed(op: &ComplexMatrix, wires: &[usize], qubits: usize) -> Result<ComplexMatrix> {
    let layout = WireLayout::new(wires, qubits)?;
    if op.nrows() != layout.local_dim || op.ncols() != layout.local_dim {
        return Err(Error::DimensionMismatch {
            expected: layout.local_dim,
            found: op.nrows(),
        });
    }
    let dim = 1usize << qubits;
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        if layout.base[i] == layout.base[j] {
            op[(layout.local[i], layout.local[j])]
        } else {
            ZERO
        }
    }))
}

/// `(A ⊗ 𝟙) ρ (B ⊗ 𝟙)†` with `A`, `B` acting on `wires`, without building
/// the full operators.
pub(crate) fn sandwich_local(
    rho: &ComplexMatrix,
    left: &ComplexMatrix,
    right: &ComplexMatrix,
    layout: &WireLayout,
) -> ComplexMatrix {
    let dim = rho.nrows();
    let ld = layout.local_dim;
    // A ρ
    let mut tmp = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        let (bi, ti) = (layout.base[i], layout.local[i]);
        for t in 0..ld {
            let a = left[(ti, t)];
            if a == ZERO {
                continue;
            }
            let row = bi | layout.spread[t];
            for j in 0..dim {
                tmp[(i, j)] += a * rho[(row, j)];
            }
        }
    }
    // (A ρ) B†
    let mut out = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        let (bj, tj) = (layout.base[j], layout.local[j]);
        for t in 0..ld {
            let b = right[(tj, t)].conj();
            if b == ZERO {
                continue;
            }
            let col = bj | layout.spread[t];
            for i in 0..dim {
                out[(i, j)] += tmp[(i, col)] * b;
            }
        }
    }
    out
}

/// `Σ_k K_k ρ K_k†` with every `K_k` acting on `wires` of a `2^n` operator.
pub fn apply_local_kraus(
    rho: &ComplexMatrix,
    ops: &[ComplexMatrix],
    wires: &[usize],
) -> Result<ComplexMatrix> {
    ensure_square(rho)?;
    let qubits = qubits_for_dim(rho.nrows())?;
    let layout = WireLayout::new(wires, qubits)?;
    let mut out = ComplexMatrix::zeros(rho.nrows(), rho.nrows());
    for k in ops {
        if k.nrows() != layout.local_dim || k.ncols() != layout.local_dim {
            return Err(Error::DimensionMismatch {
                expected: layout.local_dim,
                found: k.nrows(),
            });
        }
        out += sandwich_local(rho, k, k, &layout);
    }
    Ok(out)
}

/// Partial trace of a `2^n` operator keeping `keep` (result wires in
/// ascending order).
pub fn partial_trace_matrix(m: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    let qubits = qubits_for_dim(m.nrows())?;
    if keep.is_empty() {
        return Err(Error::InvalidWires("keep set is empty".into()));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..qubits).filter(|w| !keep.contains(w)).collect();
    let kept = WireLayout::new(&keep, qubits)?;
    let tr = WireLayout::new(&traced, qubits)?;
    let kd = kept.local_dim;
    Ok(ComplexMatrix::from_fn(kd, kd, |i, j| {
        (0..tr.local_dim)
            .map(|t| m[(kept.spread[i] | tr.spread[t], kept.spread[j] | tr.spread[t])])
            .sum()
    }))
}

/// A Hermitian, unit-trace, positive semidefinite operator on qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    qubits: usize,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let qubits = qubits_for_dim(matrix.nrows())?;
        let herr = hermiticity_error(&matrix);
        if herr > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herr:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = min_eigenvalue(&matrix);
        if min < PSD_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix, qubits })
    }

    /// Wraps a matrix produced by a trace-preserving map of valid states.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let qubits = matrix.nrows().trailing_zeros() as usize;
        Self { matrix, qubits }
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Self::new(projector(&(psi / C64::from(norm))))
    }

    /// `|b_0 … b_{n-1}⟩⟨…|`.
    pub fn basis(bits: &[u8]) -> Self {
        let n = bits.len();
        let idx = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        let mut m = ComplexMatrix::zeros(1 << n, 1 << n);
        m[(idx, idx)] = ONE;
        Self::from_trusted(m)
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let d = 1usize << qubits;
        Self::from_trusted(identity(d).scale(1.0 / d as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_trusted(tensor_product(&self.matrix, &other.matrix))
    }

    /// Applies a unitary `U ρ U†` on the full space.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(DensityMatrix::from_trusted(hermitian_part(
            &(u * &self.matrix * u.adjoint()),
        )))
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(partial_trace_matrix(
        rho.matrix(),
        keep,
    )?))
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidState("channel needs at least one Kraus operator".into()))?;
        ensure_square(first)?;
        let dim = first.nrows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.nrows(),
                });
            }
            sum += k.adjoint() * k;
        }
        let dev = max_abs(&(sum - identity(dim)));
        if dev > TRACE_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { ops })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![identity(dim)],
        }
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// `Σ_k K_k m K_k†` for an arbitrary operator `m`.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.nrows(),
            });
        }
        Ok(self
            .ops
            .iter()
            .map(|k| k * m * k.adjoint())
            .fold(ComplexMatrix::zeros(self.dim(), self.dim()), |acc, x| acc + x))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.matrix())?;
        Ok(DensityMatrix::from_trusted(hermitian_part(&out)))
    }

    /// Max deviation of `Σ K†K` from the identity.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs(&(sum - identity(d)))
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

/// `Tr[obs ρ]` for a Hermitian observable.
pub fn expectation(obs: &ComplexMatrix, rho: &DensityMatrix) -> Result<f64> {
    ensure_square(obs)?;
    if obs.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: obs.nrows(),
        });
    }
    let herr = hermiticity_error(obs);
    if herr > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herr));
    }
    Ok((obs * rho.matrix()).trace().re)
}

/// A positive semidefinite operator with trace at most one, such as an
/// assemblage member `p(a|x) Λ(ρ_{a|x})` or a hidden state `σ_λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubnormalizedState {
    matrix: ComplexMatrix,
}

impl SubnormalizedState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let herr = hermiticity_error(&matrix);
        if herr > 1e-10 {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herr:.3e})"
            )));
        }
        let min = min_eigenvalue(&matrix);
        if min < PSD_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        let w = matrix.trace().re;
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&w) {
            return Err(Error::InvalidState(format!("weight {w} outside [0, 1]")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn weight(&self) -> f64 {
        self.matrix.trace().re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use random::{random_density_matrix, seeded_rng};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && max_abs(&(a - b)) <= tol
    }

    #[test]
    fn tensor_identity() {
        assert_eq!(tensor_product(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn tensor_xx_corner() {
        let xx = tensor_product(&sigma_x(), &sigma_x());
        assert_eq!(xx[(0, 3)], ONE);
        assert_eq!(xx[(3, 0)], ONE);
        assert_eq!(xx[(0, 0)], ZERO);
    }

    #[test]
    fn tensor_mixed_product() {
        let lhs = tensor_product(&sigma_z(), &identity(2)) * tensor_product(&identity(2), &sigma_z());
        // σ_z ⊗ σ_z written out entrywise
        let mut zz = ComplexMatrix::zeros(4, 4);
        for (i, s) in [1.0, -1.0, -1.0, 1.0].into_iter().enumerate() {
            zz[(i, i)] = c(s, 0.0);
        }
        assert!(close(&lhs, &zz, 0.0));
        assert!(close(&tensor_product(&sigma_z(), &sigma_z()), &zz, 0.0));
    }

    #[test]
    fn trace_out_product_state() {
        let rho = DensityMatrix::basis(&[0, 0]);
        let r = partial_trace(&rho, &[0]).unwrap();
        assert!(close(r.matrix(), DensityMatrix::basis(&[0]).matrix(), 0.0));
    }

    #[test]
    fn trace_out_bell_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_vec(vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]);
        let rho = DensityMatrix::pure(&bell).unwrap();
        for keep in [[0], [1]] {
            let r = partial_trace(&rho, &keep).unwrap();
            assert!(close(r.matrix(), &identity(2).scale(0.5), 1e-15));
        }
    }

    #[test]
    fn partial_trace_rejects_bad_wires() {
        let rho = DensityMatrix::basis(&[0, 1]);
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::WireOutOfRange { wire: 2, qubits: 2 })
        ));
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn partial_trace_keeps_nonadjacent_wires_in_order() {
        // |0⟩|1⟩|+⟩ keep wires {0, 2}
        let rho = DensityMatrix::basis(&[0])
            .tensor(&DensityMatrix::basis(&[1]))
            .tensor(&DensityMatrix::pure(&ket_plus()).unwrap());
        let r = partial_trace(&rho, &[2, 0]).unwrap();
        let expected = tensor_product(
            DensityMatrix::basis(&[0]).matrix(),
            &projector(&ket_plus()),
        );
        assert!(close(r.matrix(), &expected, 1e-15));
    }

    #[test]
    fn embed_matches_kron_for_adjacent_wires() {
        let op = tensor_product(&sigma_x(), &sigma_y());
        let full = embed(&op, &[1, 2], 3).unwrap();
        assert!(close(&full, &tensor_product(&identity(2), &op), 0.0));
        // reversed wire order swaps the factors
        let rev = embed(&op, &[2, 1], 3).unwrap();
        let expected = kron_all(&[identity(2), sigma_y(), sigma_x()]);
        assert!(close(&rev, &expected, 0.0));
    }

    #[test]
    fn sandwich_local_matches_full_embedding() {
        let mut rng = seeded_rng(11);
        let rho = random_density_matrix(&mut rng, 3);
        let op = random::random_unitary(&mut rng, 4);
        let layout = WireLayout::new(&[2, 0], 3).unwrap();
        let full = embed(&op, &[2, 0], 3).unwrap();
        let direct = &full * rho.matrix() * full.adjoint();
        let local = sandwich_local(rho.matrix(), &op, &op, &layout);
        assert!(close(&direct, &local, 1e-14));
    }

    #[test]
    fn local_kraus_matches_embedded_channel() {
        let mut rng = seeded_rng(12);
        let rho = random_density_matrix(&mut rng, 3);
        let ch = random::random_channel(&mut rng, 1, 3);
        let local = apply_local_kraus(rho.matrix(), ch.kraus_ops(), &[1]).unwrap();
        let mut direct = ComplexMatrix::zeros(8, 8);
        for k in ch.kraus_ops() {
            let full = embed(k, &[1], 3).unwrap();
            direct += &full * rho.matrix() * full.adjoint();
        }
        assert!(close(&direct, &local, 1e-14));
        assert!(apply_local_kraus(rho.matrix(), &[identity(4)], &[0]).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity(2)).is_err());
        assert!(DensityMatrix::new(sigma_x()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::zeros(3, 3)).is_err());
        let not_psd = from_rows(&[[c(1.5, 0.0), ZERO], [ZERO, c(-0.5, 0.0)]]);
        assert!(DensityMatrix::new(not_psd).is_err());
        assert!(DensityMatrix::new(identity(2).scale(0.5)).is_ok());
    }

    #[test]
    fn expectation_values() {
        let zero = DensityMatrix::basis(&[0]);
        assert_eq!(expectation(&sigma_z(), &zero).unwrap(), 1.0);
        let mixed = DensityMatrix::maximally_mixed(1);
        assert_eq!(expectation(&sigma_z(), &mixed).unwrap(), 0.0);
        let non_herm = from_rows(&[[ZERO, ONE], [ZERO, ZERO]]);
        assert!(matches!(
            expectation(&non_herm, &zero),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn kraus_validation() {
        assert!(KrausChannel::new(vec![identity(2).scale(0.9)]).is_err());
        assert!(KrausChannel::new(vec![identity(2), identity(4)]).is_err());
        assert!(KrausChannel::new(vec![]).is_err());
        let ch = KrausChannel::new(vec![
            identity(2).scale(0.5f64.sqrt()),
            sigma_x().scale(0.5f64.sqrt()),
        ])
        .unwrap();
        assert!(ch.completeness_error() < 1e-15);
        assert!(matches!(
            ch.apply(&DensityMatrix::basis(&[0, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_channel_preserves_trace_and_hermiticity() {
        let mut rng = seeded_rng(7);
        for _ in 0..1000 {
            let ch = random::random_channel(&mut rng, 1, 3);
            assert!(ch.completeness_error() < 1e-12);
            let rho = random_density_matrix(&mut rng, 1);
            let out = ch.apply_matrix(rho.matrix()).unwrap();
            assert!((out.trace() - ONE).norm() < 1e-12);
            assert!(hermiticity_error(&out) < 1e-12);
            assert!(min_eigenvalue(&out) > PSD_FLOOR);
        }
    }

    #[test]
    fn subnormalized_state_bounds() {
        assert!(SubnormalizedState::new(identity(2).scale(0.25)).is_ok());
        assert!(SubnormalizedState::new(identity(2)).is_err());
        assert_eq!(
            SubnormalizedState::new(identity(2).scale(0.25))
                .unwrap()
                .weight(),
            0.5
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::SeedableRng;

        proptest! {
            #[test]
            fn partial_trace_recovers_product_factors(seed in any::<u64>(), na in 1usize..3, nb in 1usize..3) {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let a = random_density_matrix(&mut rng, na);
                let b = random_density_matrix(&mut rng, nb);
                let ab = a.tensor(&b);
                let keep_a: Vec<usize> = (0..na).collect();
                let keep_b: Vec<usize> = (na..na + nb).collect();
                let ra = partial_trace(&ab, &keep_a).unwrap();
                let rb = partial_trace(&ab, &keep_b).unwrap();
                prop_assert!(close(ra.matrix(), a.matrix(), 1e-13));
                prop_assert!(close(rb.matrix(), b.matrix(), 1e-13));
            }

            #[test]
            fn tensor_product_is_multiplicative(seed in any::<u64>()) {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let m: Vec<ComplexMatrix> = (0..4).map(|_| random::random_unitary(&mut rng, 2)).collect();
                let lhs = tensor_product(&m[0], &m[1]) * tensor_product(&m[2], &m[3]);
                let rhs = tensor_product(&(&m[0] * &m[2]), &(&m[1] * &m[3]));
                prop_assert!(close(&lhs, &rhs, 1e-13));
            }
        }
    }
}
