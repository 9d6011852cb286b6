//! Primal-dual interior-point solver for
//!
//! ```text
//! maximise   Σ_λ Tr[C_λ X_λ]
//! subject to Σ_λ X_λ = ρ,  X_λ ⪰ 0
//! ```
//!
//! with dual `minimise Tr[ρ Y]` subject to `Z_λ = Y − C_λ ⪰ 0`. Every block is
//! a small Hermitian matrix. The dual iterate is kept exactly feasible, so
//! `Tr[ρ Y]` is always a certified upper bound.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qcore::{
    c, hermitian_eigenvalues, hermitian_part, identity, max_abs, min_eigenvalue, ComplexMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Target for the duality gap and the primal residual.
    pub tolerance: f64,
    /// Centering parameter σ of the search direction.
    pub centering: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            tolerance: 1e-11,
            centering: 0.1,
            step_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    objective: Vec<ComplexMatrix>,
    rhs: ComplexMatrix,
}

impl SdpProblem {
    pub fn new(objective: Vec<ComplexMatrix>, rhs: ComplexMatrix) -> Result<Self> {
        let d = rhs.nrows();
        if rhs.ncols() != d {
            return Err(Error::NotSquare {
                rows: d,
                cols: rhs.ncols(),
            });
        }
        if objective.is_empty() {
            return Err(Error::InvalidConfig("SDP needs at least one block".into()));
        }
        for cm in &objective {
            if cm.nrows() != d || cm.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: cm.nrows(),
                });
            }
        }
        Ok(Self {
            objective: objective.iter().map(hermitian_part).collect(),
            rhs: hermitian_part(&rhs),
        })
    }

    pub fn blocks(&self) -> usize {
        self.objective.len()
    }

    pub fn dim(&self) -> usize {
        self.rhs.nrows()
    }

    /// Objective coefficient `C_λ` of block `λ`.
    pub fn objective(&self) -> &[ComplexMatrix] {
        &self.objective
    }

    pub fn rhs(&self) -> &ComplexMatrix {
        &self.rhs
    }

    /// `Σ_λ Tr[C_λ X_λ]`.
    pub fn value(&self, blocks: &[ComplexMatrix]) -> f64 {
        self.objective
            .iter()
            .zip(blocks)
            .map(|(cm, x)| (cm * x).trace().re)
            .sum()
    }

    /// Largest violation of `X_λ ⪰ 0` (as `-min eigenvalue`, floored at 0)
    /// and of `Σ_λ X_λ = ρ` (max-abs entry).
    pub fn infeasibility(&self, blocks: &[ComplexMatrix]) -> (f64, f64) {
        let psd = blocks
            .iter()
            .map(|x| (-min_eigenvalue(&hermitian_part(x))).max(0.0))
            .fold(0.0, f64::max);
        let sum = blocks
            .iter()
            .fold(ComplexMatrix::zeros(self.dim(), self.dim()), |acc, x| acc + x);
        (psd, max_abs(&(sum - &self.rhs)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub blocks: Vec<ComplexMatrix>,
    /// dual variable `Y`
    pub dual_matrix: ComplexMatrix,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Orthonormal (Hilbert-Schmidt) basis of `d×d` Hermitian matrices:
/// `E_ii`, `(E_ij + E_ji)/√2` and `i(E_ji − E_ij)/√2` for `i < j`.
pub fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(i, i)] = c(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut s = ComplexMatrix::zeros(d, d);
            s[(i, j)] = c(r, 0.0);
            s[(j, i)] = c(r, 0.0);
            basis.push(s);
            let mut a = ComplexMatrix::zeros(d, d);
            a[(i, j)] = c(0.0, -r);
            a[(j, i)] = c(0.0, r);
            basis.push(a);
        }
    }
    basis
}

/// Real coordinates of a Hermitian matrix in [`hermitian_basis`].
pub fn to_real_coords(m: &ComplexMatrix, basis: &[ComplexMatrix]) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|b| (b * m).trace().re))
}

pub fn from_real_coords(v: &DVector<f64>, basis: &[ComplexMatrix]) -> ComplexMatrix {
    let d = basis[0].nrows();
    basis
        .iter()
        .zip(v.iter())
        .fold(ComplexMatrix::zeros(d, d), |acc, (b, &x)| acc + b.scale(x))
}

/// `f` applied to the eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let eig = hermitian_part(m).symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| c(f(x), 0.0)));
    hermitian_part(&(v * d * v.adjoint()))
}

/// Largest `α ≤ cap` with `X + α ΔX ⪰ 0`, for positive definite `X`.
fn max_step(x: &ComplexMatrix, dx: &ComplexMatrix, cap: f64) -> Result<f64> {
    let l = x
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Infeasible("iterate lost positive definiteness".into()))?;
    let linv = l.l().try_inverse().ok_or_else(|| {
        Error::Infeasible("iterate lost positive definiteness".into())
    })?;
    let w = &linv * dx * linv.adjoint();
    let lmin = hermitian_eigenvalues(&w).into_iter().fold(f64::INFINITY, f64::min);
    Ok(if lmin >= 0.0 { cap } else { cap.min(-1.0 / lmin) })
}

fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.clone()
        .cholesky()
        .map(|ch| hermitian_part(&ch.inverse()))
        .ok_or_else(|| Error::Infeasible("dual slack is singular".into()))
}

pub fn solve_sdp(prob: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let d = prob.dim();
    let nb = prob.blocks();
    let rho = prob.rhs();
    let rho_min = min_eigenvalue(rho);
    if rho_min < -1e-12 {
        return Err(Error::Infeasible(format!(
            "right-hand side has eigenvalue {rho_min:.3e}"
        )));
    }
    let basis = hermitian_basis(d);
    let n = basis.len();

    let scale = prob
        .objective()
        .iter()
        .map(|cm| {
            hermitian_eigenvalues(cm)
                .into_iter()
                .fold(0.0f64, |m, e| m.max(e.abs()))
        })
        .fold(0.0, f64::max);
    let tr_rho = rho.trace().re.max(1e-300);
    let mut x: Vec<ComplexMatrix> = vec![identity(d).scale(tr_rho / (nb * d) as f64); nb];
    let mut y = identity(d).scale(scale + 1.0);
    let tol = opts.tolerance * (1.0 + scale);

    let mut gap = f64::INFINITY;
    for it in 0..opts.max_iterations {
        let z: Vec<ComplexMatrix> = prob.objective().iter().map(|cm| &y - cm).collect();
        let zinv: Vec<ComplexMatrix> = z.iter().map(inverse).collect::<Result<_>>()?;
        let sum_x = x.iter().fold(ComplexMatrix::zeros(d, d), |acc, b| acc + b);
        let r_p = rho - &sum_x;
        let complementarity: f64 = x.iter().zip(&z).map(|(a, b)| (a * b).trace().re).sum();
        let primal = prob.value(&x);
        let dual = (rho * &y).trace().re;
        gap = dual - primal;
        if max_abs(&r_p) <= tol && complementarity <= tol && gap.abs() <= tol {
            return Ok(SdpSolution {
                blocks: x.iter().map(hermitian_part).collect(),
                dual_matrix: y,
                primal,
                dual,
                gap,
                iterations: it,
            });
        }
        let mu = complementarity / (nb * d) as f64;
        let target = opts.centering * mu;

        // Schur complement M_ij = Σ_λ Re Tr[B_i X_λ B_j Z_λ⁻¹]
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs_mat = -&r_p;
        for (xl, wl) in x.iter().zip(&zinv) {
            for (j, bj) in basis.iter().enumerate() {
                let pj = xl * bj * wl;
                for (i, bi) in basis.iter().enumerate() {
                    m[(i, j)] += (bi * &pj).trace().re;
                }
            }
            rhs_mat += wl.scale(target) - xl;
        }
        let m = (&m + m.transpose()) * 0.5;
        let rhs_vec = to_real_coords(&hermitian_part(&rhs_mat), &basis);
        let dy_vec = match m.clone().cholesky() {
            Some(ch) => ch.solve(&rhs_vec),
            None => m.lu().solve(&rhs_vec).ok_or(Error::NotConverged {
                iterations: it,
                gap,
            })?,
        };
        let dy = from_real_coords(&dy_vec, &basis);
        let dx: Vec<ComplexMatrix> = x
            .iter()
            .zip(&zinv)
            .map(|(xl, wl)| hermitian_part(&(wl.scale(target) - xl - xl * &dy * wl)))
            .collect();

        let mut alpha_p = 1.0f64;
        let mut alpha_d = 1.0f64;
        for l in 0..nb {
            alpha_p = alpha_p.min(max_step(&x[l], &dx[l], f64::INFINITY)?);
            alpha_d = alpha_d.min(max_step(&z[l], &dy, f64::INFINITY)?);
        }
        let alpha_p = (opts.step_fraction * alpha_p).min(1.0);
        let alpha_d = (opts.step_fraction * alpha_d).min(1.0);
        for (xl, dxl) in x.iter_mut().zip(&dx) {
            *xl = hermitian_part(&(&*xl + dxl.scale(alpha_p)));
        }
        y = hermitian_part(&(&y + dy.scale(alpha_d)));
    }
    Err(Error::NotConverged {
        iterations: opts.max_iterations,
        gap,
    })
}
