//! Classical limit of extractable work: the best average work reachable
//! when Bob's assemblage admits a hidden-state model, as a semidefinite
//! program over deterministic strategies.

pub mod sdp;

use rand::Rng;

use crate::engine::{build_extraction_operators, Protocol};
use crate::error::{Error, Result};
use crate::qcore::random::random_psd;
use crate::qcore::{ComplexMatrix, SubnormalizedState};

pub use sdp::{
    from_real_coords, hermitian_basis, solve_sdp, to_real_coords, SdpProblem, SdpSolution,
    SolverOptions,
};

/// Upper bound on the number of deterministic strategies.
pub const MAX_STRATEGIES: usize = 4096;

/// Outcome string `λ = (a_{x=0}, …, a_{x=m−1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicStrategy {
    outcomes: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(outcomes: Vec<usize>) -> Self {
        Self { outcomes }
    }

    /// `λ(x)`
    pub fn outcome(&self, x: usize) -> usize {
        self.outcomes[x]
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    /// `δ_{a,λ(x)}`
    pub fn delta(&self, a: usize, x: usize) -> f64 {
        if self.outcomes.get(x) == Some(&a) {
            1.0
        } else {
            0.0
        }
    }
}

/// All `q^m` strategies for `m` settings with `q` outcomes each, in
/// lexicographic order with setting 0 most significant.
pub fn enumerate_strategies(m: usize, q: usize) -> Result<Vec<DeterministicStrategy>> {
    enumerate_mixed(&vec![q; m])
}

/// Strategies when setting `x` has `radices[x]` outcomes.
pub fn enumerate_mixed(radices: &[usize]) -> Result<Vec<DeterministicStrategy>> {
    if radices.is_empty() || radices.contains(&0) {
        return Err(Error::InvalidProtocol(
            "need at least one setting and one outcome per setting".into(),
        ));
    }
    let count = radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .unwrap_or(u128::MAX);
    if count > MAX_STRATEGIES as u128 {
        return Err(Error::TooManyStrategies {
            count,
            limit: MAX_STRATEGIES,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; radices.len()];
    for _ in 0..count {
        out.push(DeterministicStrategy::new(digits.clone()));
        for pos in (0..radices.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(out)
}

/// The classical-limit SDP of a protocol together with its strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalProblem {
    pub strategies: Vec<DeterministicStrategy>,
    pub sdp: SdpProblem,
}

/// Objective `Σ_{a,x,λ} δ_{a,λ(x)} Tr[F_{a|x} σ_λ]`, i.e. block `λ` carries
/// `C_λ = Σ_x F_{λ(x)|x}`, under `Σ_λ σ_λ = ρ_W`.
pub fn assemble_sdp(p: &Protocol) -> Result<ClassicalProblem> {
    let f = build_extraction_operators(p)?;
    let radices: Vec<usize> = p.settings().iter().map(|s| s.outcomes.len()).collect();
    let strategies = enumerate_mixed(&radices)?;
    let d = p.dim();
    let objective = strategies
        .iter()
        .map(|l| {
            (0..radices.len()).try_fold(ComplexMatrix::zeros(d, d), |acc, x| {
                Ok::<_, Error>(acc + f.get(x, l.outcome(x))?)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sdp = SdpProblem::new(objective, p.bath_state().matrix().clone())?;
    Ok(ClassicalProblem { strategies, sdp })
}

/// Hidden-state assemblage `σ^HS_{a|x} = Σ_λ δ_{a,λ(x)} σ*_λ`, indexed `[x][a]`.
pub fn hs_assemblage(
    blocks: &[ComplexMatrix],
    strategies: &[DeterministicStrategy],
) -> Result<Vec<Vec<SubnormalizedState>>> {
    if blocks.len() != strategies.len() || blocks.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: strategies.len(),
            found: blocks.len(),
        });
    }
    let d = blocks[0].nrows();
    let m = strategies[0].outcomes().len();
    let radices: Vec<usize> = (0..m)
        .map(|x| strategies.iter().map(|l| l.outcome(x) + 1).max().unwrap_or(1))
        .collect();
    let mut out = Vec::with_capacity(m);
    for (x, &q) in radices.iter().enumerate() {
        let mut row = Vec::with_capacity(q);
        for a in 0..q {
            let s = strategies
                .iter()
                .zip(blocks)
                .filter(|(l, _)| l.outcome(x) == a)
                .fold(ComplexMatrix::zeros(d, d), |acc, (_, b)| acc + b);
            row.push(SubnormalizedState::new(s)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// Optimal classical value with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalLimit {
    pub value: f64,
    pub problem: ClassicalProblem,
    pub solution: SdpSolution,
}

pub fn classical_limit_with(p: &Protocol, opts: &SolverOptions) -> Result<ClassicalLimit> {
    let problem = assemble_sdp(p)?;
    let solution = solve_sdp(&problem.sdp, opts)?;
    Ok(ClassicalLimit {
        value: solution.primal,
        problem,
        solution,
    })
}

pub fn classical_limit(p: &Protocol) -> Result<f64> {
    classical_limit_with(p, &SolverOptions::default()).map(|c| c.value)
}

/// Random feasible point `σ_λ = ρ^{1/2} S^{-1/2} A_λ S^{-1/2} ρ^{1/2}` with
/// `A_λ` random PSD and `S = Σ_λ A_λ`.
pub fn random_feasible_point<R: Rng + ?Sized>(rng: &mut R, prob: &SdpProblem) -> Vec<ComplexMatrix> {
    let d = prob.dim();
    let a: Vec<ComplexMatrix> = (0..prob.blocks())
        .map(|_| {
            let w: f64 = rng.random_range(0.05..1.0);
            random_psd(rng, d, w)
        })
        .collect();
    let s = a.iter().fold(ComplexMatrix::zeros(d, d), |acc, m| acc + m);
    let s_inv_half = sdp::hermitian_function(&s, |x| 1.0 / x.sqrt());
    let rho_half = sdp::hermitian_function(prob.rhs(), |x| x.max(0.0).sqrt());
    let t = &rho_half * s_inv_half;
    a.iter()
        .map(|m| crate::qcore::hermitian_part(&(&t * m * t.adjoint())))
        .collect()
}

/// Worst excess `objective(random feasible point) − bound` over `samples`
/// points; non-positive when `bound` is a valid upper bound.
pub fn weak_duality_excess<R: Rng + ?Sized>(
    rng: &mut R,
    prob: &SdpProblem,
    bound: f64,
    samples: usize,
) -> f64 {
    (0..samples)
        .map(|_| prob.value(&random_feasible_point(rng, prob)) - bound)
        .fold(f64::NEG_INFINITY, f64::max)
}
