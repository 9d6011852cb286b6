//! Seeded random states, unitaries and channels for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{c, hermitian_part, ComplexMatrix, DensityMatrix, KrausChannel, StateVector, C64};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Random positive semidefinite matrix `G G†` with trace `weight`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize, weight: f64) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let m = hermitian_part(&(&g * g.adjoint()));
    let tr = m.trace().re;
    m.scale(weight / tr)
}

pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, qubits: usize) -> DensityMatrix {
    DensityMatrix::from_trusted(random_psd(rng, 1 << qubits, 1.0))
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    let v = ginibre(rng, dim, 1).column(0).into_owned();
    let n = v.norm();
    v / C64::from(n)
}

/// Haar-ish unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution does not depend on QR conventions
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / C64::from(d.norm());
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Random CPTP map on `qubits` qubits with `kraus` Kraus operators, cut
/// from a random isometry.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, qubits: usize, kraus: usize) -> KrausChannel {
    let d = 1usize << qubits;
    let u = random_unitary(rng, d * kraus);
    let ops: Vec<ComplexMatrix> = (0..kraus)
        .map(|k| u.view((k * d, 0), (d, d)).into_owned())
        .collect();
    KrausChannel { ops }
}
