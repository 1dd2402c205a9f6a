//! Seeded random matrices. Every generator takes the caller's RNG so streams
//! stay reproducible; `rng(seed)` gives the ChaCha8 stream used throughout.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hilbert::{c, ComplexMatrix, DensityMatrix, HermitianOperator, StateVector, UnitaryMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// Haar-distributed unitary. A bare QR factor is biased by the sign
/// convention of `R`, so each column is rephased by `r_kk/|r_kk|`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let qr = ginibre(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(k, k)];
        let norm = d.norm();
        if norm > 0.0 {
            col *= d / norm;
        }
    }
    UnitaryMatrix::new(q).expect("QR factor is unitary")
}

/// Draw from the Gaussian unitary ensemble.
pub fn gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(n, rng);
    HermitianOperator::new((&g + g.adjoint()) * c(0.5)).expect("Hermitian by construction")
}

pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    let v = StateVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v / c(norm)
}

/// Hilbert-Schmidt random mixed state `GG†/tr GG†`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(n, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(w * c(1.0 / tr)).expect("positive by construction")
}

/// Uniform point on the probability simplex.
pub fn dirichlet_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    for x in e.iter_mut() {
        *x /= total;
    }
    e
}
