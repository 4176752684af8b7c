//! Seeded random matrices: Gaussian, Haar-unitary, isometries, contractions.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{operator_norm, orthonormalize_columns, ComplexMatrix};
use crate::toeplitz::MatrixTuple;

pub type TcdRng = ChaCha8Rng;

/// Independent deterministic stream `stream` of the generator seeded by `seed`.
pub fn rng_for(seed: u64, stream: u64) -> TcdRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex normal: real and imaginary parts each of variance 1/2.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    C64::new(gaussian(rng) * h, gaussian(rng) * h)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// Uniform point on the unit sphere of `C^n`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let mut v = gaussian_vector(rng, n);
        if crate::linalg::normalize(&mut v) {
            return v;
        }
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Random Hermitian matrix (GUE-like).
pub fn hermitian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    gaussian_matrix(rng, n, n).hermitian_part()
}

/// Haar-distributed unitary: Gram-Schmidt of a Gaussian matrix (positive `R` diagonal).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        if let Ok(q) = orthonormalize_columns(&gaussian_matrix(rng, n, n)) {
            return q;
        }
    }
}

/// Haar-random isometry `C^n -> C^big` (`big x n`, orthonormal columns).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, big: usize, n: usize) -> ComplexMatrix {
    assert!(big >= n);
    haar_unitary(rng, big).columns(0, n)
}

/// Gaussian matrix rescaled to operator norm `radius * u` with `u` uniform in `[0, 1]`,
/// so both interior and near-boundary contractions appear.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let norm = operator_norm(&g).unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let target: f64 = radius * rng.random::<f64>();
    g.scale_real(target / norm)
}

/// Random tuple of Gaussian matrices.
pub fn gaussian_tuple<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> MatrixTuple {
    let mats = (0..d).map(|_| gaussian_matrix(rng, n, n)).collect();
    MatrixTuple::new(mats).expect("gaussian tuple has consistent shapes")
}

/// Random commuting normal tuple `W diag(λ_k) W*` with a Haar `W`.
pub fn normal_tuple<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> MatrixTuple {
    let w = haar_unitary(rng, n);
    let mats = (0..d)
        .map(|_| {
            let diag = gaussian_vector(rng, n);
            w.matmul(&ComplexMatrix::from_diagonal(&diag)).matmul(&w.adjoint())
        })
        .collect();
    MatrixTuple::new(mats).expect("normal tuple has consistent shapes")
}
