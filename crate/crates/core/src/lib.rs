//! Toeplitz-contractive tuples of complex matrices.
//!
//! A `d`-tuple `(T_1, ..., T_d)` of `n x n` matrices is Toeplitz-contractive when the
//! block Toeplitz matrix with identity diagonal and `T_k` on the `k`-th subdiagonal is
//! positive semidefinite. This crate checks that condition, computes the Toeplitz
//! modulus, numerical radius and spectral radii of a tuple, builds explicit
//! finite-dimensional unitary power dilations, extracts atomic decompositions
//! `A_k = sum_j lambda_j^k Q_j`, and explores the convex hull of the stretched circle
//! `{(z, z^2, ..., z^d) : |z| = 1}`.
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature enables `std` and
//! runs independent restarts on the rayon thread pool; results are identical either way.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x <= limit)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dilation;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod moduli;
mod par;
pub mod random;
pub mod spectra;
pub mod toeplitz;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerances};
pub use num_complex::Complex64 as C64;
pub use toeplitz::MatrixTuple;
