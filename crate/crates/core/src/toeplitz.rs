//! Matrix tuples and the Toeplitz matrices built from them.
//!
//! Blocks are indexed `0..=d` top to bottom: block `(i, j)` is `T_{i-j}` below the
//! diagonal, `T_{j-i}*` above it, and `α I` on it.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_unchecked, ComplexMatrix};

/// An ordered `d`-tuple of `n x n` complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    n: usize,
    matrices: Vec<ComplexMatrix>,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or(Error::InvalidArgument("a tuple needs at least one matrix"))?;
        let n = first.rows();
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1"));
        }
        for m in &matrices {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(
                    "tuple entries must be square of one common size",
                ));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { n, matrices })
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        assert!(d >= 1 && n >= 1);
        Self {
            n,
            matrices: vec![ComplexMatrix::zeros(n, n); d],
        }
    }

    /// `(T, T^2, ..., T^d)`.
    pub fn powers(t: &ComplexMatrix, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1"));
        }
        let mut mats = Vec::with_capacity(d);
        let mut p = t.clone();
        for k in 0..d {
            if k > 0 {
                p = p.matmul(t);
            }
            mats.push(p.clone());
        }
        Self::new(mats)
    }

    /// Scalar tuple (`n = 1`) from a moment vector.
    pub fn from_scalars(w: &[C64]) -> Result<Self> {
        Self::new(
            w.iter()
                .map(|&z| ComplexMatrix::from_diagonal(&[z]))
                .collect(),
        )
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    /// `T_k` for `k` in `1..=d`.
    pub fn get(&self, k: usize) -> &ComplexMatrix {
        &self.matrices[k - 1]
    }

    pub fn iter(&self) -> core::slice::Iter<'_, ComplexMatrix> {
        self.matrices.iter()
    }

    pub fn map(&self, f: impl FnMut(&ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        Self::new(self.matrices.iter().map(f).collect())
    }

    /// `(T_1*, ..., T_d*)`.
    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            matrices: self.matrices.iter().map(ComplexMatrix::adjoint).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            matrices: self.matrices.iter().map(|m| m.scale(s)).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d() != other.d() || self.n != other.n {
            return Err(Error::DimensionMismatch("tuples differ in d or n"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            n: self.n,
            matrices: self
                .matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            n: self.n,
            matrices: self
                .matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `X* T X` entrywise, for `X` of shape `n x m`.
    pub fn compress(&self, x: &ComplexMatrix) -> Result<Self> {
        if x.rows() != self.n || x.cols() == 0 {
            return Err(Error::DimensionMismatch("compression map has wrong shape"));
        }
        Self::new(self.matrices.iter().map(|t| t.congruence(x)).collect())
    }

    /// Entries at the given 1-based indices, in order.
    pub fn subtuple(&self, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&k| k == 0 || k > self.d()) {
            return Err(Error::InvalidArgument("subtuple index out of range"));
        }
        Self::new(indices.iter().map(|&k| self.get(k).clone()).collect())
    }

    /// Largest Frobenius norm among the entries.
    pub fn max_frobenius(&self) -> f64 {
        self.matrices
            .iter()
            .map(ComplexMatrix::frobenius_norm)
            .fold(0.0, f64::max)
    }

    /// Moments `(ξ* T_k ξ)_k`.
    pub fn moments(&self, xi: &[C64]) -> Vec<C64> {
        self.matrices.iter().map(|t| t.quadratic_form(xi)).collect()
    }
}

/// The `(d+1)n x (d+1)n` Hermitian block Toeplitz matrix of a tuple.
#[derive(Debug, Clone)]
pub struct BlockToeplitzForm {
    pub alpha: f64,
    pub matrix: ComplexMatrix,
}

pub fn assemble_block(t: &MatrixTuple, alpha: f64) -> Result<BlockToeplitzForm> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument("alpha must be finite and nonnegative"));
    }
    let (d, n) = (t.d(), t.n());
    let size = (d + 1) * n;
    let mut m = ComplexMatrix::zeros(size, size);
    for i in 0..=d {
        for j in 0..=d {
            let (r0, c0) = (i * n, j * n);
            if i == j {
                for k in 0..n {
                    m[(r0 + k, c0 + k)] = C64::new(alpha, 0.0);
                }
            } else if i > j {
                m.set_block(r0, c0, t.get(i - j));
            } else {
                let a = t.get(j - i);
                for r in 0..n {
                    for c in 0..n {
                        m[(r0 + r, c0 + c)] = a[(c, r)].conj();
                    }
                }
            }
        }
    }
    Ok(BlockToeplitzForm { alpha, matrix: m })
}

/// The `(d+1) x (d+1)` Toeplitz matrix of a moment vector `w` with `α` on the diagonal.
#[derive(Debug, Clone)]
pub struct ScalarToeplitzForm {
    pub moments: Vec<C64>,
    pub alpha: f64,
    pub matrix: ComplexMatrix,
}

pub fn assemble_scalar(w: &[C64], alpha: f64) -> Result<ScalarToeplitzForm> {
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || !alpha.is_finite() {
        return Err(Error::NonFinite);
    }
    let d = w.len();
    let matrix = ComplexMatrix::from_fn(d + 1, d + 1, |i, j| {
        use core::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => C64::new(alpha, 0.0),
            Greater => w[i - j - 1],
            Less => w[j - i - 1].conj(),
        }
    });
    Ok(ScalarToeplitzForm {
        moments: w.to_vec(),
        alpha,
        matrix,
    })
}

/// `ν(w) = inf{α >= 0 : Λ_{α,w} ⪰ 0} = max(0, -λ_min(Λ_{0,w}))`.
pub fn nu(w: &[C64]) -> Result<f64> {
    Ok(nu_with_vector(w)?.0)
}

/// `ν(w)` together with a unit bottom eigenvector of `Λ_{0,w}`.
pub fn nu_with_vector(w: &[C64]) -> Result<(f64, Vec<C64>)> {
    let form = assemble_scalar(w, 0.0)?;
    let eig = hermitian_eig_unchecked(&form.matrix)?;
    let value = (-eig.min()).max(0.0);
    Ok((value, eig.vector(0)))
}

/// The rank-one positive Toeplitz matrix `T_n(λ) = γ γ*`, `γ = (1, λ, ..., λ^{n-1})`.
#[derive(Debug, Clone)]
pub struct ToeplitzAtom {
    pub lambda: C64,
    pub size: usize,
    pub matrix: ComplexMatrix,
    pub column: Vec<C64>,
}

pub fn toeplitz_atom(lambda: C64, size: usize) -> Result<ToeplitzAtom> {
    let lambda = unit_circle_point(lambda)?;
    let mut column = Vec::with_capacity(size);
    let mut p = C64::new(1.0, 0.0);
    for _ in 0..size {
        column.push(p);
        p *= lambda;
    }
    let matrix = ComplexMatrix::from_fn(size, size, |i, j| column[i] * column[j].conj());
    Ok(ToeplitzAtom {
        lambda,
        size,
        matrix,
        column,
    })
}

/// Projects a point within `1e-12` of the unit circle onto it.
pub fn unit_circle_point(lambda: C64) -> Result<C64> {
    let modulus = lambda.norm();
    if !(modulus >= 1e-6) {
        return Err(Error::ZeroModulus { modulus });
    }
    if (modulus - 1.0).abs() > 1e-12 {
        return Err(Error::OffCircle { modulus });
    }
    Ok(lambda / modulus)
}

/// `(λ, λ^2, ..., λ^d)`.
pub fn stretched_point(lambda: C64, d: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(d);
    let mut p = lambda;
    for _ in 0..d {
        out.push(p);
        p *= lambda;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_psd, Tolerances};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn single_operator_block_is_halmos_matrix() {
        let t = ComplexMatrix::from_fn(2, 2, |i, j| c(i as f64, j as f64 + 1.0));
        let tuple = MatrixTuple::new(vec![t.clone()]).unwrap();
        let m = assemble_block(&tuple, 1.0).unwrap().matrix;
        assert_eq!(m.block(0, 0, 2, 2), ComplexMatrix::identity(2));
        assert_eq!(m.block(2, 0, 2, 2), t);
        assert_eq!(m.block(0, 2, 2, 2), t.adjoint());
        assert_eq!(m.block(2, 2, 2, 2), ComplexMatrix::identity(2));
    }

    #[test]
    fn sigma_pair_block_layout() {
        let tuple = MatrixTuple::new(vec![sigma(), ComplexMatrix::identity(2)]).unwrap();
        let m = assemble_block(&tuple, 1.0).unwrap().matrix;
        let i2 = ComplexMatrix::identity(2);
        let expected = [[&i2, &sigma(), &i2], [&sigma(), &i2, &sigma()], [&i2, &sigma(), &i2]];
        for (bi, row) in expected.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                assert_eq!(&m.block(2 * bi, 2 * bj, 2, 2), *blk);
            }
        }
    }

    #[test]
    fn zero_tuple_zero_alpha() {
        let m = assemble_block(&MatrixTuple::zeros(3, 2), 0.0).unwrap().matrix;
        assert_eq!(m, ComplexMatrix::zeros(8, 8));
    }

    #[test]
    fn scalar_form_examples() {
        let m = assemble_scalar(&[c(1.0, 0.0), c(0.0, 0.0)], 1.0).unwrap().matrix;
        let expected =
            ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0]])
                .unwrap();
        assert_eq!(m, expected);

        let lambda = C64::from_polar(1.0, 0.7);
        let w = stretched_point(lambda, 3);
        let m = assemble_scalar(&w, 1.0).unwrap().matrix;
        let atom = toeplitz_atom(lambda, 4).unwrap();
        assert!((&m - &atom.matrix).max_abs() < 1e-15);

        assert_eq!(
            assemble_scalar(&[c(0.0, 0.0); 2], 0.0).unwrap().matrix,
            ComplexMatrix::zeros(3, 3)
        );
    }

    #[test]
    fn nu_examples() {
        let x = c(0.3, -0.4);
        assert!((nu(&[x]).unwrap() - 0.5).abs() < 1e-15);
        assert!((nu(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap() - 1.0).abs() < 1e-14);
        for d in 1..6 {
            let w = stretched_point(C64::from_polar(1.0, 1.3), d);
            assert!((nu(&w).unwrap() - 1.0).abs() < 1e-13);
        }
        let z = nu(&[c(0.0, 0.0); 3]).unwrap();
        assert!(z == 0.0 && z.is_sign_positive());
    }

    #[test]
    fn atom_examples() {
        let a = toeplitz_atom(c(1.0, 0.0), 3).unwrap();
        assert_eq!(a.matrix, ComplexMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0)));
        let a = toeplitz_atom(c(-1.0, 0.0), 3).unwrap();
        let alt = ComplexMatrix::from_real_rows(&[&[1.0, -1.0, 1.0], &[-1.0, 1.0, -1.0], &[1.0, -1.0, 1.0]])
            .unwrap();
        assert_eq!(a.matrix, alt);
        let a = toeplitz_atom(c(0.0, 1.0), 2).unwrap();
        assert_eq!(a.matrix[(0, 1)], c(0.0, -1.0));
        assert_eq!(a.matrix[(1, 0)], c(0.0, 1.0));
        assert!(is_psd(&a.matrix, &Tolerances::default()).unwrap());
        assert!((a.matrix.trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn atom_rejects_off_circle() {
        assert!(matches!(toeplitz_atom(c(1e-9, 0.0), 3), Err(Error::ZeroModulus { .. })));
        assert!(matches!(toeplitz_atom(c(0.5, 0.0), 3), Err(Error::OffCircle { .. })));
        let a = toeplitz_atom(c(1.0 + 5e-13, 0.0), 2).unwrap();
        assert_eq!(a.lambda.norm(), 1.0);
    }

    #[test]
    fn tuple_validation() {
        assert!(MatrixTuple::new(vec![]).is_err());
        assert!(MatrixTuple::new(vec![ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(3, 3)]).is_err());
        assert!(MatrixTuple::new(vec![ComplexMatrix::zeros(2, 3)]).is_err());
    }
}
