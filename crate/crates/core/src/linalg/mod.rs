//! Dense complex linear algebra: the Hermitian eigensolver, PSD tests, low-rank Gram
//! factors, norms, Jacobi SVD and complex Schur form.

mod eigen;
mod matrix;
mod schur;
mod svd;

use alloc::vec::Vec;

pub use eigen::{hermitian_eig, HermitianEigen};
pub(crate) use eigen::hermitian_eig_unchecked;
pub use matrix::{dot, norm, normalize, ComplexMatrix};
pub use schur::{schur, Schur};
pub use svd::{svd, Svd};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative eigensolver / Hermiticity tolerance.
    pub eig_tol: f64,
    /// Relative slack in PSD tests, scaled by `max(1, ‖M‖)`.
    pub psd_tol: f64,
    /// Relative rank cutoff against the largest eigenvalue.
    pub rank_tol: f64,
    /// Bound on dilation and decomposition residuals.
    pub residual_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            psd_tol: 1e-9,
            rank_tol: 1e-9,
            residual_tol: 1e-8,
        }
    }
}

impl Tolerances {
    /// Rejects non-positive or non-finite entries.
    pub fn validated(self) -> Result<Self> {
        let all = [self.eig_tol, self.psd_tol, self.rank_tol, self.residual_tol];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(self)
        } else {
            Err(Error::InvalidArgument("tolerances must be finite and positive"))
        }
    }

    /// Overrides the PSD and residual tolerances together.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.psd_tol = tol;
        self.residual_tol = tol;
        self
    }
}

pub fn min_eigenvalue(m: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eig(m, tol)?.min())
}

/// `λ_min(M) >= -psd_tol * max(1, ‖M‖)`.
pub fn is_psd(m: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    let eig = hermitian_eig(m, tol)?;
    Ok(psd_from_eig(&eig, tol))
}

pub(crate) fn psd_from_eig(eig: &HermitianEigen, tol: &Tolerances) -> bool {
    eig.min() >= -tol.psd_tol * eig.spectral_norm().max(1.0)
}

/// Factor `F` (`r x m`) with `F* F ≈ M`, keeping eigenvalues at or above
/// `rank_tol * λ_max`. Rows are ordered by decreasing eigenvalue.
pub fn low_rank_factor(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m, tol)?;
    factor_from_eig(&eig, tol)
}

pub(crate) fn factor_from_eig(eig: &HermitianEigen, tol: &Tolerances) -> Result<ComplexMatrix> {
    if !psd_from_eig(eig, tol) {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    let m = eig.values.len();
    let top = eig.max();
    let cutoff = tol.rank_tol * top;
    let keep: Vec<usize> = if top > 0.0 {
        (0..m).rev().filter(|&k| eig.values[k] >= cutoff).collect()
    } else {
        Vec::new()
    };
    let mut f = ComplexMatrix::zeros(keep.len(), m);
    for (row, &k) in keep.iter().enumerate() {
        let s = libm::sqrt(eig.values[k]);
        for col in 0..m {
            f[(row, col)] = eig.vectors[(col, k)].conj() * s;
        }
    }
    Ok(f)
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    let gram = if m.rows() >= m.cols() {
        m.adjoint_mul(m)
    } else {
        m.matmul(&m.adjoint())
    };
    let eig = hermitian_eig_unchecked(&gram.hermitian_part())?;
    Ok(libm::sqrt(eig.max().max(0.0)))
}

/// Orthonormal basis (`m x (m - p)`) of the orthogonal complement of the span of the
/// orthonormal columns of `basis` (`m x p`).
pub fn orthonormal_complement(basis: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = basis.rows();
    let p = basis.cols();
    if p >= m {
        return Ok(ComplexMatrix::zeros(m, 0));
    }
    let proj = basis.matmul(&basis.adjoint()).hermitian_part();
    let eig = hermitian_eig_unchecked(&proj)?;
    Ok(eig.vectors.columns(0, m - p))
}

/// Closest unitary to a square matrix (the unitary polar factor). Returns the factor and
/// the Frobenius size of the correction.
pub fn polar_unitary(a: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let f = svd(a)?;
    let r = f.rank_above(0.0);
    let mut left = f.u.clone();
    if r < n {
        let comp = orthonormal_complement(&f.u.columns(0, r))?;
        for j in r..n {
            left.set_column(j, &comp.column(j - r));
        }
    }
    let unitary = left.matmul(&f.v.adjoint());
    let correction = (&unitary - a).frobenius_norm();
    Ok((unitary, correction))
}

/// Modified Gram-Schmidt, applied twice, on the columns of `a` (full column rank
/// expected). Diagonal of the implied `R` is positive.
pub fn orthonormalize_columns(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = a.rows();
    let mut cols: Vec<Vec<num_complex::Complex64>> = (0..a.cols()).map(|j| a.column(j)).collect();
    for j in 0..cols.len() {
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj = dot(&done[i], &rest[0]);
                for (x, y) in rest[0].iter_mut().zip(&done[i]) {
                    *x -= proj * y;
                }
            }
        }
        if !normalize(&mut cols[j]) {
            return Err(Error::RankDefect("columns are linearly dependent"));
        }
    }
    Ok(ComplexMatrix::from_columns(m, &cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn min_eigenvalue_examples() {
        let t = tol();
        assert_eq!(min_eigenvalue(&ComplexMatrix::zeros(3, 3), &t).unwrap(), 0.0);
        assert_eq!(min_eigenvalue(&ComplexMatrix::identity(4), &t).unwrap(), 1.0);
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0]])
            .unwrap();
        let expected = 1.0 - core::f64::consts::SQRT_2;
        assert!((min_eigenvalue(&m, &t).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn psd_examples() {
        let t = tol();
        assert!(is_psd(&ComplexMatrix::identity(3), &t).unwrap());
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0]])
            .unwrap();
        assert!(!is_psd(&bad, &t).unwrap());
        let gram = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(is_psd(&gram, &t).unwrap());
    }

    #[test]
    fn low_rank_factor_examples() {
        let t = tol();
        let f = low_rank_factor(&ComplexMatrix::identity(2), &t).unwrap();
        assert_eq!(f.rows(), 2);
        assert!(f.adjoint_mul(&f).identity_defect() < 1e-14);

        let gram = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let f = low_rank_factor(&gram, &t).unwrap();
        assert_eq!(f.rows(), 1);
        assert!((&f.adjoint_mul(&f) - &gram).frobenius_norm() < 1e-14);
        // the single row is (1, 1) up to a phase
        assert!((f[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((f[(0, 0)] - f[(0, 1)]).norm() < 1e-14);

        let f = low_rank_factor(&ComplexMatrix::zeros(3, 3), &t).unwrap();
        assert_eq!((f.rows(), f.cols()), (0, 3));

        let neg = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(matches!(low_rank_factor(&neg, &t), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn operator_norm_examples() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert!((operator_norm(&j).unwrap() - 2.0).abs() < 1e-14);
        let rot = ComplexMatrix::from_real_rows(&[&[0.6, -0.8], &[0.8, 0.6]]).unwrap();
        assert!((operator_norm(&rot).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let u = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, 1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        });
        let (p, corr) = polar_unitary(&u.scale_real(1.5)).unwrap();
        assert!((&p - &u).frobenius_norm() < 1e-14);
        assert!((corr - 0.5 * core::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn complement_is_orthogonal() {
        let b = orthonormalize_columns(&ComplexMatrix::from_fn(4, 2, |i, j| {
            C64::new((i + 2 * j) as f64, (i * j) as f64 - 1.0)
        }))
        .unwrap();
        let c = orthonormal_complement(&b).unwrap();
        assert_eq!(c.cols(), 2);
        assert!(b.adjoint_mul(&c).frobenius_norm() < 1e-13);
        assert!(c.adjoint_mul(&c).identity_defect() < 1e-13);
    }
}
