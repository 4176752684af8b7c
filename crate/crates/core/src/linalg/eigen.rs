//! Dense Hermitian eigensolver.
//!
//! Householder reduction to a Hermitian tridiagonal matrix, a diagonal phase change that
//! makes the off-diagonal real, then the implicit QL iteration of EISPACK `tql2` with the
//! eigenvector rotations applied to the complex basis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::{ComplexMatrix, Tolerances};
use crate::error::{Error, Result};

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude, i.e. the spectral norm of the matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `W diag(f(λ)) W*`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled.matmul(&self.vectors.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as `(M + M*)/2`
/// after checking that its asymmetry is within `eig_tol`.
pub fn hermitian_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let asymmetry = (m - &m.adjoint()).frobenius_norm();
    let allowed = tol.eig_tol * m.frobenius_norm().max(1.0);
    if asymmetry > allowed {
        return Err(Error::NotHermitian { asymmetry, allowed });
    }
    hermitian_eig_unchecked(&m.hermitian_part())
}

/// Same as [`hermitian_eig`] but trusts the caller that `m` is exactly Hermitian (only
/// the lower triangle is read).
pub(crate) fn hermitian_eig_unchecked(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    if n == 1 {
        return Ok(HermitianEigen {
            values: vec![m[(0, 0)].re],
            vectors: ComplexMatrix::identity(1),
        });
    }
    let (diag, off, mut basis) = tridiagonalize(m);
    let mut d = diag;
    let mut e = off;
    tql2(&mut d, &mut e, &mut basis)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| basis[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Returns the real diagonal, the real nonnegative off-diagonal (length `n`, last entry
/// zero) and the unitary `Z` with `M = Z T Z*`.
fn tridiagonalize(m: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = m.rows();
    let mut a = m.clone();
    let mut q = ComplexMatrix::identity(n);
    let zero = C64::new(0.0, 0.0);
    let mut u = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let x0 = a[(k + 1, k)];
        let tail: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = libm::sqrt(tail + x0.norm_sqr());
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let beta = -phase * alpha;
        for z in u.iter_mut() {
            *z = zero;
        }
        u[k + 1] = x0 - beta;
        for i in k + 2..n {
            u[i] = a[(i, k)];
        }
        let vnorm = libm::sqrt(u.iter().map(|z| z.norm_sqr()).sum::<f64>());
        for z in u[k + 1..].iter_mut() {
            *z /= vnorm;
        }

        // A <- (I - 2uu*) A (I - 2uu*) as a rank-two update.
        for (i, pi) in p.iter_mut().enumerate() {
            let row = a.row(i);
            *pi = (k + 1..n).map(|j| row[j] * u[j]).sum();
        }
        let kappa: f64 = (k + 1..n).map(|i| (u[i].conj() * p[i]).re).sum();
        for i in 0..n {
            p[i] -= u[i] * kappa;
        }
        for i in 0..n {
            for j in 0..n {
                let upd = u[i] * p[j].conj() + p[i] * u[j].conj();
                if upd.re != 0.0 || upd.im != 0.0 {
                    a[(i, j)] -= upd * 2.0;
                }
            }
        }
        // Q <- Q (I - 2uu*)
        for i in 0..n {
            let row = q.row(i);
            let w: C64 = (k + 1..n).map(|j| row[j] * u[j]).sum();
            for j in k + 1..n {
                q[(i, j)] -= w * u[j].conj() * 2.0;
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut phase = vec![C64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let e = a[(i + 1, i)];
        let r = e.norm();
        off[i] = r;
        phase[i + 1] = if r > 0.0 { phase[i] * (e / r) } else { phase[i] };
    }
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] *= phase[j];
        }
    }
    (diag, off, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix (`e[i]` couples `i` and `i + 1`),
/// accumulating rotations into the columns of `v`.
fn tql2(d: &mut [f64], e: &mut [f64], v: &mut ComplexMatrix) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence("Hermitian eigensolver"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[(k, i + 1)];
                        let vk = v[(k, i)];
                        v[(k, i + 1)] = vk * s + hk * c;
                        v[(k, i)] = vk * c - hk * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn diagonal_sorted() {
        let m = ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]])
            .unwrap();
        let eig = hermitian_eig(&m, &tol()).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let eig = hermitian_eig(&m, &tol()).unwrap();
        assert_abs_diff_eq!(eig.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tridiagonal_ones() {
        // I + K with K the path adjacency: eigenvalues 1 - √2, 1, 1 + √2.
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0]])
            .unwrap();
        let eig = hermitian_eig(&m, &tol()).unwrap();
        let s = core::f64::consts::SQRT_2;
        assert_abs_diff_eq!(eig.values[0], 1.0 - s, epsilon = 1e-13);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(eig.values[2], 1.0 + s, epsilon = 1e-13);
    }

    #[test]
    fn complex_hermitian_reconstruction() {
        let m = ComplexMatrix::from_fn(5, 5, |i, j| {
            let (a, b) = (i as f64, j as f64);
            if i == j {
                C64::new(a - 2.0, 0.0)
            } else if i > j {
                C64::new(0.3 * a - b, 0.7 * (a + b))
            } else {
                C64::new(0.3 * b - a, -0.7 * (a + b))
            }
        });
        let eig = hermitian_eig(&m, &tol()).unwrap();
        let rebuilt = eig.map_values(|x| x);
        assert!((&rebuilt - &m).frobenius_norm() < 1e-12);
        let gram = eig.vectors.adjoint_mul(&eig.vectors);
        assert!(gram.identity_defect() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m, &tol()), Err(Error::NotHermitian { .. })));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&r, &tol()), Err(Error::NotSquare { .. })));
    }
}
