//! One-sided (Hestenes) Jacobi SVD. Singular values come out with absolute accuracy of
//! order `eps * ‖A‖`, including the small ones, which the dilation's range splitting
//! depends on.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// `A = U diag(s) V*` with `s` descending. `V` is `cols x cols` unitary; `U` is
/// `rows x cols` and its columns are orthonormal where `s > 0` (zero columns otherwise).
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    /// Number of singular values strictly above `cutoff`.
    pub fn rank_above(&self, cutoff: f64) -> usize {
        self.s.iter().filter(|&&x| x > cutoff).count()
    }
}

const MAX_SWEEPS: usize = 80;

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    // Work on columns stored contiguously.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = alloc::vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    let eps = f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= eps * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + libm::hypot(1.0, zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                // a_p <- c a_p - s e^{-iφ} a_q ; a_q <- s e^{iφ} a_p + c a_q
                let sp = phase.conj() * s;
                let sq = phase * s;
                rotate(&mut cols, p, q, c, sp, sq);
                rotate(&mut v, p, q, c, sp, sq);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Jacobi SVD"));
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| libm::sqrt(c.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut vm = ComplexMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        if sigma > 0.0 {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / sigma;
            }
        }
        for i in 0..n {
            vm[(i, k)] = v[j][i];
        }
    }
    Ok(Svd { u, s, v: vm })
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, sp: C64, sq: C64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = xp * c - sp * yq;
        *y = sq * xp + yq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_rectangular() {
        let a = ComplexMatrix::from_fn(4, 3, |i, j| {
            C64::new((i * 3 + j) as f64 * 0.37 - 1.0, (i as f64 - j as f64) * 0.21)
        });
        let f = svd(&a).unwrap();
        let mut us = f.u.clone();
        for j in 0..3 {
            for i in 0..4 {
                us[(i, j)] *= f.s[j];
            }
        }
        let rebuilt = us.matmul(&f.v.adjoint());
        assert!((&rebuilt - &a).frobenius_norm() < 1e-13);
        assert!(f.v.adjoint_mul(&f.v).identity_defect() < 1e-13);
        assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn nilpotent_singular_values() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let f = svd(&a).unwrap();
        assert!((f.s[0] - 2.0).abs() < 1e-15);
        assert!(f.s[1].abs() < 1e-15);
    }

    #[test]
    fn wide_matrix_has_trailing_zeros() {
        let a = ComplexMatrix::from_fn(2, 4, |i, j| C64::new((i + j) as f64, (i * j) as f64));
        let f = svd(&a).unwrap();
        assert_eq!(f.rank_above(1e-12), 2);
    }
}
