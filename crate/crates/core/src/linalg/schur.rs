//! Complex Schur decomposition `A = Q T Q*` by Householder reduction to Hessenberg form
//! followed by single-shift QR sweeps with Wilkinson shifts.

use alloc::vec;

use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Schur {
    /// Unitary Schur basis.
    pub q: ComplexMatrix,
    /// Upper triangular factor.
    pub t: ComplexMatrix,
}

pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let (mut h, mut q) = hessenberg(a);
    if n < 2 {
        return Ok(Schur { q, t: h });
    }
    let eps = f64::EPSILON;
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if sub <= eps * diag || sub <= eps * eps * scale {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::NoConvergence("complex Schur QR iteration"));
        }
        let shift = if iter % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm() * 0.75, h[(hi, hi - 1)].norm() * 0.5)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(&mut h, &mut q, l, hi, shift);
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(Schur { q, t: h })
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Unitary Householder reduction to upper Hessenberg form; returns `(H, Q)` with
/// `A = Q H Q*`.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let zero = C64::new(0.0, 0.0);
    let mut u = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let x0 = h[(k + 1, k)];
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = libm::sqrt(tail + x0.norm_sqr());
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for z in u.iter_mut() {
            *z = zero;
        }
        u[k + 1] = x0 + phase * alpha;
        for i in k + 2..n {
            u[i] = h[(i, k)];
        }
        let vnorm = libm::sqrt(u.iter().map(|z| z.norm_sqr()).sum::<f64>());
        for z in u[k + 1..].iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2uu*) H
        for j in 0..n {
            let w: C64 = (k + 1..n).map(|i| u[i].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                h[(i, j)] -= u[i] * w * 2.0;
            }
        }
        // H <- H (I - 2uu*), Q <- Q (I - 2uu*)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let w: C64 = (k + 1..n).map(|j| m[(i, j)] * u[j]).sum();
                for j in k + 1..n {
                    m[(i, j)] -= w * u[j].conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = zero;
        }
    }
    (h, q)
}

/// Rotation `[[c, s], [-conj(s), c]]` taking `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let r = libm::hypot(na, nb);
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let alpha = a / na;
    (na / r, alpha * b.conj() / r)
}

/// One explicit shifted QR step on the active window `lo..=hi`, applied as a similarity
/// to the whole matrix so that `Q` keeps tracking the Schur basis.
fn qr_sweep(h: &mut ComplexMatrix, q: &mut ComplexMatrix, lo: usize, hi: usize, shift: C64) {
    let n = h.rows();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = alloc::vec::Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let top = (k + 2).min(hi);
        for i in 0..=top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
        for i in 0..n {
            let x = q[(i, k)];
            let y = q[(i, k + 1)];
            q[(i, k)] = x * c + y * s.conj();
            q[(i, k + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}
