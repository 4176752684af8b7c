//! Joint spectra of commuting matrix tuples.
//!
//! For commuting matrices the joint spectrum is read off the diagonals of a simultaneous
//! unitary triangularization; for commuting normal tuples a simultaneous
//! diagonalization gives the same points.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig_unchecked, normalize, orthonormal_complement, schur, svd, ComplexMatrix,
    Tolerances,
};
use crate::random::{complex_gaussian, gaussian, rng_for, TcdRng};
use crate::toeplitz::MatrixTuple;

const MAX_ATTEMPTS: u64 = 8;
const MAX_DEPTH: usize = 8;

/// Joint eigenvalue tuples (one per basis vector, with multiplicity) and the unitary
/// basis realizing them.
#[derive(Debug, Clone)]
pub struct JointSpectrum {
    pub points: Vec<Vec<C64>>,
    pub basis: ComplexMatrix,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TupleClass {
    pub commuting: bool,
    pub normal: bool,
    pub unitary: bool,
    pub power_unitary: bool,
    pub commutator_defect: f64,
    pub normality_defect: f64,
    pub unitarity_defect: f64,
    pub power_defect: f64,
}

/// Classifies a tuple; every defect is a Frobenius norm measured relative to the size
/// of the matrices involved, and compared against `tol`.
pub fn classify(t: &MatrixTuple, tol: f64) -> TupleClass {
    let mats = t.matrices();
    let norms: Vec<f64> = mats.iter().map(ComplexMatrix::frobenius_norm).collect();

    let mut commutator_defect: f64 = 0.0;
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let c = &mats[i].matmul(&mats[j]) - &mats[j].matmul(&mats[i]);
            let rel = c.frobenius_norm() / (norms[i] * norms[j]).max(1.0);
            commutator_defect = commutator_defect.max(rel);
        }
    }
    let normality_defect = mats
        .iter()
        .zip(&norms)
        .map(|(m, nm)| {
            let c = &m.matmul(&m.adjoint()) - &m.adjoint_mul(m);
            c.frobenius_norm() / (nm * nm).max(1.0)
        })
        .fold(0.0, f64::max);
    let unitarity_defect = mats
        .iter()
        .zip(&norms)
        .map(|(m, nm)| m.adjoint_mul(m).identity_defect() / (nm * nm).max(1.0))
        .fold(0.0, f64::max);
    let mut power_defect: f64 = 0.0;
    let mut p = mats[0].clone();
    for (k, m) in mats.iter().enumerate().skip(1) {
        p = p.matmul(&mats[0]);
        power_defect = power_defect.max((m - &p).frobenius_norm() / norms[k].max(1.0));
    }

    let commuting = commutator_defect <= tol;
    let normal = commuting && normality_defect <= tol;
    let unitary = normal && unitarity_defect <= tol;
    let power_unitary = unitary && power_defect <= tol;
    TupleClass {
        commuting,
        normal,
        unitary,
        power_unitary,
        commutator_defect,
        normality_defect,
        unitarity_defect,
        power_defect,
    }
}

fn scale_of(t: &MatrixTuple) -> f64 {
    t.max_frobenius().max(1.0)
}

/// Largest strictly-lower (`lower_only`) or off-diagonal Frobenius norm of `Q* T_k Q`.
fn conjugation_residual(t: &MatrixTuple, q: &ComplexMatrix, lower_only: bool) -> f64 {
    t.iter()
        .map(|m| {
            let c = m.congruence(q);
            let mut s = 0.0;
            for i in 0..c.rows() {
                for j in 0..c.cols() {
                    if i > j || (!lower_only && i < j) {
                        s += c[(i, j)].norm_sqr();
                    }
                }
            }
            libm::sqrt(s)
        })
        .fold(0.0, f64::max)
}

fn diagonal_points(t: &MatrixTuple, q: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..q.cols())
        .map(|j| {
            let v = q.column(j);
            t.iter().map(|m| m.quadratic_form(&v)).collect()
        })
        .collect()
}

/// Simultaneous Schur triangularization of a commuting tuple.
pub fn joint_spectrum(t: &MatrixTuple, seed: u64, tol: &Tolerances) -> Result<JointSpectrum> {
    let class = classify(t, tol.psd_tol);
    if !class.commuting {
        return Err(Error::NotCommuting {
            defect: class.commutator_defect,
        });
    }
    let scale = scale_of(t);
    let mut best = f64::INFINITY;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_for(seed, attempt);
        let basis = match triangularize(t.matrices(), &mut rng, tol) {
            Ok(b) => b,
            Err(Error::NoConvergence(_)) => continue,
            Err(e) => return Err(e),
        };
        let residual = conjugation_residual(t, &basis, true);
        if residual <= tol.residual_tol * scale {
            return Ok(JointSpectrum {
                points: diagonal_points(t, &basis),
                basis,
                residual,
            });
        }
        best = best.min(residual);
    }
    Err(Error::TriangularizationFailed { residual: best })
}

fn is_scalar_tuple(mats: &[ComplexMatrix], tol: f64) -> bool {
    mats.iter().all(|m| {
        let n = m.rows() as f64;
        let mean = m.trace() / n;
        (m - &ComplexMatrix::identity(m.rows()).scale(mean)).frobenius_norm()
            <= tol * m.frobenius_norm().max(1.0)
    })
}

fn generic_combination(mats: &[ComplexMatrix], rng: &mut TcdRng) -> ComplexMatrix {
    let m = mats[0].rows();
    let mut l = ComplexMatrix::zeros(m, m);
    for t in mats {
        l = &l + &t.scale(complex_gaussian(rng));
    }
    l
}

/// A unit vector that is an eigenvector of every matrix in the (commuting) list.
fn common_eigenvector(
    mats: &[ComplexMatrix],
    rng: &mut TcdRng,
    tol: &Tolerances,
    depth: usize,
) -> Result<Vec<C64>> {
    let m = mats[0].rows();
    let mut e1 = alloc::vec![C64::new(0.0, 0.0); m];
    e1[0] = C64::new(1.0, 0.0);
    if m == 1 || is_scalar_tuple(mats, tol.residual_tol) {
        return Ok(e1);
    }
    if depth > MAX_DEPTH {
        return Err(Error::NoConvergence("common eigenvector search"));
    }
    let l = generic_combination(mats, rng);
    let lscale = l.frobenius_norm().max(1.0);
    let s = schur(&l)?;
    let mu = s.t[(0, 0)];
    let cluster = (0..m)
        .filter(|&i| (s.t[(i, i)] - mu).norm() <= 1e-6 * lscale)
        .count();
    if cluster == 1 {
        return Ok(s.q.column(0));
    }
    // Repeated eigenvalue of the mixture: its eigenspace is invariant under every
    // entry, so recurse inside it.
    let mut shifted = l.clone();
    for i in 0..m {
        shifted[(i, i)] -= mu;
    }
    let f = svd(&shifted)?;
    let null_cut = 1e-7 * lscale;
    let dim = f.s.iter().filter(|&&x| x <= null_cut).count().max(1);
    let space = f.v.columns(m - dim, dim);
    if dim == 1 {
        return Ok(space.column(0));
    }
    let restricted: Vec<ComplexMatrix> = mats.iter().map(|t| t.congruence(&space)).collect();
    let inner = common_eigenvector(&restricted, rng, tol, depth + 1)?;
    let mut v = space.mul_vec(&inner);
    normalize(&mut v);
    Ok(v)
}

fn triangularize(mats: &[ComplexMatrix], rng: &mut TcdRng, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = mats[0].rows();
    if n == 1 {
        return Ok(ComplexMatrix::identity(1));
    }
    let mut q = common_eigenvector(mats, rng, tol, 0)?;
    normalize(&mut q);
    let head = ComplexMatrix::from_columns(n, &[q.clone()]);
    let rest = orthonormal_complement(&head)?;
    let restricted: Vec<ComplexMatrix> = mats.iter().map(|t| t.congruence(&rest)).collect();
    let inner = triangularize(&restricted, rng, tol)?;
    let tail = rest.matmul(&inner);
    let mut basis = ComplexMatrix::zeros(n, n);
    basis.set_column(0, &q);
    basis.set_block(0, 1, &tail);
    Ok(basis)
}

/// Simultaneous unitary diagonalization of a commuting normal tuple.
pub fn simultaneous_diagonalize(t: &MatrixTuple, seed: u64, tol: &Tolerances) -> Result<JointSpectrum> {
    let class = classify(t, tol.psd_tol);
    if !class.normal {
        return Err(Error::NotNormalTuple {
            defect: class.commutator_defect.max(class.normality_defect),
        });
    }
    let scale = scale_of(t);
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_for(seed, attempt);
        let basis = match diagonalize_rec(t.matrices(), &mut rng, tol, 0) {
            Ok(b) => b,
            Err(Error::DegeneracyNotResolved { .. }) => continue,
            Err(e) => return Err(e),
        };
        let residual = conjugation_residual(t, &basis, false);
        if residual <= tol.residual_tol * scale {
            return Ok(JointSpectrum {
                points: diagonal_points(t, &basis),
                basis,
                residual,
            });
        }
    }
    Err(Error::DegeneracyNotResolved { depth: MAX_DEPTH })
}

fn diagonalize_rec(
    mats: &[ComplexMatrix],
    rng: &mut TcdRng,
    tol: &Tolerances,
    depth: usize,
) -> Result<ComplexMatrix> {
    let m = mats[0].rows();
    if m == 1 || is_scalar_tuple(mats, tol.residual_tol) {
        return Ok(ComplexMatrix::identity(m));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::DegeneracyNotResolved { depth });
    }
    let mut h = ComplexMatrix::zeros(m, m);
    for t in mats {
        h = &h + &t.hermitian_part().scale_real(gaussian(rng));
        h = &h + &t.skew_part().scale_real(gaussian(rng));
    }
    let eig = hermitian_eig_unchecked(&h.hermitian_part())?;
    let spread = eig.max() - eig.min();
    let gap_cut = 1e-8 * spread;

    let mut basis = ComplexMatrix::zeros(m, m);
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && eig.values[end] - eig.values[end - 1] < gap_cut.max(f64::MIN_POSITIVE) {
            end += 1;
        }
        let group = eig.vectors.columns(start, end - start);
        let block = if end - start == 1 {
            group
        } else {
            let restricted: Vec<ComplexMatrix> = mats.iter().map(|t| t.congruence(&group)).collect();
            group.matmul(&diagonalize_rec(&restricted, rng, tol, depth + 1)?)
        };
        basis.set_block(0, start, &block);
        start = end;
    }
    Ok(basis)
}

/// Greedy minimal-distance matching of two multisets of joint eigenvalues; returns the
/// largest matched distance (infinity if the sizes differ).
pub fn spectrum_distance(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let dist = |x: &[C64], y: &[C64]| -> f64 {
        libm::sqrt(x.iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).sum())
    };
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push((dist(x, y), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = alloc::vec![false; a.len()];
    let mut used_b = alloc::vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for (dd, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(dd);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, normal_tuple};
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_pair() -> MatrixTuple {
        MatrixTuple::new(vec![
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap(),
            ComplexMatrix::identity(2),
        ])
        .unwrap()
    }

    fn diag_pair() -> MatrixTuple {
        MatrixTuple::new(vec![
            ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]),
            ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(4.0, 0.0)]),
        ])
        .unwrap()
    }

    #[test]
    fn classify_examples() {
        let k = classify(&sigma_pair(), 1e-9);
        assert!(k.power_unitary && k.unitary && k.normal && k.commuting);
        let proj = MatrixTuple::new(vec![
            ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]),
            ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]),
        ])
        .unwrap();
        let k = classify(&proj, 1e-9);
        assert!(k.normal && !k.unitary && !k.power_unitary);
        let nil = MatrixTuple::new(vec![
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap(),
            ComplexMatrix::zeros(2, 2),
        ])
        .unwrap();
        let k = classify(&nil, 1e-9);
        assert!(k.commuting && !k.normal);
    }

    #[test]
    fn joint_spectrum_examples() {
        let tol = Tolerances::default();
        let js = joint_spectrum(&diag_pair(), 0, &tol).unwrap();
        let expected = vec![vec![c(1.0, 0.0), c(3.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]];
        assert!(spectrum_distance(&js.points, &expected) < 1e-12);

        let js = joint_spectrum(&sigma_pair(), 0, &tol).unwrap();
        let expected = vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)]];
        assert!(spectrum_distance(&js.points, &expected) < 1e-12);
    }

    #[test]
    fn single_normal_matrix_gives_eigenvalues() {
        let tol = Tolerances::default();
        let mut rng = rng_for(5, 0);
        let w = haar_unitary(&mut rng, 4);
        let eigs = [c(1.0, 2.0), c(-1.0, 0.5), c(0.0, -3.0), c(2.0, 0.0)];
        let n = w.matmul(&ComplexMatrix::from_diagonal(&eigs)).matmul(&w.adjoint());
        let t = MatrixTuple::new(vec![n]).unwrap();
        let js = joint_spectrum(&t, 1, &tol).unwrap();
        let expected: Vec<Vec<C64>> = eigs.iter().map(|&z| vec![z]).collect();
        assert!(spectrum_distance(&js.points, &expected) < 1e-10);
    }

    #[test]
    fn nilpotent_pair_triangularizes() {
        let tol = Tolerances::default();
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]])
            .unwrap();
        let t = MatrixTuple::new(vec![j.clone(), j.matmul(&j)]).unwrap();
        let js = joint_spectrum(&t, 2, &tol).unwrap();
        for p in &js.points {
            assert!(p.iter().all(|z| z.norm() < 1e-6));
        }
        assert!(js.basis.adjoint_mul(&js.basis).identity_defect() < 1e-12);
    }

    #[test]
    fn diagonalize_examples() {
        let tol = Tolerances::default();
        let js = simultaneous_diagonalize(&sigma_pair(), 0, &tol).unwrap();
        assert!(js.residual < 1e-12);
        let expected = vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)]];
        assert!(spectrum_distance(&js.points, &expected) < 1e-12);

        let ones = MatrixTuple::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)]).unwrap();
        let js = simultaneous_diagonalize(&ones, 0, &tol).unwrap();
        for p in &js.points {
            assert_eq!(p, &vec![c(1.0, 0.0), c(1.0, 0.0)]);
        }
    }

    #[test]
    fn planted_normal_tuple_recovered() {
        let tol = Tolerances::default();
        let mut rng = rng_for(11, 0);
        let w = haar_unitary(&mut rng, 5);
        let d1 = [c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.5), c(1.0, 0.0)];
        let d2 = [c(0.0, 1.0), c(2.0, 0.0), c(0.0, 1.0), c(3.0, 0.0), c(0.0, 1.0)];
        let mk = |dg: &[C64]| w.matmul(&ComplexMatrix::from_diagonal(dg)).matmul(&w.adjoint());
        let t = MatrixTuple::new(vec![mk(&d1), mk(&d2)]).unwrap();
        let js = simultaneous_diagonalize(&t, 3, &tol).unwrap();
        assert!(js.residual <= 1e-9);
        let planted: Vec<Vec<C64>> = (0..5).map(|i| vec![d1[i], d2[i]]).collect();
        assert!(spectrum_distance(&js.points, &planted) < 1e-9);
    }

    #[test]
    fn rejects_non_commuting() {
        let tol = Tolerances::default();
        let t = MatrixTuple::new(vec![
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap(),
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(joint_spectrum(&t, 0, &tol), Err(Error::NotCommuting { .. })));
        let nil = MatrixTuple::new(vec![
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            simultaneous_diagonalize(&nil, 0, &tol),
            Err(Error::NotNormalTuple { .. })
        ));
    }

    #[test]
    fn triangularization_agrees_with_diagonalization_on_normal_tuples() {
        let tol = Tolerances::default();
        let mut rng = rng_for(21, 0);
        for seed in 0..10 {
            let t = normal_tuple(&mut rng, 3, 4);
            let a = joint_spectrum(&t, seed, &tol).unwrap();
            let b = simultaneous_diagonalize(&t, seed, &tol).unwrap();
            assert!(spectrum_distance(&a.points, &b.points) < 1e-7);
        }
    }
}
