//! Finite-dimensional unitary power dilations and atomic decompositions.
//!
//! For a Toeplitz-contractive tuple the unit-diagonal block form `M` factors as `F* F`.
//! Writing `F = [F_0 | F_1 | ... | F_d]`, the Toeplitz structure gives
//! `D* D = R* R` for `D = [F_0 .. F_{d-1}]` and `R = [F_1 .. F_d]`, so `D v ↦ R v` is a
//! partial isometry. Completing it to a unitary `S` and setting `U = S*`, `V = F_0`
//! gives `V* U^k V = T_k`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    factor_from_eig, hermitian_eig_unchecked, orthonormal_complement, polar_unitary, psd_from_eig,
    svd, ComplexMatrix, Tolerances,
};
use crate::moduli::is_toeplitz_contractive;
use crate::random::{haar_unitary, random_isometry, rng_for};
use crate::spectra::simultaneous_diagonalize;
use crate::toeplitz::{assemble_block, MatrixTuple};

/// Default angular tolerance (radians) for merging eigenvalues of the dilation.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

/// Largest polar correction accepted when snapping the shift extension to a unitary.
const MAX_POLAR_CORRECTION: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Dilation {
    /// Dimension of the dilation space.
    pub r: usize,
    /// `r x r` unitary.
    pub u: ComplexMatrix,
    /// `r x n` isometry.
    pub v: ComplexMatrix,
    /// `‖V* U^k V - T_k‖_F` for `k = 1..=d`.
    pub residuals: Vec<f64>,
    pub unitarity_defect: f64,
    pub isometry_defect: f64,
    /// `‖D* D - R* R‖_F` of the Gram factor.
    pub gram_defect: f64,
    /// Frobenius size of the polar correction applied to the shift extension.
    pub polar_correction: f64,
}

impl Dilation {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `(V* U^k V)_{k=1..d}`.
    pub fn compressions(&self, d: usize) -> Result<MatrixTuple> {
        let mut out = Vec::with_capacity(d);
        let mut p = self.u.clone();
        for _ in 0..d {
            out.push(p.congruence(&self.v));
            p = p.matmul(&self.u);
        }
        MatrixTuple::new(out)
    }
}

#[derive(Debug, Clone)]
pub struct Atom {
    /// Point on the unit circle.
    pub lambda: C64,
    /// Positive semidefinite weight.
    pub weight: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct AtomicDecomposition {
    pub d: usize,
    pub n: usize,
    pub atoms: Vec<Atom>,
    /// `‖Σ Q_j - I‖_F`.
    pub identity_residual: f64,
    /// `‖Σ λ_j^k Q_j - T_k‖_F` against the decomposed tuple (zeros when built from atoms).
    pub moment_residuals: Vec<f64>,
}

impl AtomicDecomposition {
    /// Wraps a list of atoms, checking unit-modulus points, PSD weights of one shape and
    /// `Σ Q_j = I`.
    pub fn from_atoms(d: usize, atoms: Vec<Atom>, tol: &Tolerances) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDecomposition("d must be at least 1"));
        }
        let first = atoms
            .first()
            .ok_or(Error::InvalidDecomposition("no atoms"))?;
        let n = first.weight.rows();
        let mut sum = ComplexMatrix::zeros(n, n);
        for a in &atoms {
            if (a.lambda.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidDecomposition("atom point is off the unit circle"));
            }
            if a.weight.rows() != n || a.weight.cols() != n {
                return Err(Error::InvalidDecomposition("atom weights differ in shape"));
            }
            let asym = (&a.weight - &a.weight.adjoint()).frobenius_norm();
            if asym > tol.psd_tol * a.weight.frobenius_norm().max(1.0) {
                return Err(Error::InvalidDecomposition("atom weight is not Hermitian"));
            }
            let eig = hermitian_eig_unchecked(&a.weight.hermitian_part())?;
            if !psd_from_eig(&eig, tol) {
                return Err(Error::InvalidDecomposition("atom weight is not positive semidefinite"));
            }
            sum = &sum + &a.weight;
        }
        let identity_residual = sum.identity_defect();
        if identity_residual > tol.residual_tol {
            return Err(Error::InvalidDecomposition("weights do not sum to the identity"));
        }
        Ok(Self {
            d,
            n,
            atoms,
            identity_residual,
            moment_residuals: alloc::vec![0.0; d],
        })
    }

    pub fn ell(&self) -> usize {
        self.atoms.len()
    }

    /// `Σ_j λ_j^k Q_j` for `k = 1..=d`.
    pub fn moments(&self) -> Result<MatrixTuple> {
        let mut out = alloc::vec![ComplexMatrix::zeros(self.n, self.n); self.d];
        for a in &self.atoms {
            let mut p = a.lambda;
            for m in out.iter_mut() {
                *m = &*m + &a.weight.scale(p);
                p *= a.lambda;
            }
        }
        MatrixTuple::new(out)
    }
}

fn allowed(tol: &Tolerances, t: &MatrixTuple) -> f64 {
    tol.residual_tol * t.max_frobenius().max(1.0)
}

/// `A (A* A)^{-1/2}` for `A` with nearly orthonormal columns.
fn snap_columns(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols() == 0 {
        return Ok(a.clone());
    }
    let eig = hermitian_eig_unchecked(&a.adjoint_mul(a).hermitian_part())?;
    if eig.min() <= 0.0 {
        return Err(Error::RankDefect("shift image is rank deficient"));
    }
    Ok(a.matmul(&eig.map_values(|x| 1.0 / libm::sqrt(x))))
}

/// Unitary power dilation `(U, V)` of a Toeplitz-contractive tuple, with `V* U^k V = T_k`
/// and dilation dimension `r = rank` of the unit-diagonal block form.
pub fn dilate(t: &MatrixTuple, tol: &Tolerances) -> Result<Dilation> {
    let (d, n) = (t.d(), t.n());
    let m = assemble_block(t, 1.0)?.matrix;
    let eig = hermitian_eig_unchecked(&m)?;
    if !psd_from_eig(&eig, tol) {
        return Err(Error::NotContractive {
            min_eigenvalue: eig.min(),
        });
    }
    // Eigenvalues below the rank cutoff (including slightly negative ones) are floored.
    let f = factor_from_eig(&eig, tol)?;
    let r = f.rows();
    let dmat = f.block(0, 0, r, d * n);
    let rmat = f.block(0, n, r, d * n);
    let gram_defect = (&dmat.adjoint_mul(&dmat) - &rmat.adjoint_mul(&rmat)).frobenius_norm();

    let split = svd(&dmat)?;
    let top = split.s.first().copied().unwrap_or(0.0);
    let k = split.rank_above(tol.rank_tol * top);
    let p = split.u.columns(0, k);
    let mut q = rmat.matmul(&split.v.columns(0, k));
    for j in 0..k {
        let inv = 1.0 / split.s[j];
        for i in 0..r {
            q[(i, j)] *= inv;
        }
    }
    let q_defect = q.adjoint_mul(&q).identity_defect();
    if q_defect > MAX_POLAR_CORRECTION {
        return Err(Error::RankDefect("shift is not isometric on the range of D"));
    }
    let q = snap_columns(&q)?;
    let nd = orthonormal_complement(&p)?;
    let nr = orthonormal_complement(&q)?;
    if nd.cols() != nr.cols() {
        return Err(Error::RankDefect("complement dimensions differ"));
    }
    let s_hat = &q.matmul(&p.adjoint()) + &nr.matmul(&nd.adjoint());
    let (s, polar_correction) = polar_unitary(&s_hat)?;
    if polar_correction > MAX_POLAR_CORRECTION {
        return Err(Error::VerificationFailed {
            what: "polar correction",
            value: polar_correction,
            allowed: MAX_POLAR_CORRECTION,
        });
    }
    let u = s.adjoint();
    let v = f.block(0, 0, r, n);

    let mut residuals = Vec::with_capacity(d);
    let mut power = u.clone();
    for tk in t.iter() {
        residuals.push((&power.congruence(&v) - tk).frobenius_norm());
        power = power.matmul(&u);
    }
    let out = Dilation {
        r,
        unitarity_defect: u.adjoint_mul(&u).identity_defect(),
        isometry_defect: v.adjoint_mul(&v).identity_defect(),
        u,
        v,
        residuals,
        gram_defect,
        polar_correction,
    };
    let limit = allowed(tol, t);
    for (what, value) in [
        ("compression residual", out.max_residual()),
        ("unitarity defect", out.unitarity_defect),
        ("isometry defect", out.isometry_defect),
    ] {
        if !(value <= limit) {
            return Err(Error::VerificationFailed {
                what,
                value,
                allowed: limit,
            });
        }
    }
    Ok(out)
}

/// Groups angles into chains whose consecutive circular gaps are at most `tol`. Returns
/// index groups.
fn cluster_angles(angles: &[f64], tol: f64) -> Result<Vec<Vec<usize>>> {
    let m = angles.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| angles[i].total_cmp(&angles[j]));
    if m <= 1 {
        return Ok(alloc::vec![order]);
    }
    // Start right after the widest circular gap so no chain wraps around.
    let gap = |a: usize| -> f64 {
        let next = order[(a + 1) % m];
        let g = angles[next] - angles[order[a]];
        if a + 1 == m {
            g + TAU
        } else {
            g
        }
    };
    let widest = (0..m).max_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap_or(0);
    let start = (widest + 1) % m;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current = alloc::vec![order[start]];
    let mut span = 0.0;
    for step in 0..m - 1 {
        let a = (start + step) % m;
        let g = gap(a);
        if g <= tol {
            span += g;
            if span > 10.0 * tol {
                return Err(Error::ClusterAmbiguity { span });
            }
            current.push(order[(a + 1) % m]);
        } else {
            groups.push(core::mem::take(&mut current));
            current.push(order[(a + 1) % m]);
            span = 0.0;
        }
    }
    groups.push(current);
    Ok(groups)
}

/// Atomic decomposition `T_k = Σ_j λ_j^k Q_j` read off the spectral decomposition of the
/// dilation: eigenvalues of `U` within `cluster_tol` radians are merged and each cluster
/// projection `P_j` gives `Q_j = V* P_j V`.
pub fn decompose(t: &MatrixTuple, cluster_tol: f64, tol: &Tolerances) -> Result<AtomicDecomposition> {
    if !(cluster_tol > 0.0 && cluster_tol < PI) {
        return Err(Error::InvalidArgument("cluster tolerance must lie in (0, π)"));
    }
    let (d, n) = (t.d(), t.n());
    let dil = dilate(t, tol)?;
    let single = MatrixTuple::new(alloc::vec![dil.u.clone()])?;
    let spectrum = simultaneous_diagonalize(&single, 0, tol)?;
    let angles: Vec<f64> = spectrum.points.iter().map(|p| p[0].arg()).collect();
    let groups = cluster_angles(&angles, cluster_tol)?;
    let w = dil.v.adjoint_mul(&spectrum.basis);

    let mut atoms = Vec::with_capacity(groups.len());
    for g in groups {
        let mean: C64 = g.iter().map(|&i| spectrum.points[i][0]).sum::<C64>() / g.len() as f64;
        let lambda = mean / mean.norm();
        let cols = ComplexMatrix::from_columns(n, &g.iter().map(|&i| w.column(i)).collect::<Vec<_>>());
        let weight = cols.matmul(&cols.adjoint()).hermitian_part();
        if weight.trace().re <= 1e-15 * n as f64 {
            continue;
        }
        atoms.push(Atom { lambda, weight });
    }

    let mut dec = AtomicDecomposition::from_atoms(d, atoms, tol).map_err(|e| match e {
        Error::InvalidDecomposition(what) => Error::VerificationFailed {
            what,
            value: f64::NAN,
            allowed: tol.residual_tol,
        },
        other => other,
    })?;
    let rebuilt = dec.moments()?;
    dec.moment_residuals = rebuilt
        .iter()
        .zip(t.iter())
        .map(|(a, b)| (a - b).frobenius_norm())
        .collect();
    let limit = allowed(tol, t);
    let worst = dec.moment_residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= limit) {
        return Err(Error::VerificationFailed {
            what: "moment reconstruction",
            value: worst,
            allowed: limit,
        });
    }
    Ok(dec)
}

/// `T_k = Σ_j λ_j^k Q_j`, revalidating the decomposition first.
pub fn tuple_from_decomposition(dec: &AtomicDecomposition, tol: &Tolerances) -> Result<MatrixTuple> {
    let checked = AtomicDecomposition::from_atoms(dec.d, dec.atoms.clone(), tol)?;
    if checked.n != dec.n {
        return Err(Error::InvalidDecomposition("recorded size disagrees with the atoms"));
    }
    let t = checked.moments()?;
    if !is_toeplitz_contractive(&t, tol)? {
        return Err(Error::VerificationFailed {
            what: "contractivity of the assembled tuple",
            value: crate::moduli::contractivity_margin(&t)?,
            allowed: -tol.psd_tol,
        });
    }
    Ok(t)
}

/// `(V* U^k V)_{k=1..d}` for a Haar unitary `U` on `C^N` and a random isometry
/// `V: C^n -> C^N`.
pub fn random_contractive_tuple(d: usize, n: usize, big_n: usize, seed: u64) -> Result<MatrixTuple> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("d and n must be positive"));
    }
    if big_n < n {
        return Err(Error::InvalidArgument("ambient dimension N must be at least n"));
    }
    let mut rng = rng_for(seed, 0);
    let u = haar_unitary(&mut rng, big_n);
    let v = random_isometry(&mut rng, big_n, n);
    let mut out = Vec::with_capacity(d);
    let mut p = u.clone();
    for _ in 0..d {
        out.push(p.congruence(&v));
        p = p.matmul(&u);
    }
    MatrixTuple::new(out)
}
