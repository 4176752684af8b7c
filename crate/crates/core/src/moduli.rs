//! Toeplitz modulus, Toeplitz numerical radius, Toeplitz spectral radii, the metric
//! `D^ρ`, row-contractivity and the norm inequality for Toeplitz-contractive tuples.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig_unchecked, is_psd, norm, operator_norm, psd_from_eig, ComplexMatrix, Tolerances,
};
use crate::par::map_indexed;
use crate::random::{gaussian_matrix, rng_for, unit_vector};
use crate::spectra::{joint_spectrum, simultaneous_diagonalize, spectrum_distance, JointSpectrum};
use crate::toeplitz::{assemble_block, assemble_scalar, nu, nu_with_vector, MatrixTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusKind {
    Rho,
    Omega,
    SpectralRadius,
    GelfandSpectralRadius,
}

impl ModulusKind {
    pub fn name(self) -> &'static str {
        match self {
            ModulusKind::Rho => "rho",
            ModulusKind::Omega => "omega",
            ModulusKind::SpectralRadius => "r",
            ModulusKind::GelfandSpectralRadius => "rG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Multistart,
    SpectrumMax,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Multistart => "multistart",
            Method::SpectrumMax => "spectrum-max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Bottom eigenvector of the zero-diagonal block form.
    BlockEigenvector,
    /// Unit `ξ`; `aux` holds the coefficient vector `c`.
    UnitVectorXi,
    /// Coefficient vector `c` alone.
    CoefficientC,
    /// Unit joint eigenvector; `aux` holds the spectrum point `λ`.
    SpectrumPoint,
}

impl WitnessKind {
    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::BlockEigenvector => "block-eigenvector",
            WitnessKind::UnitVectorXi => "unit-vector-xi",
            WitnessKind::CoefficientC => "coefficient-c",
            WitnessKind::SpectrumPoint => "spectrum-point",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub kind: WitnessKind,
    /// Unit vector.
    pub vector: Vec<C64>,
    /// Value certified by the witness.
    pub achieved: f64,
    pub aux: Option<Vec<C64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub restarts: usize,
    /// Total alternating steps over all restarts.
    pub iterations: usize,
    /// Restarts that stalled before hitting the iteration cap.
    pub converged_restarts: usize,
    pub converged: bool,
    /// Whether the objective never decreased along any restart.
    pub monotone: bool,
    /// Restart that produced the reported value.
    pub best_restart: Option<usize>,
    /// Distance between the triangularization and diagonalization spectra (normal tuples).
    pub spectrum_agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReport {
    pub kind: ModulusKind,
    pub value: f64,
    pub witness: Witness,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// `ρ(S - T)`.
    pub forward: f64,
    /// `ρ(T - S)`.
    pub backward: f64,
    pub value: f64,
}

fn closed_form_diagnostics() -> Diagnostics {
    Diagnostics {
        converged: true,
        monotone: true,
        ..Diagnostics::default()
    }
}

/// `ρ(T) = max(0, -λ_min)` of the zero-diagonal block Toeplitz form.
pub fn rho(t: &MatrixTuple) -> Result<ModulusReport> {
    let form = assemble_block(t, 0.0)?;
    let eig = hermitian_eig_unchecked(&form.matrix)?;
    let value = (-eig.min()).max(0.0);
    Ok(ModulusReport {
        kind: ModulusKind::Rho,
        value,
        witness: Witness {
            kind: WitnessKind::BlockEigenvector,
            vector: eig.vector(0),
            achieved: value,
            aux: None,
        },
        method: Method::ClosedForm,
        diagnostics: closed_form_diagnostics(),
    })
}

pub fn is_toeplitz_contractive(t: &MatrixTuple, tol: &Tolerances) -> Result<bool> {
    let form = assemble_block(t, 1.0)?;
    Ok(psd_from_eig(&hermitian_eig_unchecked(&form.matrix)?, tol))
}

/// Smallest eigenvalue of the unit-diagonal block form.
pub fn contractivity_margin(t: &MatrixTuple) -> Result<f64> {
    let form = assemble_block(t, 1.0)?;
    Ok(hermitian_eig_unchecked(&form.matrix)?.min())
}

/// `I - Σ T_k T_k* ⪰ 0`.
pub fn is_row_contractive(t: &MatrixTuple, tol: &Tolerances) -> Result<bool> {
    let n = t.n();
    let mut m = ComplexMatrix::identity(n);
    for a in t.iter() {
        m = &m - &a.matmul(&a.adjoint());
    }
    is_psd(&m.hermitian_part(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaOptions {
    pub starts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Number of steps over which the relative improvement is measured.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            max_iters: 500,
            seed: 0,
            stall_window: 10,
            stall_tol: 1e-12,
        }
    }
}

struct AscentRun {
    value: f64,
    xi: Vec<C64>,
    c: Vec<C64>,
    iterations: usize,
    converged: bool,
    monotone: bool,
}

/// `a_k = Σ_j conj(c_{j+k}) c_j`, for `k = 1..=d`.
fn autocorrelation(c: &[C64]) -> Vec<C64> {
    let d = c.len() - 1;
    (1..=d)
        .map(|k| (0..=d - k).map(|j| c[j + k].conj() * c[j]).sum())
        .collect()
}

fn ascent(t: &MatrixTuple, start: usize, opts: &OmegaOptions) -> Result<AscentRun> {
    let mut rng = rng_for(opts.seed, start as u64);
    let mut xi = unit_vector(&mut rng, t.n());
    let scale = t.max_frobenius().max(1.0);
    let slack = 1e-12 * scale;

    let (mut value, mut c) = nu_with_vector(&t.moments(&xi))?;
    let mut history = alloc::vec![value];
    let mut monotone = true;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let a = autocorrelation(&c);
        let mut x = ComplexMatrix::zeros(t.n(), t.n());
        for (ak, tk) in a.iter().zip(t.iter()) {
            x = &x + &tk.scale(*ak);
        }
        let eig = hermitian_eig_unchecked(&x.hermitian_part())?;
        let mid = -2.0 * eig.min();
        let next_xi = eig.vector(0);
        let (next, next_c) = nu_with_vector(&t.moments(&next_xi))?;
        if mid < value - slack || next.max(0.0) < mid.max(0.0) - slack {
            monotone = false;
        }
        if next >= value {
            xi = next_xi;
            c = next_c;
            value = next;
        }
        history.push(value);
        let w = opts.stall_window;
        if history.len() > w {
            let old = history[history.len() - 1 - w];
            if value - old <= opts.stall_tol * value.abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }
    Ok(AscentRun {
        value,
        xi,
        c,
        iterations,
        converged,
        monotone,
    })
}

/// Lower bound on the Toeplitz numerical radius by multistart alternating ascent over
/// unit `ξ` and unit coefficient vectors `c`. The reported value is `ν` of the witness
/// moments `(ξ* T_k ξ)`, capped at `ρ(T)`.
pub fn omega(t: &MatrixTuple, opts: &OmegaOptions) -> Result<ModulusReport> {
    if opts.starts == 0 || opts.stall_window == 0 {
        return Err(Error::InvalidArgument("omega needs at least one start"));
    }
    let rho_value = rho(t)?.value;
    let runs = map_indexed(opts.starts, |j| ascent(t, j, opts));
    let mut best: Option<(usize, AscentRun)> = None;
    let mut diagnostics = Diagnostics {
        restarts: opts.starts,
        monotone: true,
        ..Diagnostics::default()
    };
    for (j, run) in runs.into_iter().enumerate() {
        let run = run?;
        diagnostics.iterations += run.iterations;
        diagnostics.converged_restarts += usize::from(run.converged);
        diagnostics.monotone &= run.monotone;
        let better = match &best {
            None => true,
            Some((_, b)) => run.value > b.value,
        };
        if better {
            best = Some((j, run));
        }
    }
    let (j, run) = best.expect("at least one start");
    diagnostics.best_restart = Some(j);
    diagnostics.converged = run.converged;
    let value = run.value.min(rho_value).max(0.0);
    Ok(ModulusReport {
        kind: ModulusKind::Omega,
        value,
        witness: Witness {
            kind: WitnessKind::UnitVectorXi,
            vector: run.xi,
            achieved: run.value,
            aux: Some(run.c),
        },
        method: Method::Multistart,
        diagnostics,
    })
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if b - a < 1e-14 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (f1, x1)
    } else {
        (f2, x2)
    }
}

/// Maximum of a `2π`-periodic function: uniform grid, then golden-section refinement
/// around the best `cells` grid points. Returns `(max, θ)`.
pub fn circle_max(f: impl Fn(f64) -> f64, grid: usize, cells: usize) -> (f64, f64) {
    let grid = grid.max(3);
    let h = TAU / grid as f64;
    let samples: Vec<f64> = (0..grid).map(|i| f(i as f64 * h)).collect();
    let mut order: Vec<usize> = (0..grid).collect();
    order.sort_by(|&i, &j| samples[j].total_cmp(&samples[i]).then(i.cmp(&j)));
    let mut best = (samples[order[0]], order[0] as f64 * h);
    for &i in order.iter().take(cells.max(1)) {
        let centre = i as f64 * h;
        let (v, th) = golden_max(&f, centre - h, centre + h);
        if v > best.0 {
            best = (v, th);
        }
    }
    best
}

/// `w(T) = max_θ λ_max(Herm(e^{iθ} T))`.
pub fn classical_numerical_radius(t: &ComplexMatrix, grid: usize) -> Result<f64> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    let f = |theta: f64| {
        let rot = t.scale(C64::from_polar(1.0, theta)).hermitian_part();
        hermitian_eig_unchecked(&rot).map(|e| e.max()).unwrap_or(f64::NAN)
    };
    let (value, _) = circle_max(f, grid, 2);
    if value.is_nan() {
        return Err(Error::NoConvergence("numerical radius sweep"));
    }
    Ok(value.max(0.0))
}

fn spectrum_report(
    kind: ModulusKind,
    js: &JointSpectrum,
    agreement: Option<f64>,
) -> Result<ModulusReport> {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (j, p) in js.points.iter().enumerate() {
        let v = nu(p)?;
        if v > best.0 {
            best = (v, j);
        }
    }
    let j = best.1;
    Ok(ModulusReport {
        kind,
        value: best.0,
        witness: Witness {
            kind: WitnessKind::SpectrumPoint,
            vector: js.basis.column(j),
            achieved: best.0,
            aux: Some(js.points[j].clone()),
        },
        method: Method::SpectrumMax,
        diagnostics: Diagnostics {
            converged: true,
            monotone: true,
            spectrum_agreement: agreement,
            ..Diagnostics::default()
        },
    })
}

/// Toeplitz spectral radius of a commuting tuple: the largest `ν(λ)` over its joint
/// spectrum.
pub fn spectral_radius(t: &MatrixTuple, seed: u64, tol: &Tolerances) -> Result<ModulusReport> {
    let js = joint_spectrum(t, seed, tol)?;
    spectrum_report(ModulusKind::SpectralRadius, &js, None)
}

/// Gelfand-Toeplitz spectral radius of a commuting normal tuple, from a simultaneous
/// diagonalization. The diagonalization spectrum is cross-checked against the
/// triangularization spectrum.
pub fn gelfand_spectral_radius(t: &MatrixTuple, seed: u64, tol: &Tolerances) -> Result<ModulusReport> {
    let diag = simultaneous_diagonalize(t, seed, tol)?;
    let tri = joint_spectrum(t, seed, tol)?;
    let agreement = spectrum_distance(&diag.points, &tri.points);
    let allowed = 1e-6 * t.max_frobenius().max(1.0);
    if !(agreement <= allowed) {
        return Err(Error::VerificationFailed {
            what: "spectrum agreement",
            value: agreement,
            allowed,
        });
    }
    spectrum_report(ModulusKind::GelfandSpectralRadius, &diag, Some(agreement))
}

/// `D^ρ(S, T) = (ρ(S - T) + ρ(T - S)) / 2`.
pub fn metric_drho(s: &MatrixTuple, t: &MatrixTuple) -> Result<MetricReport> {
    let forward = rho(&s.sub(t)?)?.value;
    let backward = rho(&t.sub(s)?)?.value;
    Ok(MetricReport {
        forward,
        backward,
        value: 0.5 * (forward + backward),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormInequalityReport {
    pub trials: usize,
    pub violations: usize,
    pub worst_slack: f64,
    pub samples: Vec<NormSample>,
}

/// `‖I ⊗ A_0 + Σ T_k ⊗ A_k‖` against `max_{|z|=1} ‖A_0 + Σ z^k A_k‖` for one coefficient
/// set `A_0, ..., A_d`.
pub fn norm_inequality_sample(
    t: &MatrixTuple,
    coeffs: &[ComplexMatrix],
    grid: usize,
) -> Result<NormSample> {
    if coeffs.len() != t.d() + 1 {
        return Err(Error::DimensionMismatch("need d + 1 coefficient matrices"));
    }
    let m = coeffs[0].rows();
    if coeffs.iter().any(|a| a.rows() != m || a.cols() != m) {
        return Err(Error::DimensionMismatch("coefficients must share one square shape"));
    }
    let mut lhs_mat = ComplexMatrix::identity(t.n()).kron(&coeffs[0]);
    for (tk, ak) in t.iter().zip(&coeffs[1..]) {
        lhs_mat = &lhs_mat + &tk.kron(ak);
    }
    let lhs = operator_norm(&lhs_mat)?;
    let f = |theta: f64| {
        let z = C64::from_polar(1.0, theta);
        let mut p = coeffs[0].clone();
        let mut zk = C64::new(1.0, 0.0);
        for ak in &coeffs[1..] {
            zk *= z;
            p = &p + &ak.scale(zk);
        }
        operator_norm(&p).unwrap_or(f64::NAN)
    };
    let (rhs, _) = circle_max(f, grid, 2);
    if rhs.is_nan() {
        return Err(Error::NoConvergence("circle sweep"));
    }
    let mut scale = 0.0;
    for a in coeffs {
        scale += operator_norm(a)?;
    }
    Ok(NormSample {
        m,
        lhs,
        rhs,
        slack: rhs - lhs,
        scale: scale.max(1.0),
    })
}

/// Random trials of the norm inequality for a Toeplitz-contractive tuple. Each trial
/// draws a size `m ≤ m_max` and Gaussian coefficients.
pub fn check_norm_inequality(
    t: &MatrixTuple,
    trials: usize,
    m_max: usize,
    grid: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<NormInequalityReport> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1"));
    }
    let margin = contractivity_margin(t)?;
    if !is_toeplitz_contractive(t, tol)? {
        return Err(Error::NotContractive {
            min_eigenvalue: margin,
        });
    }
    let d = t.d();
    let samples = map_indexed(trials, |i| {
        let mut rng = rng_for(seed, i as u64);
        let m = 1 + (rand::Rng::random_range(&mut rng, 0..m_max));
        let coeffs: Vec<ComplexMatrix> = (0..=d).map(|_| gaussian_matrix(&mut rng, m, m)).collect();
        norm_inequality_sample(t, &coeffs, grid)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for s in &samples {
        if s.slack < -10.0 * tol.psd_tol * s.scale {
            violations += 1;
        }
        worst = worst.min(s.slack);
    }
    Ok(NormInequalityReport {
        trials,
        violations,
        worst_slack: if samples.is_empty() { 0.0 } else { worst },
        samples,
    })
}

/// `ν(ξ* T_k ξ)` for a unit `ξ`: the objective certified by an omega witness.
pub fn omega_objective(t: &MatrixTuple, xi: &[C64]) -> Result<f64> {
    if (norm(xi) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("xi must be a unit vector"));
    }
    nu(&t.moments(xi))
}

/// `-c* Λ_0(m(ξ)) c`.
pub fn ascent_objective(t: &MatrixTuple, c: &[C64], xi: &[C64]) -> Result<f64> {
    let form = assemble_scalar(&t.moments(xi), 0.0)?;
    Ok(-form.matrix.quadratic_form(c).re)
}
