use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {allowed:e}")]
    NotHermitian { asymmetry: f64, allowed: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("point has modulus {modulus:e}, too close to zero")]
    ZeroModulus { modulus: f64 },
    #[error("point has modulus {modulus}, not on the unit circle")]
    OffCircle { modulus: f64 },
    #[error("tuple is not commuting: commutator norm {defect:e}")]
    NotCommuting { defect: f64 },
    #[error("tuple is not a commuting normal tuple: defect {defect:e}")]
    NotNormalTuple { defect: f64 },
    #[error("simultaneous triangularization failed: residual {residual:e}")]
    TriangularizationFailed { residual: f64 },
    #[error("degenerate joint eigenspace not resolved after {depth} refinements")]
    DegeneracyNotResolved { depth: usize },
    #[error("tuple is not Toeplitz-contractive: minimum eigenvalue {min_eigenvalue:e} of the unit-diagonal block form")]
    NotContractive { min_eigenvalue: f64 },
    #[error("shift extension rank defect: {0}")]
    RankDefect(&'static str),
    #[error("dilation verification failed: {what} {value:e} exceeds {allowed:e}")]
    VerificationFailed {
        what: &'static str,
        value: f64,
        allowed: f64,
    },
    #[error("eigenvalue clusters overlap: cluster spans {span:e} rad")]
    ClusterAmbiguity { span: f64 },
    #[error("invalid atomic decomposition: {0}")]
    InvalidDecomposition(&'static str),
}

impl Error {
    /// Numerical failures, as opposed to bad input or violated preconditions.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::TriangularizationFailed { .. }
                | Error::DegeneracyNotResolved { .. }
                | Error::VerificationFailed { .. }
                | Error::RankDefect(_)
                | Error::ClusterAmbiguity { .. }
        )
    }

    /// Violated mathematical preconditions (the input parsed, but the operation does
    /// not apply to it).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotPsd { .. }
                | Error::NotContractive { .. }
                | Error::NotCommuting { .. }
                | Error::NotNormalTuple { .. }
                | Error::NotHermitian { .. }
                | Error::InvalidDecomposition(_)
                | Error::ZeroModulus { .. }
                | Error::OffCircle { .. }
        )
    }
}
