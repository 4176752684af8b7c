//! JSON documents for tuples and atomic decompositions. Complex numbers are `[re, im]`
//! pairs and matrices are row-major nested arrays.

use serde::{Deserialize, Serialize};
use tcd_core::dilation::{Atom, AtomicDecomposition};
use tcd_core::{ComplexMatrix, MatrixTuple, Tolerances, C64};

use crate::error::CliError;

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex_to_json(z: C64) -> JsonComplex {
    [z.re, z.im]
}

pub fn complex_from_json(z: JsonComplex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn vector_to_json(v: &[C64]) -> Vec<JsonComplex> {
    v.iter().copied().map(complex_to_json).collect()
}

pub fn vector_from_json(v: &[JsonComplex]) -> Vec<C64> {
    v.iter().copied().map(complex_from_json).collect()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows()).map(|i| vector_to_json(m.row(i))).collect()
}

/// Parses a row-major matrix, requiring `rows x cols` and finite entries.
pub fn matrix_from_json(m: &JsonMatrix, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix, CliError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input(format!("{what}: expected a {rows}x{cols} matrix")));
    }
    let data: Vec<C64> = m.iter().flat_map(|r| vector_from_json(r)).collect();
    ComplexMatrix::new(rows, cols, data).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

/// A `d`-tuple of `n x n` complex matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleDocument {
    pub d: usize,
    pub n: usize,
    pub matrices: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl TupleDocument {
    pub fn from_tuple(t: &MatrixTuple, metadata: Option<Metadata>) -> Self {
        Self {
            d: t.d(),
            n: t.n(),
            matrices: t.iter().map(matrix_to_json).collect(),
            metadata,
        }
    }

    pub fn to_tuple(&self) -> Result<MatrixTuple, CliError> {
        if self.d == 0 || self.n == 0 {
            return Err(CliError::Input("d and n must be positive".into()));
        }
        if self.matrices.len() != self.d {
            return Err(CliError::Input(format!(
                "expected d = {} matrices, found {}",
                self.d,
                self.matrices.len()
            )));
        }
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(k, m)| matrix_from_json(m, self.n, self.n, &format!("matrix {}", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        MatrixTuple::new(mats).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid tuple document: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDocument {
    pub lambda: JsonComplex,
    pub weight: JsonMatrix,
}

/// Atoms `(λ_j, Q_j)` with `T_k = Σ λ_j^k Q_j` for `k = 1..=d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionDocument {
    pub d: usize,
    pub n: usize,
    pub atoms: Vec<AtomDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl DecompositionDocument {
    pub fn from_decomposition(dec: &AtomicDecomposition, metadata: Option<Metadata>) -> Self {
        Self {
            d: dec.d,
            n: dec.n,
            atoms: dec
                .atoms
                .iter()
                .map(|a| AtomDocument {
                    lambda: complex_to_json(a.lambda),
                    weight: matrix_to_json(&a.weight),
                })
                .collect(),
            metadata,
        }
    }

    pub fn to_decomposition(&self, tol: &Tolerances) -> Result<AtomicDecomposition, CliError> {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(j, a)| {
                Ok(Atom {
                    lambda: complex_from_json(a.lambda),
                    weight: matrix_from_json(&a.weight, self.n, self.n, &format!("atom {} weight", j + 1))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(AtomicDecomposition::from_atoms(self.d, atoms, tol)?)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("invalid decomposition document: {e}")))
    }
}

fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).expect("fixture rows are rectangular")
}

fn sigma() -> ComplexMatrix {
    real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

/// Names accepted by [`fixture`].
pub const FIXTURE_NAMES: &[&str] = &[
    "sigma_pair",
    "neg_sigma_pair",
    "projection_pair",
    "nilpotent",
    "planted_sigma",
    "planted_quadrature",
];

/// Built-in example tuples: `(σ, I)`, `(-σ, -I)`, `(diag(1,0), diag(0,1))`, the 2x2
/// nilpotent with entry 2, and tuples assembled from planted atoms.
pub fn fixture(name: &str) -> Result<(MatrixTuple, Option<AtomicDecomposition>), CliError> {
    let tol = Tolerances::default();
    let t = |m: Vec<ComplexMatrix>| MatrixTuple::new(m).map_err(CliError::from);
    match name {
        "sigma_pair" => Ok((t(vec![sigma(), ComplexMatrix::identity(2)])?, None)),
        "neg_sigma_pair" => Ok((t(vec![sigma().scale_real(-1.0), ComplexMatrix::identity(2).scale_real(-1.0)])?, None)),
        "projection_pair" => Ok((
            t(vec![real(&[&[1.0, 0.0], &[0.0, 0.0]]), real(&[&[0.0, 0.0], &[0.0, 1.0]])])?,
            None,
        )),
        "nilpotent" => Ok((t(vec![real(&[&[0.0, 2.0], &[0.0, 0.0]])])?, None)),
        "planted_sigma" => {
            let half = |s: f64| (&ComplexMatrix::identity(2) + &sigma().scale_real(s)).scale_real(0.5);
            let dec = AtomicDecomposition::from_atoms(
                2,
                vec![
                    Atom { lambda: C64::new(1.0, 0.0), weight: half(1.0) },
                    Atom { lambda: C64::new(-1.0, 0.0), weight: half(-1.0) },
                ],
                &tol,
            )?;
            Ok((dec.moments()?, Some(dec)))
        }
        "planted_quadrature" => {
            let atoms = [(0.0, 0.5), (core::f64::consts::FRAC_PI_2, 0.25), (-2.0, 0.25)]
                .iter()
                .map(|&(theta, w)| Atom {
                    lambda: C64::from_polar(1.0, theta),
                    weight: ComplexMatrix::identity(1).scale_real(w),
                })
                .collect();
            let dec = AtomicDecomposition::from_atoms(3, atoms, &tol)?;
            Ok((dec.moments()?, Some(dec)))
        }
        other => Err(CliError::Input(format!(
            "unknown fixture {other:?}; known: {}",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}
