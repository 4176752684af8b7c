//! Report documents written by every command, plus helpers to re-check recorded
//! residuals after parsing a report back.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tcd_core::dilation::AtomicDecomposition;
use tcd_core::moduli::{Diagnostics, ModulusReport, Witness};
use tcd_core::{MatrixTuple, Tolerances};

use crate::document::{
    complex_from_json, matrix_from_json, vector_to_json, AtomDocument, JsonComplex, JsonMatrix,
    TupleDocument,
};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecord {
    pub eig_tol: f64,
    pub psd_tol: f64,
    pub rank_tol: f64,
    pub residual_tol: f64,
}

impl From<&Tolerances> for ToleranceRecord {
    fn from(t: &Tolerances) -> Self {
        Self {
            eig_tol: t.eig_tol,
            psd_tol: t.psd_tol,
            rank_tol: t.rank_tol,
            residual_tol: t.residual_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    pub version: String,
    /// SHA-256 of the command name, the raw input documents and the parameters.
    pub inputs_digest: String,
    pub seed: u64,
    pub tolerances: ToleranceRecord,
    pub outputs: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl ReportDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid report: {e}")))
    }

    pub fn outputs_as<T: for<'de> Deserialize<'de>>(&self) -> Result<T, CliError> {
        serde_json::from_value(self.outputs.clone())
            .map_err(|e| CliError::Input(format!("report outputs do not match {}: {e}", self.command)))
    }
}

/// Hex SHA-256 over length-prefixed parts.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    format!("{:x}", h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessOut {
    pub kind: String,
    pub vector: Vec<JsonComplex>,
    pub achieved: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<Vec<JsonComplex>>,
}

impl From<&Witness> for WitnessOut {
    fn from(w: &Witness) -> Self {
        Self {
            kind: w.kind.name().to_string(),
            vector: vector_to_json(&w.vector),
            achieved: w.achieved,
            aux: w.aux.as_deref().map(vector_to_json),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOut {
    pub restarts: usize,
    pub iterations: usize,
    pub converged_restarts: usize,
    pub converged: bool,
    pub monotone: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_restart: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_agreement: Option<f64>,
}

impl From<&Diagnostics> for DiagnosticsOut {
    fn from(d: &Diagnostics) -> Self {
        Self {
            restarts: d.restarts,
            iterations: d.iterations,
            converged_restarts: d.converged_restarts,
            converged: d.converged,
            monotone: d.monotone,
            best_restart: d.best_restart,
            spectrum_agreement: d.spectrum_agreement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusOut {
    pub kind: String,
    pub value: f64,
    pub method: String,
    pub witness: WitnessOut,
    /// `|recomputed witness value - achieved|`.
    pub certificate_residual: f64,
    pub diagnostics: DiagnosticsOut,
}

impl ModulusOut {
    pub fn new(r: &ModulusReport, certificate_residual: f64) -> Self {
        Self {
            kind: r.kind.name().to_string(),
            value: r.value,
            method: r.method.name().to_string(),
            witness: (&r.witness).into(),
            certificate_residual,
            diagnostics: (&r.diagnostics).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassOut {
    pub commuting: bool,
    pub normal: bool,
    pub unitary: bool,
    pub power_unitary: bool,
    pub commutator_defect: f64,
    pub normality_defect: f64,
    pub unitarity_defect: f64,
    pub power_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormInequalityOut {
    pub trials: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOut {
    pub toeplitz_contractive: bool,
    pub row_contractive: bool,
    /// Smallest eigenvalue of the unit-diagonal block form.
    pub min_eigenvalue: f64,
    pub rho: f64,
    pub class: ClassOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_inequality: Option<NormInequalityOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilateOut {
    pub r: usize,
    pub u: JsonMatrix,
    pub v: JsonMatrix,
    pub residuals: Vec<f64>,
    pub unitarity_defect: f64,
    pub isometry_defect: f64,
    pub gram_defect: f64,
    pub polar_correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOut {
    pub ell: usize,
    pub atoms: Vec<AtomDocument>,
    pub identity_residual: f64,
    pub moment_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarAtomOut {
    pub lambda: JsonComplex,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberOut {
    pub point: Vec<JsonComplex>,
    pub nu: f64,
    pub inside: bool,
    pub atoms: Vec<ScalarAtomOut>,
    /// `max_k |Σ t_j λ_j^k - w_k|` of the certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricOut {
    pub forward: f64,
    pub backward: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdSearchOut {
    pub d: usize,
    pub n: usize,
    pub ratio: f64,
    pub rho_value: f64,
    pub omega_value: f64,
    pub first_pass_ratio: f64,
    pub first_pass_omega: f64,
    pub certification: String,
    pub iterations: usize,
    pub restarts: usize,
    pub accepted: usize,
    pub delta_bound: f64,
    pub delta_bound_gershgorin: f64,
    pub rho_witness: WitnessOut,
    pub omega_witness: WitnessOut,
    pub best_tuple: TupleDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateOut {
    pub tuple: TupleDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<crate::document::DecompositionDocument>,
    pub toeplitz_contractive: bool,
}

/// Recomputes the dilation residuals and defects from the matrices stored in a report,
/// returning `(recorded, recomputed)` pairs.
pub fn recheck_dilation(out: &DilateOut, t: &MatrixTuple) -> Result<Vec<(f64, f64)>, CliError> {
    let n = t.n();
    let u = matrix_from_json(&out.u, out.r, out.r, "U")?;
    let v = matrix_from_json(&out.v, out.r, n, "V")?;
    let mut pairs = Vec::new();
    let mut power = u.clone();
    for (recorded, tk) in out.residuals.iter().zip(t.iter()) {
        pairs.push((*recorded, (&power.congruence(&v) - tk).frobenius_norm()));
        power = power.matmul(&u);
    }
    pairs.push((out.unitarity_defect, u.adjoint_mul(&u).identity_defect()));
    pairs.push((out.isometry_defect, v.adjoint_mul(&v).identity_defect()));
    Ok(pairs)
}

/// Recomputes `‖Σ Q_j - I‖` and the moment residuals of a decomposition report.
pub fn recheck_decomposition(out: &DecomposeOut, t: &MatrixTuple) -> Result<Vec<(f64, f64)>, CliError> {
    let n = t.n();
    let atoms = out
        .atoms
        .iter()
        .map(|a| {
            Ok(tcd_core::dilation::Atom {
                lambda: complex_from_json(a.lambda),
                weight: matrix_from_json(&a.weight, n, n, "atom weight")?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let dec = AtomicDecomposition {
        d: t.d(),
        n,
        atoms,
        identity_residual: 0.0,
        moment_residuals: Vec::new(),
    };
    let mut sum = tcd_core::ComplexMatrix::zeros(n, n);
    for a in &dec.atoms {
        sum = &sum + &a.weight;
    }
    let mut pairs = vec![(out.identity_residual, sum.identity_defect())];
    let rebuilt = dec.moments()?;
    for ((recorded, a), b) in out.moment_residuals.iter().zip(rebuilt.iter()).zip(t.iter()) {
        pairs.push((*recorded, (a - b).frobenius_norm()));
    }
    Ok(pairs)
}

/// Top-level scalar outputs as `key,value` rows.
pub fn scalar_rows(report: &ReportDocument) -> Option<Vec<(String, String)>> {
    let obj = report.outputs.as_object()?;
    let mut rows = vec![
        ("command".to_string(), report.command.clone()),
        ("inputs_digest".to_string(), report.inputs_digest.clone()),
        ("seed".to_string(), report.seed.to_string()),
    ];
    for (k, v) in obj {
        match v {
            Value::Number(x) => rows.push((k.clone(), x.to_string())),
            Value::Bool(b) => rows.push((k.clone(), b.to_string())),
            Value::String(s) => rows.push((k.clone(), s.clone())),
            _ => {}
        }
    }
    Some(rows)
}
