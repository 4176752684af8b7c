//! Argument parsing and the command implementations. Every command produces a
//! [`ReportDocument`]; rendering and exit codes are handled by the binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use tcd_core::dilation::{decompose, dilate, random_contractive_tuple, tuple_from_decomposition};
use tcd_core::geometry::{cd_search, membership, CdSearchOptions};
use tcd_core::moduli::{
    check_norm_inequality, contractivity_margin, gelfand_spectral_radius, is_row_contractive,
    is_toeplitz_contractive, metric_drho, omega, omega_objective, rho, spectral_radius,
    ModulusReport, OmegaOptions, WitnessKind,
};
use tcd_core::random::{normal_tuple, random_contraction, rng_for};
use tcd_core::spectra::classify;
use tcd_core::toeplitz::{assemble_block, nu};
use tcd_core::{MatrixTuple, Tolerances, C64};

use crate::document::{
    complex_to_json, fixture, vector_to_json, DecompositionDocument, Metadata, TupleDocument,
};
use crate::error::CliError;
use crate::report::{
    digest, scalar_rows, CdSearchOut, CheckOut, ClassOut, DecomposeOut, DilateOut, GenerateOut,
    MemberOut, MetricOut, ModulusOut, NormInequalityOut, ReportDocument, ScalarAtomOut,
};

#[derive(Debug, Parser)]
#[command(name = "tcd", version, about = "Toeplitz contractions: moduli, dilations and atomic decompositions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the PSD and residual tolerances together.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Random restarts for omega (default 64).
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    /// Iteration budget: ascent steps per restart for omega (default 500), total
    /// hill-climb steps for cd-search (default 1000).
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall time in the report (makes reports non-reproducible byte for byte).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Toeplitz modulus.
    Rho(InputArgs),
    /// Toeplitz numerical radius (certified lower bound).
    Omega(InputArgs),
    /// Toeplitz spectral radius of a commuting tuple.
    SpectralRadius {
        #[command(flatten)]
        input: InputArgs,
        /// Gelfand variant for commuting normal tuples.
        #[arg(long)]
        gelfand: bool,
    },
    /// Contractivity, structure and (optionally) norm-inequality trials.
    Check {
        #[command(flatten)]
        input: InputArgs,
        /// Random norm-inequality trials; requires a Toeplitz-contractive tuple.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        m_max: usize,
        #[arg(long, default_value_t = 2048)]
        grid: usize,
    },
    /// Unitary power dilation.
    Dilate(InputArgs),
    /// Atomic decomposition.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        /// Angular merge tolerance for eigenvalues of the dilation, in radians.
        #[arg(long, default_value_t = tcd_core::dilation::DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Membership of a point in the convex hull of the stretched circle.
    Member {
        #[arg(long)]
        d: usize,
        /// Coordinates as space-separated `re,im` pairs.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// The metric built from the modulus.
    Metric {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        against: String,
    },
    /// Randomized search for tuples with a large modulus to numerical radius ratio.
    CdSearch {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        proposal_scale: f64,
    },
    /// Generate a tuple document.
    Generate {
        #[arg(long, value_enum)]
        kind: GenerateKind,
        /// Fixture name for `--kind fixture`.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Ambient dimension for `random-contractive` (defaults to 2n).
        #[arg(long)]
        big_n: Option<usize>,
        /// Decomposition document for `--kind atoms`.
        #[arg(long)]
        atoms: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Tuple document path, or `fixture:NAME` for a built-in example.
    #[arg(long)]
    pub input: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Fixture,
    RandomContractive,
    /// Powers of a random contraction.
    Power,
    /// Commuting normal tuple.
    Normal,
    Atoms,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rho(_) => "rho",
            Command::Omega(_) => "omega",
            Command::SpectralRadius { .. } => "spectral-radius",
            Command::Check { .. } => "check",
            Command::Dilate(_) => "dilate",
            Command::Decompose { .. } => "decompose",
            Command::Member { .. } => "member",
            Command::Metric { .. } => "metric",
            Command::CdSearch { .. } => "cd-search",
            Command::Generate { .. } => "generate",
        }
    }

    /// Commands whose outputs fit a `key,value` table.
    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            Command::Rho(_)
                | Command::Omega(_)
                | Command::SpectralRadius { .. }
                | Command::Check { .. }
                | Command::Member { .. }
                | Command::Metric { .. }
        )
    }
}

fn read_text(path: &str) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

/// Loads a tuple from `fixture:NAME`, a tuple document, or a report carrying one
/// (`outputs.tuple` from `generate`, `outputs.best_tuple` from `cd-search`).
pub fn load_tuple(spec: &str) -> Result<(MatrixTuple, Vec<u8>), CliError> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        return Ok((fixture(name)?.0, spec.as_bytes().to_vec()));
    }
    let bytes = read_text(spec)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Input(format!("{spec}: not UTF-8")))?;
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("{spec}: invalid JSON: {e}")))?;
    let embedded = value
        .get("outputs")
        .and_then(|o| o.get("tuple").or_else(|| o.get("best_tuple")))
        .cloned();
    let doc: TupleDocument = serde_json::from_value(embedded.unwrap_or(value))
        .map_err(|e| CliError::Input(format!("{spec}: invalid tuple document: {e}")))?;
    Ok((doc.to_tuple()?, bytes))
}

/// Parses `"re,im re,im ..."`.
pub fn parse_point(text: &str) -> Result<Vec<C64>, CliError> {
    text.split_whitespace()
        .map(|pair| {
            let mut parts = pair.split(',');
            let mut next = || -> Result<f64, CliError> {
                let p = parts
                    .next()
                    .ok_or_else(|| CliError::Input(format!("coordinate {pair:?} is not re,im")))?;
                let x: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Input(format!("coordinate {pair:?} is not re,im")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(CliError::Input(format!("coordinate {pair:?} is not finite")))
                }
            };
            let z = C64::new(next()?, next()?);
            if parts.next().is_some() {
                return Err(CliError::Input(format!("coordinate {pair:?} is not re,im")));
            }
            Ok(z)
        })
        .collect()
}

fn tolerances(g: &GlobalArgs) -> Result<Tolerances, CliError> {
    let base = Tolerances::default();
    let t = match g.tol {
        Some(x) => base.with_tolerance(x),
        None => base,
    };
    Ok(t.validated()?)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report outputs serialize")
}

/// `|recomputed - achieved|` for the witness of a modulus report.
pub fn certificate_residual(t: &MatrixTuple, r: &ModulusReport) -> Result<f64, CliError> {
    let w = &r.witness;
    let recomputed = match w.kind {
        WitnessKind::BlockEigenvector => {
            let form = assemble_block(t, 0.0)?;
            (-form.matrix.quadratic_form(&w.vector).re).max(0.0)
        }
        WitnessKind::UnitVectorXi => omega_objective(t, &w.vector)?,
        WitnessKind::SpectrumPoint => {
            let point = w.aux.as_ref().ok_or_else(|| CliError::Input("spectrum witness without a point".into()))?;
            nu(point)?
        }
        WitnessKind::CoefficientC => return Err(CliError::Input("unexpected witness kind".into())),
    };
    Ok((recomputed - w.achieved).abs())
}

fn modulus_out(t: &MatrixTuple, r: &ModulusReport) -> Result<Value, CliError> {
    Ok(to_value(&ModulusOut::new(r, certificate_residual(t, r)?)))
}

struct Run {
    inputs: Vec<Vec<u8>>,
    outputs: Value,
}

fn execute(cmd: &Command, g: &GlobalArgs, tol: &Tolerances) -> Result<Run, CliError> {
    let seed = g.seed;
    match cmd {
        Command::Rho(i) => {
            let (t, bytes) = load_tuple(&i.input)?;
            Ok(Run {
                outputs: modulus_out(&t, &rho(&t)?)?,
                inputs: vec![bytes],
            })
        }
        Command::Omega(i) => {
            let (t, bytes) = load_tuple(&i.input)?;
            let defaults = OmegaOptions::default();
            let opts = OmegaOptions {
                starts: g.starts.unwrap_or(defaults.starts),
                max_iters: g.iters.unwrap_or(defaults.max_iters),
                seed,
                ..defaults
            };
            Ok(Run {
                outputs: modulus_out(&t, &omega(&t, &opts)?)?,
                inputs: vec![bytes],
            })
        }
        Command::SpectralRadius { input, gelfand } => {
            let (t, bytes) = load_tuple(&input.input)?;
            let r = if *gelfand {
                gelfand_spectral_radius(&t, seed, tol)?
            } else {
                spectral_radius(&t, seed, tol)?
            };
            Ok(Run {
                outputs: modulus_out(&t, &r)?,
                inputs: vec![bytes],
            })
        }
        Command::Check {
            input,
            trials,
            m_max,
            grid,
        } => {
            let (t, bytes) = load_tuple(&input.input)?;
            let c = classify(&t, tol.residual_tol);
            let norm_inequality = if *trials > 0 {
                let rep = check_norm_inequality(&t, *trials, *m_max, *grid, seed, tol)?;
                Some(NormInequalityOut {
                    trials: rep.trials,
                    violations: rep.violations,
                    worst_slack: rep.worst_slack,
                })
            } else {
                None
            };
            let out = CheckOut {
                toeplitz_contractive: is_toeplitz_contractive(&t, tol)?,
                row_contractive: is_row_contractive(&t, tol)?,
                min_eigenvalue: contractivity_margin(&t)?,
                rho: rho(&t)?.value,
                class: ClassOut {
                    commuting: c.commuting,
                    normal: c.normal,
                    unitary: c.unitary,
                    power_unitary: c.power_unitary,
                    commutator_defect: c.commutator_defect,
                    normality_defect: c.normality_defect,
                    unitarity_defect: c.unitarity_defect,
                    power_defect: c.power_defect,
                },
                norm_inequality,
            };
            Ok(Run {
                outputs: to_value(&out),
                inputs: vec![bytes],
            })
        }
        Command::Dilate(i) => {
            let (t, bytes) = load_tuple(&i.input)?;
            let dil = dilate(&t, tol)?;
            let out = DilateOut {
                r: dil.r,
                u: crate::document::matrix_to_json(&dil.u),
                v: crate::document::matrix_to_json(&dil.v),
                residuals: dil.residuals.clone(),
                unitarity_defect: dil.unitarity_defect,
                isometry_defect: dil.isometry_defect,
                gram_defect: dil.gram_defect,
                polar_correction: dil.polar_correction,
            };
            Ok(Run {
                outputs: to_value(&out),
                inputs: vec![bytes],
            })
        }
        Command::Decompose { input, cluster_tol } => {
            let (t, bytes) = load_tuple(&input.input)?;
            let dec = decompose(&t, *cluster_tol, tol)?;
            let out = DecomposeOut {
                ell: dec.ell(),
                atoms: DecompositionDocument::from_decomposition(&dec, None).atoms,
                identity_residual: dec.identity_residual,
                moment_residuals: dec.moment_residuals.clone(),
            };
            Ok(Run {
                outputs: to_value(&out),
                inputs: vec![bytes],
            })
        }
        Command::Member { d, point } => {
            let w = parse_point(point)?;
            if w.len() != *d {
                return Err(CliError::Input(format!(
                    "point has {} coordinates, expected d = {d}",
                    w.len()
                )));
            }
            let rep = membership(&w, tol)?;
            let atoms: Vec<ScalarAtomOut> = rep
                .weights()
                .into_iter()
                .map(|(lambda, weight)| ScalarAtomOut {
                    lambda: complex_to_json(lambda),
                    weight,
                })
                .collect();
            let reconstruction_residual = rep.certificate.as_ref().map(|_| {
                (0..w.len())
                    .map(|k| {
                        let s: C64 = rep
                            .weights()
                            .iter()
                            .map(|(l, t)| l.powu(k as u32 + 1) * *t)
                            .sum();
                        (s - w[k]).norm()
                    })
                    .fold(0.0, f64::max)
            });
            let out = MemberOut {
                point: vector_to_json(&w),
                nu: rep.nu_value,
                inside: rep.inside,
                atoms,
                reconstruction_residual,
            };
            Ok(Run {
                outputs: to_value(&out),
                inputs: vec![point.as_bytes().to_vec()],
            })
        }
        Command::Metric { input, against } => {
            let (s, a) = load_tuple(&input.input)?;
            let (t, b) = load_tuple(against)?;
            let m = metric_drho(&s, &t)?;
            Ok(Run {
                outputs: to_value(&MetricOut {
                    forward: m.forward,
                    backward: m.backward,
                    value: m.value,
                }),
                inputs: vec![a, b],
            })
        }
        Command::CdSearch { d, n, proposal_scale } => {
            let mut opts = CdSearchOptions::new(*d, *n, g.iters.unwrap_or(1000), seed);
            opts.proposal_scale = *proposal_scale;
            if let Some(s) = g.starts {
                opts.omega_starts = s;
            }
            let rep = cd_search(&opts, tol)?;
            let out = CdSearchOut {
                d: rep.d,
                n: rep.n,
                ratio: rep.ratio,
                rho_value: rep.rho_value,
                omega_value: rep.omega_value,
                first_pass_ratio: rep.first_pass_ratio,
                first_pass_omega: rep.first_pass_omega,
                certification: rep.certification.name().to_string(),
                iterations: rep.iterations,
                restarts: rep.restarts,
                accepted: rep.accepted,
                delta_bound: rep.delta_bound,
                delta_bound_gershgorin: rep.delta_bound_gershgorin,
                rho_witness: (&rep.rho_witness).into(),
                omega_witness: (&rep.omega_witness).into(),
                best_tuple: TupleDocument::from_tuple(
                    &rep.best_tuple,
                    Some(Metadata {
                        name: None,
                        seed: Some(seed),
                        generator: Some("cd-search".into()),
                    }),
                ),
            };
            Ok(Run {
                outputs: to_value(&out),
                inputs: Vec::new(),
            })
        }
        Command::Generate {
            kind,
            name,
            d,
            n,
            big_n,
            atoms,
        } => generate(*kind, name.as_deref(), *d, *n, *big_n, atoms.as_deref(), seed, tol),
    }
}

#[allow(clippy::too_many_arguments)]
fn generate(
    kind: GenerateKind,
    name: Option<&str>,
    d: usize,
    n: usize,
    big_n: Option<usize>,
    atoms: Option<&str>,
    seed: u64,
    tol: &Tolerances,
) -> Result<Run, CliError> {
    let meta = |label: Option<&str>, generator: &str, seeded: bool| Metadata {
        name: label.map(str::to_string),
        seed: seeded.then_some(seed),
        generator: Some(generator.to_string()),
    };
    let mut inputs = Vec::new();
    let (t, dec, metadata) = match kind {
        GenerateKind::Fixture => {
            let name = name.ok_or_else(|| CliError::Input("--kind fixture needs --name".into()))?;
            let (t, dec) = fixture(name)?;
            (t, dec, meta(Some(name), "fixture", false))
        }
        GenerateKind::RandomContractive => {
            let t = random_contractive_tuple(d, n, big_n.unwrap_or(2 * n), seed)?;
            (t, None, meta(None, "random-contractive", true))
        }
        GenerateKind::Power => {
            if d == 0 || n == 0 {
                return Err(CliError::Input("d and n must be positive".into()));
            }
            let a = random_contraction(&mut rng_for(seed, 0), n, 1.0);
            (MatrixTuple::powers(&a, d)?, None, meta(None, "power", true))
        }
        GenerateKind::Normal => {
            if d == 0 || n == 0 {
                return Err(CliError::Input("d and n must be positive".into()));
            }
            let t = normal_tuple(&mut rng_for(seed, 0), d, n);
            (t, None, meta(None, "normal", true))
        }
        GenerateKind::Atoms => {
            let path = atoms.ok_or_else(|| CliError::Input("--kind atoms needs --atoms".into()))?;
            let bytes = read_text(path)?;
            let text =
                std::str::from_utf8(&bytes).map_err(|_| CliError::Input(format!("{path}: not UTF-8")))?;
            let dec = DecompositionDocument::parse(text)?.to_decomposition(tol)?;
            inputs.push(bytes);
            let t = tuple_from_decomposition(&dec, tol)?;
            (t, Some(dec), meta(None, "atoms", false))
        }
    };
    let out = GenerateOut {
        toeplitz_contractive: is_toeplitz_contractive(&t, tol)?,
        decomposition: dec.as_ref().map(|x| DecompositionDocument::from_decomposition(x, None)),
        tuple: TupleDocument::from_tuple(&t, Some(metadata)),
    };
    Ok(Run {
        outputs: to_value(&out),
        inputs,
    })
}

/// Runs a parsed command line and builds its report.
pub fn run(cli: &Cli) -> Result<ReportDocument, CliError> {
    if cli.global.format == Format::Csv && !cli.command.is_scalar() {
        return Err(CliError::Input(format!(
            "--format csv is only available for scalar reports, not {}",
            cli.command.name()
        )));
    }
    let tol = tolerances(&cli.global)?;
    let started = std::time::Instant::now();
    let run = execute(&cli.command, &cli.global, &tol)?;
    let params = format!(
        "{:?}|seed={}|tol={:?}|starts={:?}|iters={:?}",
        cli.command, cli.global.seed, cli.global.tol, cli.global.starts, cli.global.iters
    );
    let mut parts: Vec<&[u8]> = vec![cli.command.name().as_bytes()];
    parts.extend(run.inputs.iter().map(Vec::as_slice));
    parts.push(params.as_bytes());
    Ok(ReportDocument {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs_digest: digest(&parts),
        seed: cli.global.seed,
        tolerances: (&tol).into(),
        outputs: run.outputs,
        wall_time_s: cli.global.timing.then(|| started.elapsed().as_secs_f64()),
    })
}

/// Serializes a report in the requested format. JSON output ends with a newline.
pub fn render(report: &ReportDocument, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut rows = scalar_rows(report)
                .ok_or_else(|| CliError::Input("report has no scalar outputs".into()))?;
            if let Some(w) = report.wall_time_s {
                rows.push(("wall_time_s".into(), w.to_string()));
            }
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["key", "value"]).and_then(|_| {
                rows.iter().try_for_each(|(k, v)| wtr.write_record([k, v]))
            })
            .map_err(|e| CliError::Input(format!("csv: {e}")))?;
            let bytes = wtr.into_inner().map_err(|e| CliError::Input(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("tcd").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn parses_points() {
        let p = parse_point("0,0 -1,0.5").unwrap();
        assert_eq!(p, vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.5)]);
        assert!(parse_point("1").is_err());
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("a,b").is_err());
        assert!(parse_point("nan,0").is_err());
    }

    #[test]
    fn rho_of_fixture() {
        let rep = run(&cli(&["rho", "--input", "fixture:sigma_pair"])).unwrap();
        let out: ModulusOut = rep.outputs_as().unwrap();
        assert!((out.value - 1.0).abs() < 1e-12);
        assert!(out.certificate_residual < 1e-12);
    }

    #[test]
    fn csv_only_for_scalar_commands() {
        let err = run(&cli(&["dilate", "--input", "fixture:sigma_pair", "--format", "csv"])).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_INVALID_INPUT);
        let rep = run(&cli(&["rho", "--input", "fixture:sigma_pair", "--format", "csv"])).unwrap();
        let text = render(&rep, Format::Csv).unwrap();
        assert!(text.starts_with("key,value\n"));
        assert!(text.contains("\nvalue,1"));
    }

    #[test]
    fn digest_depends_on_parameters() {
        let a = run(&cli(&["omega", "--input", "fixture:sigma_pair", "--starts", "4"])).unwrap();
        let b = run(&cli(&["omega", "--input", "fixture:sigma_pair", "--starts", "5"])).unwrap();
        let c = run(&cli(&["omega", "--input", "fixture:sigma_pair", "--starts", "4"])).unwrap();
        assert_ne!(a.inputs_digest, b.inputs_digest);
        assert_eq!(a, c);
    }

    #[test]
    fn point_length_must_match_d() {
        let err = run(&cli(&["member", "--d", "3", "--point", "0,0 1,0"])).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_INVALID_INPUT);
    }
}
