use std::path::PathBuf;
use std::process::{Command, Output};

use tcd::commands::load_tuple;
use tcd::report::{recheck_decomposition, recheck_dilation, DecomposeOut, DilateOut, ModulusOut, ReportDocument};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn tcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcd"))
        .args(args)
        .env_remove("TCD_THREADS")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> ReportDocument {
    let out = tcd(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    ReportDocument::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn scratch(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("tcd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).display().to_string()
}

#[test]
fn rho_of_sigma_pair_is_one() {
    let rep = report(&["rho", "--input", &fixture("sigma_pair.json")]);
    let out: ModulusOut = rep.outputs_as().unwrap();
    assert_eq!(rep.command, "rho");
    assert!((out.value - 1.0).abs() < 1e-12);
    assert!(out.certificate_residual < 1e-12);
}

#[test]
fn nilpotent_moduli() {
    let r: ModulusOut = report(&["rho", "--input", &fixture("nilpotent.json")]).outputs_as().unwrap();
    let w: ModulusOut = report(&["omega", "--input", &fixture("nilpotent.json")]).outputs_as().unwrap();
    // ‖T‖ = 2 and the classical numerical radius of [[0, 2], [0, 0]] is 1.
    assert!((r.value - 2.0).abs() < 1e-12);
    assert!((w.value - 1.0).abs() < 1e-9);
}

#[test]
fn member_example() {
    let rep = report(&["member", "--d", "2", "--point", "0,0 -1,0"]);
    let o = &rep.outputs;
    assert_eq!(o["inside"], true);
    assert!((o["nu"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let atoms = o["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    let mut ims: Vec<f64> = atoms.iter().map(|a| a["lambda"][1].as_f64().unwrap()).collect();
    ims.sort_by(f64::total_cmp);
    assert!((ims[0] + 1.0).abs() < 1e-9 && (ims[1] - 1.0).abs() < 1e-9);
    for a in atoms {
        assert!(a["lambda"][0].as_f64().unwrap().abs() < 1e-9);
        assert!((a["weight"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    }
    assert!(o["reconstruction_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn member_outside_point() {
    let rep = report(&["member", "--d", "1", "--point", "2,0"]);
    assert_eq!(rep.outputs["inside"], false);
    assert!(rep.outputs["atoms"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(tcd(&["rho", "--input", &fixture("malformed.json")]).status.code(), Some(2));
    assert_eq!(tcd(&["rho", "--input", &fixture("missing.json")]).status.code(), Some(2));
    assert_eq!(tcd(&["rho", "--input", "fixture:nope"]).status.code(), Some(2));
    assert_eq!(tcd(&["rho"]).status.code(), Some(2));
    assert_eq!(tcd(&["member", "--d", "2", "--point", "0,0 x,1"]).status.code(), Some(2));
    assert_eq!(tcd(&["rho", "--input", &fixture("sigma_pair.json"), "--tol", "-1"]).status.code(), Some(2));
    let out = tcd(&["decompose", "--input", &fixture("sigma_pair.json"), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("csv"));
}

#[test]
fn non_contractive_dilation_exits_4() {
    for name in ["projection_pair.json", "neg_sigma_pair.json", "nilpotent.json"] {
        let out = tcd(&["dilate", "--input", &fixture(name)]);
        assert_eq!(out.status.code(), Some(4), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Toeplitz-contractive"));
    }
    assert_eq!(
        tcd(&["check", "--input", &fixture("nilpotent.json"), "--trials", "3"]).status.code(),
        Some(4)
    );
}

#[test]
fn projection_pair_is_row_but_not_toeplitz_contractive() {
    let rep = report(&["check", "--input", &fixture("projection_pair.json")]);
    assert_eq!(rep.outputs["row_contractive"], true);
    assert_eq!(rep.outputs["toeplitz_contractive"], false);
    let sigma = report(&["check", "--input", &fixture("sigma_pair.json"), "--trials", "20"]);
    assert_eq!(sigma.outputs["toeplitz_contractive"], true);
    assert_eq!(sigma.outputs["row_contractive"], false);
    assert_eq!(sigma.outputs["norm_inequality"]["violations"], 0);
}

#[test]
fn reports_are_byte_identical() {
    let gen = scratch("identical.json");
    let g = tcd(&["generate", "--kind", "random-contractive", "--d", "3", "--n", "3", "--seed", "7", "--out", &gen]);
    assert!(g.status.success());
    for args in [
        vec!["omega", "--input", gen.as_str(), "--seed", "3", "--starts", "8"],
        vec!["decompose", "--input", gen.as_str()],
        vec!["cd-search", "--d", "2", "--n", "2", "--iters", "20", "--starts", "4", "--seed", "5"],
    ] {
        let a = tcd(&args);
        let b = tcd(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_reports() {
    let args = ["omega", "--input", "fixture:sigma_pair", "--starts", "16"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_tcd"))
            .args(args)
            .env("TCD_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    let auto = run("0");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);
    assert_eq!(run("many").status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let plain = report(&["rho", "--input", "fixture:sigma_pair"]);
    assert!(plain.wall_time_s.is_none());
    let timed = report(&["rho", "--input", "fixture:sigma_pair", "--timing"]);
    assert!(timed.wall_time_s.unwrap() >= 0.0);
}

fn assert_pairs(pairs: &[(f64, f64)]) {
    assert!(!pairs.is_empty());
    for (recorded, recomputed) in pairs {
        assert!((recorded - recomputed).abs() <= 1e-12, "{recorded} vs {recomputed}");
    }
}

#[test]
fn dilation_and_decomposition_reports_round_trip() {
    let gen = scratch("round_trip.json");
    assert!(tcd(&["generate", "--kind", "random-contractive", "--d", "3", "--n", "2", "--seed", "11", "--out", &gen])
        .status
        .success());
    for input in [fixture("sigma_pair.json"), fixture("planted_quadrature.json"), gen] {
        let (t, _) = load_tuple(&input).unwrap();
        let dil: DilateOut = report(&["dilate", "--input", &input]).outputs_as().unwrap();
        assert_pairs(&recheck_dilation(&dil, &t).unwrap());
        let dec: DecomposeOut = report(&["decompose", "--input", &input]).outputs_as().unwrap();
        assert_pairs(&recheck_decomposition(&dec, &t).unwrap());
    }
}

#[test]
fn modulus_reports_round_trip() {
    let (t, _) = load_tuple(&fixture("planted_sigma.json")).unwrap();
    for cmd in ["rho", "omega", "spectral-radius"] {
        let rep = report(&[cmd, "--input", &fixture("planted_sigma.json")]);
        let out: ModulusOut = rep.outputs_as().unwrap();
        let recomputed = tcd::commands::certificate_residual(&t, &witness_report(&out)).unwrap();
        assert!((recomputed - out.certificate_residual).abs() <= 1e-12, "{cmd}");
    }
}

fn witness_report(out: &ModulusOut) -> tcd_core::moduli::ModulusReport {
    use tcd_core::moduli::{Diagnostics, Method, ModulusKind, ModulusReport, Witness, WitnessKind};
    let kind = match out.witness.kind.as_str() {
        "block-eigenvector" => WitnessKind::BlockEigenvector,
        "unit-vector-xi" => WitnessKind::UnitVectorXi,
        "spectrum-point" => WitnessKind::SpectrumPoint,
        other => panic!("unexpected witness {other}"),
    };
    ModulusReport {
        kind: ModulusKind::Rho,
        value: out.value,
        witness: Witness {
            kind,
            vector: tcd::document::vector_from_json(&out.witness.vector),
            achieved: out.witness.achieved,
            aux: out.witness.aux.as_deref().map(tcd::document::vector_from_json),
        },
        method: Method::ClosedForm,
        diagnostics: Diagnostics::default(),
    }
}

#[test]
fn planted_atoms_are_recovered() {
    let rep = report(&["decompose", "--input", &fixture("planted_quadrature.json")]);
    let out: DecomposeOut = rep.outputs_as().unwrap();
    assert_eq!(out.ell, 3);
    let mut weights: Vec<f64> = out.atoms.iter().map(|a| a.weight[0][0][0]).collect();
    weights.sort_by(f64::total_cmp);
    for (w, e) in weights.iter().zip([0.25, 0.25, 0.5]) {
        assert!((w - e).abs() < 1e-9);
    }
}

#[test]
fn generated_reports_feed_other_commands() {
    let atoms = scratch("from_atoms.json");
    assert!(tcd(&["generate", "--kind", "atoms", "--atoms", &fixture("planted_sigma.atoms.json"), "--out", &atoms])
        .status
        .success());
    let r: ModulusOut = report(&["rho", "--input", &atoms]).outputs_as().unwrap();
    assert!((r.value - 1.0).abs() < 1e-12);
    let m = report(&["metric", "--input", &atoms, "--against", &fixture("sigma_pair.json")]);
    assert!(m.outputs["value"].as_f64().unwrap() < 1e-12);
    for kind in ["power", "normal"] {
        let p = report(&["generate", "--kind", kind, "--d", "2", "--n", "3", "--seed", "4"]);
        assert_eq!(p.outputs["tuple"]["d"], 2);
    }
    let power = report(&["generate", "--kind", "power", "--d", "3", "--n", "3"]);
    assert_eq!(power.outputs["toeplitz_contractive"], true);
}

#[test]
fn csv_for_scalar_reports() {
    let out = tcd(&["metric", "--input", "fixture:sigma_pair", "--against", "fixture:neg_sigma_pair", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<(String, String)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    let value: f64 = rows.iter().find(|(k, _)| k == "value").unwrap().1.parse().unwrap();
    // D(S, -S) = (ρ(2S) + ρ(-2S)) / 2 = ρ(S) + ρ(-S).
    let r = |name: &str| -> f64 { report(&["rho", "--input", name]).outputs["value"].as_f64().unwrap() };
    let expected = r("fixture:sigma_pair") + r("fixture:neg_sigma_pair");
    assert!((value - expected).abs() < 1e-12);
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("out.json");
    let out = tcd(&["rho", "--input", "fixture:sigma_pair", "--out", &path]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rep = ReportDocument::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rep.command, "rho");
}
