use std::path::PathBuf;
use std::process::Command as Proc;

use mdlab::{run, CliError, Command, Format, Invocation, RunConfig};
use serde_json::Value;

const QUBIT: &str = r#"
[model]
type = "blocks"
block_dims = [2]

[state]
type = "tracial"

[generators]
type = "explicit"
elements = [
  [[[0, 1], [1, 0]]],
  [[[1, 0], [0, -1]]],
]
"#;

fn invoke(command: Command, toml: &str) -> Result<String, CliError> {
    invoke_with(command, toml, None, None)
}

fn invoke_with(
    command: Command,
    toml: &str,
    betas: Option<Vec<f64>>,
    format: Option<Format>,
) -> Result<String, CliError> {
    run(Invocation {
        command,
        config: RunConfig::from_toml(toml)?,
        seed: Some(3),
        betas,
        format,
        timing: false,
    })
}

fn report(out: &str) -> Value {
    serde_json::from_str::<Value>(out).unwrap()["report"].clone()
}

fn csv_column(out: &str, col: usize) -> Vec<f64> {
    out.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn spectrum_of_tracial_qubit() {
    let out = invoke(Command::Spectrum, QUBIT).unwrap();
    assert_eq!(out.lines().next(), Some("index,eigenvalue"));
    let idx = csv_column(&out, 0);
    assert_eq!(idx, vec![0.0, 1.0, 2.0, 3.0]);
    for (got, want) in csv_column(&out, 1).iter().zip([0.0, 2.0, 2.0, 4.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn spectrum_of_empty_and_scaled_families() {
    let empty = QUBIT.replace(
        "elements = [\n  [[[0, 1], [1, 0]]],\n  [[[1, 0], [0, -1]]],\n]",
        "elements = []",
    );
    let out = invoke(Command::Spectrum, &empty).unwrap();
    assert!(csv_column(&out, 1).iter().all(|v| *v == 0.0));
    let scaled = QUBIT.replace("[0, 1], [1, 0]", "[0, 3], [3, 0]").replace("[1, 0], [0, -1]", "[3, 0], [0, -3]");
    let base = csv_column(&invoke(Command::Spectrum, QUBIT).unwrap(), 1);
    let big = csv_column(&invoke(Command::Spectrum, &scaled).unwrap(), 1);
    for (a, b) in base.iter().zip(&big) {
        assert!((9.0 * a - b).abs() < 1e-10);
    }
}

#[test]
fn csv_values_round_trip() {
    for x in [0.1, 1.0 / 3.0, 7.085284927618220, 1e-300, -2.5e17] {
        let s = mdlab::commands::csv_real(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert!(!s.contains(','));
    }
}

#[test]
fn verify_examples() {
    let factor = "[model]\ntype = \"blocks\"\nblock_dims = [2]\n[generators]\ntype = \"random_hermitian\"\ncount = 2\n";
    let r = report(&invoke(Command::Verify, factor).unwrap());
    assert_eq!(r["theorem_holds"], Value::Bool(true));
    assert_eq!(r["ergodic"], Value::Bool(true));

    let two = "[model]\ntype = \"blocks\"\nblock_dims = [2, 3]\n";
    let r = report(&invoke(Command::Verify, two).unwrap());
    assert_eq!(r["theorem_holds"], Value::Bool(true));
    assert_eq!(r["ergodic"], Value::Bool(false));
    assert_eq!(r["dim_N"], Value::from(2));

    let only_z = QUBIT.replace("  [[[0, 1], [1, 0]]],\n", "");
    let r = report(&invoke(Command::Verify, &only_z).unwrap());
    assert_eq!(r["generates_M"], Value::Bool(false));
    assert_eq!(r["theorem_holds"], Value::Null);
    assert_eq!(r["containment_holds"], Value::Bool(true));
}

#[test]
fn verify_echoes_resolved_config_and_seeds() {
    let out = invoke(Command::Verify, "[model]\ntype = \"blocks\"\nblock_dims = [2]\n").unwrap();
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["seeds"]["root"], Value::from(3));
    assert_eq!(doc["config"]["state"]["seed"], Value::from(3));
    assert_eq!(doc["config"]["generators"]["seed"], Value::from(4));
    assert_eq!(doc["config"]["tolerances"]["kernel"], Value::from(1e-9));
    assert!(doc.get("timing_seconds").is_none());
    // the echoed config reproduces the run
    let echoed: RunConfig = serde_json::from_value(doc["config"].clone()).unwrap();
    let again = run(Invocation {
        command: Command::Verify,
        config: echoed,
        seed: None,
        betas: None,
        format: None,
        timing: false,
    })
    .unwrap();
    let a: Value = serde_json::from_str(&again).unwrap();
    assert_eq!(a["report"], doc["report"]);
}

#[test]
fn gap_sweep_examples() {
    let chain = "[model]\ntype = \"spin_chain\"\nlength = 3\n";
    let out = invoke_with(Command::GapSweep, chain, Some(vec![0.0, 0.1, 0.2]), None).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("beta,phi_norm_lambda,lambda,condition_ok,gap,dim_N,ergodic"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with(",1,true")));

    let empty = invoke_with(Command::GapSweep, chain, Some(vec![]), None).unwrap();
    assert_eq!(empty, "beta,phi_norm_lambda,lambda,condition_ok,gap,dim_N,ergodic\n");

    let big = "[model]\ntype = \"spin_chain\"\nlength = 12\n";
    let err = invoke_with(Command::GapSweep, big, Some(vec![0.0]), None).unwrap_err();
    assert_eq!(err.exit_code(), 3);

    let blocks = "[model]\ntype = \"blocks\"\nblock_dims = [2]\n";
    assert_eq!(invoke(Command::GapSweep, blocks).unwrap_err().exit_code(), 1);
}

#[test]
fn markov_check_examples() {
    let out = invoke(Command::MarkovCheck, QUBIT).unwrap();
    let m = &serde_json::from_str::<Value>(&out).unwrap()["markov"];
    assert_eq!(m["submarkov_failures"], Value::from(0));
    assert_eq!(m["pair_samples"], Value::from(1000));
    assert_eq!(m["unital"], Value::Bool(true));

    let zero = format!("{QUBIT}\n[markov]\nt_grid = [0.0]\n");
    let out = invoke(Command::MarkovCheck, &zero).unwrap();
    let m = &serde_json::from_str::<Value>(&out).unwrap()["markov"];
    assert_eq!(m["submarkov_failures"], Value::from(0));
    assert_eq!(m["unital_residual"], Value::from(0.0));
    assert_eq!(out, invoke(Command::MarkovCheck, &zero).unwrap());
}

#[test]
fn config_errors() {
    let unknown = format!("{QUBIT}\ncolour = 1\n");
    assert!(matches!(RunConfig::from_toml(&unknown), Err(CliError::Config(_))));
    let typo = QUBIT.replace("type = \"tracial\"", "type = \"tracial\"\nbetta = 1.0");
    assert!(RunConfig::from_toml(&typo).is_err());
    let model_typo = QUBIT.replace("block_dims", "block_dim");
    assert!(RunConfig::from_toml(&model_typo).is_err());
    let gen_typo = "[model]\ntype = \"spin_chain\"\nlength = 3\n[generators]\ntype = \"pauli_all_sites\"\ncount = 2\n";
    assert!(RunConfig::from_toml(gen_typo).is_err());
    let bad_tol = format!("{QUBIT}\n[tolerances]\nkernel = -1.0\n");
    assert_eq!(invoke(Command::Verify, &bad_tol).unwrap_err().exit_code(), 1);
    let bad_nodes = format!("assembly = \"quadrature\"\n{QUBIT}\n[quadrature]\nnodes = 100\n");
    assert_eq!(invoke(Command::Spectrum, &bad_nodes).unwrap_err().exit_code(), 1);
    let csv_verify = invoke_with(Command::Verify, QUBIT, None, Some(Format::Csv));
    assert!(matches!(csv_verify, Err(CliError::Usage(_))));
    let not_sa = QUBIT.replace("[0, 1], [1, 0]", "[0, 1], [0, 0]");
    assert_eq!(invoke(Command::Verify, &not_sa).unwrap_err().exit_code(), 1);
}

#[test]
fn quadrature_route_matches_spectral() {
    let spectral = csv_column(&invoke(Command::Spectrum, QUBIT).unwrap(), 1);
    let quad = format!("assembly = \"quadrature\"\n{QUBIT}");
    let q = csv_column(&invoke(Command::Spectrum, &quad).unwrap(), 1);
    for (a, b) in spectral.iter().zip(&q) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn sampled_weight_without_strip_data_is_reported_undecided() {
    let data: Vec<String> = (-400..=400)
        .map(|i| {
            let t = i as f64 * 0.025;
            format!("[{t}, {}]", 1.0 / (2.0 * std::f64::consts::PI * t).cosh())
        })
        .collect();
    let cfg = format!("{QUBIT}\n[function]\ntype = \"sampled\"\ndata = [{}]\n", data.join(", "));
    let doc: Value = serde_json::from_str(&invoke(Command::Verify, &cfg).unwrap()).unwrap();
    assert!(doc["admissibility"]["undecided"].is_string());
    assert_eq!(doc["report"]["theorem_holds"], Value::Bool(true));
}

fn binary(args: &[&str], config: &str, name: &str) -> std::process::Output {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-commands");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, config).unwrap();
    Proc::new(env!("CARGO_BIN_EXE_mdlab"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes_and_error_json() {
    let ok = binary(&["spectrum"], QUBIT, "ok.toml");
    assert!(ok.status.success());

    let cap = binary(&["gap-sweep", "--betas", "0"], "[model]\ntype = \"spin_chain\"\nlength = 12\n", "cap.toml");
    assert_eq!(cap.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&cap.stderr).unwrap();
    assert_eq!(err["error"]["kind"], Value::from("capacity"));
    assert!(err["error"]["message"].as_str().unwrap().contains("cap is 6"));

    let bad = binary(&["verify"], "[model]\ntype = \"blocks\"\nblock_dims = []\n", "bad.toml");
    assert_eq!(bad.status.code(), Some(1));

    let gibbs = "[model]\ntype = \"spin_chain\"\nlength = 3\n[state]\ntype = \"gibbs\"\nbeta = 60.0\n";
    let numeric = binary(&["spectrum"], gibbs, "numeric.toml");
    assert_eq!(numeric.status.code(), Some(2));

    let out_path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-commands/spectrum.csv");
    let written = binary(&["spectrum", "--out", out_path.to_str().unwrap()], QUBIT, "out.toml");
    assert!(written.status.success() && written.stdout.is_empty());
    assert!(std::fs::read_to_string(&out_path).unwrap().starts_with("index,eigenvalue\n"));
}
