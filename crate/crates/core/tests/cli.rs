use std::process::{Command, Output};

use serde_json::Value;

fn entcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entcomm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn number(v: &Value) -> f64 {
    match v {
        Value::String(s) => s.parse().unwrap(),
        other => other.as_f64().unwrap(),
    }
}

const CNOT: &str = r#"{"name": "CNOT"}"#;

#[test]
fn same_seed_gives_identical_bytes() {
    let args = ["entcap", "--gate", CNOT, "--restarts", "4", "--seed", "7"];
    let a = entcomm(&args);
    let b = entcomm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn file_output_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let stdout = entcomm(&["decompose", "--gate", CNOT]);
    let file = entcomm(&["decompose", "--gate", CNOT, "--json", path.to_str().unwrap()]);
    assert!(file.status.success());
    assert!(file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), stdout.stdout);
}

#[test]
fn capability_is_stable_across_seeds() {
    let e = |seed: &str| {
        let out = entcomm(&["entcap", "--gate", CNOT, "--restarts", "8", "--seed", seed]);
        assert!(out.status.success());
        number(&json(&out)["capability"]["e_u"])
    };
    let (a, b) = (e("1"), e("2"));
    assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    assert!((a - 1.0).abs() < 1e-3);
}

#[test]
fn bad_gate_exits_with_two() {
    for gate in [r#"{"name": "TOFFOLI"}"#, "not json", r#"{"matrix": [[1, 0], [0, 1]]}"#] {
        let out = entcomm(&["decompose", "--gate", gate]);
        assert_eq!(out.status.code(), Some(2), "{gate}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(entcomm(&["decompose"]).status.code(), Some(2));
}

#[test]
fn decompose_reports_swap_corner() {
    let out = entcomm(&["decompose", "--gate", r#"{"name": "SWAP"}"#]);
    assert!(out.status.success());
    let v = json(&out);
    for a in v["canonical"]["alphas"].as_array().unwrap() {
        assert!((number(a) - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
    }
}

#[test]
fn canonical_gate_spec_round_trips() {
    let out = entcomm(&["decompose", "--gate", r#"{"canonical": [0.3, 0.2, 0.1]}"#]);
    assert!(out.status.success());
    let alphas: Vec<f64> = json(&out)["canonical"]["alphas"]
        .as_array()
        .unwrap()
        .iter()
        .map(number)
        .collect();
    for (got, want) in alphas.iter().zip([0.3, 0.2, 0.1]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn builtin_audits_pass() {
    for name in ["one_way_cnot", "swap_superdense", "empty"] {
        let out = entcomm(&["audit", "--protocol", name, "--restarts", "4"]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["protocol"], name);
    }
}

#[test]
fn gain_writes_ensembles() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.json");
    let two = dir.path().join("two.json");
    let out = entcomm(&[
        "gain",
        "--gate",
        CNOT,
        "--restarts",
        "4",
        "--ensemble-out",
        one.to_str().unwrap(),
        "--bidirectional-out",
        two.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let e = entcomm::ensembles::Ensemble::from_json(&std::fs::read_to_string(&one).unwrap()).unwrap();
    assert_eq!(e.len(), 16);
    entcomm::ensembles::BidirectionalEnsemble::from_json(&std::fs::read_to_string(&two).unwrap()).unwrap();
}

#[test]
fn analyze_passes_on_cnot() {
    let out = entcomm(&["analyze", "--gate", CNOT, "--restarts", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert!(v.get("wall_clock_seconds").is_none());
}
