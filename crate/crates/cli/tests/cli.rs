use std::path::Path;
use std::process::{Command, Output};

fn bienayme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bienayme"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn inspect_reports_constants() {
    let out = bienayme(&["inspect", "--family", "preset:monotype_binary", "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["classification"], "critical");
    assert!((v["c_scal"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["feasible_period"], 2);

    let out = bienayme(&["inspect", "--family", "preset:poisson_reducible", "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["c_scal"].as_f64().unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-9);
    assert!((v["c1"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn inspect_rejects_supercritical_family() {
    let out = bienayme(&["inspect", "--family", "preset:poisson2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_family_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"K": 1, "Kprime": 0, "lambda": [1], "types": [{"kind": "explicit"}]}"#,
    )
    .unwrap();
    let out = bienayme(&["inspect", "--family", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("types"));
}

#[test]
fn infeasible_size_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = bienayme(&[
        "sample",
        "--family",
        "preset:monotype_binary",
        "--n",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn sampled_batches_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = bienayme(&[
            "sample",
            "--family",
            "preset:two_type",
            "--n",
            "40",
            "--replicates",
            "50",
            "--seed",
            "17",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(
        std::fs::read(a.join("trees.bin")).unwrap(),
        std::fs::read(b.join("trees.bin")).unwrap()
    );
    let manifest = json(&a.join("manifest.json"));
    assert_eq!(manifest["trees_written"], 50);
    assert_eq!(manifest["request"]["seed"], 17);

    let out = bienayme(&["replay", "--batch", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("matches"));
}

#[test]
fn rejection_cherries() {
    let dir = tempfile::tempdir().unwrap();
    let out = bienayme(&[
        "sample",
        "--family",
        "preset:monotype_binary",
        "--n",
        "3",
        "--method",
        "rejection",
        "--replicates",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let trees = bienayme::sampler::read_batch_trees(dir.path()).unwrap();
    assert_eq!(trees.len(), 20);
    assert!(trees
        .iter()
        .all(|t| t.shape().outdegrees() == vec![2, 0, 0]));
}

#[test]
fn verify_concentration_passes_on_binary_trees() {
    let dir = tempfile::tempdir().unwrap();
    let out = bienayme(&[
        "verify",
        "--family",
        "preset:monotype_binary",
        "--n",
        "2001",
        "--replicates",
        "200",
        "--suite",
        "concentration",
        "--blob-sims",
        "100000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "{}{}",
        stdout(&out),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("concentration.csv").exists());
    let summary = json(&dir.path().join("summary.json"));
    assert!(summary.to_string().contains("N_0/n"));
}

#[test]
fn verify_gof_needs_enough_replicates() {
    let dir = tempfile::tempdir().unwrap();
    let out = bienayme(&[
        "verify",
        "--family",
        "preset:monotype_binary",
        "--n",
        "101",
        "--replicates",
        "10",
        "--suite",
        "gof",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gof"));
}

#[test]
fn tilt_poisson_to_criticality() {
    let out = bienayme(&[
        "tilt",
        "--family",
        "preset:poisson2",
        "--direction",
        "1",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["theta"][0].as_f64().unwrap() + 2f64.ln()).abs() < 1e-6);
}

#[test]
fn tilt_of_localized_family_does_not_converge() {
    let out = bienayme(&["tilt", "--family", "preset:localized", "--direction", "1,1"]);
    assert_eq!(code(&out), 5);
}
