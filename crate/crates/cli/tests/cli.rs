use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locc-bounds"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const PHI_PLUS: &str = r#"{
  "schemaVersion": 1,
  "dims": [2, 2],
  "states": [
    {"name": "phi+", "vector": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]},
    {"name": "psi-", "vector": [[0, 0], [0.7071067811865476, 0], [-0.7071067811865476, 0], [0, 0]]}
  ]
}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn bell_basis_is_ruled_out() {
    let o = run(&["analyze", "--catalog", "bell4"]);
    assert_eq!(code(&o), 1);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("RULED OUT"));
    assert!(text.contains("D/avg(1+R) = 4/2.000000000 = 2.000000000 [VIOLATED]"), "{text}");

    let o = run(&["analyze", "--catalog", "bell4", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["status"], "RULED OUT");
    let pure = &v["result"]["bounds"][0];
    assert_eq!(pure["inequality"], "pure-chain");
    for link in pure["links"].as_array().unwrap() {
        assert_eq!(link["bound"].as_f64().unwrap(), 2.0);
    }
}

#[test]
fn two_orthogonal_states_pass() {
    let o = run(&["analyze", "--catalog", "two-random-orthogonal", "--param", "seed=7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn measures_of_a_maximally_entangled_vector() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.json", PHI_PLUS);
    let o = run(&["measures", "--file", &path, "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let pure = &v["result"][0]["pure"];
    for key in ["robustness", "relEntropy", "geometric"] {
        assert!((pure[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key}: {pure}");
    }
    assert_eq!(v["input"]["source"], "file");
}

#[test]
fn schmidt_reports_coefficients_and_rejects_mixed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.json", PHI_PLUS);
    let v = json(&run(&["schmidt", "--file", &path, "--format", "json"]));
    let c = v["result"][0]["coefficients"].as_array().unwrap();
    assert_eq!(c.len(), 2);
    assert!((c[0].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let o = run(&["schmidt", "--catalog", "bell-mixture-pair"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank 2"));
}

#[test]
fn bound_exit_codes_follow_the_verdict() {
    let o = run(&["bound", "--catalog", "bell-mixture-pair", "--inequality", "support-maximum"]);
    assert_eq!(code(&o), 0);
    let o = run(&["bound", "--catalog", "bell4", "--inequality", "pure-chain"]);
    assert_eq!(code(&o), 1);
    let o = run(&["bound", "--catalog", "bell-mixture-pair", "--inequality", "pure-chain"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn candidate_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let ensemble = write(dir.path(), "bell.json", PHI_PLUS);
    let o = run(&[
        "bound", "--file", &ensemble, "--inequality", "candidate-chain", "--candidates", &ensemble, "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["inequality"], "candidate-chain");

    let product = write(
        dir.path(),
        "product.json",
        r#"{"schemaVersion": 1, "dims": [2, 2], "states": [
            {"name": "a", "vector": [[1, 0], [0, 0], [0, 0], [0, 0]]},
            {"name": "b", "vector": [[0, 0], [1, 0], [0, 0], [0, 0]]}]}"#,
    );
    let o = run(&["bound", "--file", &ensemble, "--inequality", "candidate-chain", "--candidates", &product]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn feasibility_exit_codes() {
    assert_eq!(code(&run(&["feasibility", "--catalog", "product-basis"])), 0);
    assert_eq!(code(&run(&["feasibility", "--catalog", "bell4"])), 1);

    let o = run(&["feasibility", "--catalog", "two-random-orthogonal", "--param", "seed=26", "--max-sweeps", "10"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep limit"));
    let o = run(&["analyze", "--catalog", "two-random-orthogonal", "--param", "seed=26", "--max-sweeps", "10"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("NOT RULED OUT"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{\n  \"schemaVersion\": 1,\n  \"dims\": [2, 2],\n  \"states\": [\n");
    let o = run(&["analyze", "--file", &broken]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line "));

    let overlap = write(
        dir.path(),
        "overlap.json",
        r#"{"schemaVersion": 1, "dims": [2, 2], "states": [
            {"name": "a", "vector": [[1, 0], [0, 0], [0, 0], [0, 0]]},
            {"name": "b", "vector": [[0.6, 0], [0.8, 0], [0, 0], [0, 0]]}]}"#,
    );
    assert_eq!(code(&run(&["analyze", "--file", &overlap])), 2);

    let unnormalized = write(
        dir.path(),
        "norm.json",
        r#"{"schemaVersion": 1, "dims": [2, 2], "states": [
            {"name": "a", "vector": [[2, 0], [0, 0], [0, 0], [0, 0]]}]}"#,
    );
    let o = run(&["measures", "--file", &unnormalized]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tol_norm"), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(code(&run(&["analyze", "--file", "/nonexistent/ensemble.json"])), 2);
    assert_eq!(code(&run(&["analyze", "--catalog", "bell4", "--param", "alpha=0.5"])), 2);
    assert_eq!(code(&run(&["analyze", "--catalog", "bell-mixture-pair", "--alpha", "1.5"])), 2);
    assert_eq!(code(&run(&["analyze"])), 2);
    assert_eq!(code(&run(&["analyze", "--catalog", "bell4", "--file", &broken])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["analyze", "--catalog", "bell4", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let written = std::fs::read(&out).unwrap();
    let direct = run(&["analyze", "--catalog", "bell4", "--format", "json"]).stdout;
    assert_eq!(written, direct);
}

#[test]
fn catalog_output_feeds_back_in() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["catalog", "--catalog", "bell-mixture-pair", "--alpha", "0.25"]);
    assert_eq!(code(&o), 0);
    let path = write(dir.path(), "pair.json", std::str::from_utf8(&o.stdout).unwrap());
    let from_file = json(&run(&["bound", "--file", &path, "--inequality", "projector-chain", "--format", "json"]));
    let from_catalog = json(&run(&[
        "bound", "--catalog", "bell-mixture-pair", "--alpha", "0.25", "--inequality", "projector-chain", "--format", "json",
    ]));
    assert_eq!(from_file["result"], from_catalog["result"]);

    let listing = json(&run(&["catalog", "--format", "json"]));
    let names: Vec<&str> = listing.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"bell4") && names.contains(&"tiles"));
}

#[test]
fn tolerances_are_echoed() {
    let v = json(&run(&["measures", "--catalog", "bell4", "--format", "json", "--bisect-tol", "1e-4", "--seed", "9"]));
    assert_eq!(v["tolerances"]["config"]["bisection"]["bisectTol"].as_f64(), Some(1e-4));
    assert_eq!(v["tolerances"]["config"]["ascent"]["seed"].as_u64(), Some(9));
    assert_eq!(v["tolerances"]["tolTrace"].as_f64(), Some(1e-9));
    let text = String::from_utf8(run(&["measures", "--catalog", "bell4"]).stdout).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("# tolerances: rank_tol=1e-9"));
}
