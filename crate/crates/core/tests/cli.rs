use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_special-cube"));
    c.env_remove("SPECIAL_CUBE_SIZE_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn build_writes_complex_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    let out = run(&[
        "build",
        "--m",
        "4",
        "--k",
        "2",
        "--hmin",
        "-2",
        "--hmax",
        "2",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "64 vertices, 256 edges, 192 squares\n"
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 64);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 256);
    assert_eq!(doc["squares"].as_array().unwrap().len(), 192);
}

#[test]
fn build_exit_codes() {
    assert_eq!(
        run(&["build", "--m", "4", "--k", "2", "--hmin", "0", "--hmax", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["build", "--m", "10", "--k", "5", "--hmin", "0", "--hmax", "2"])
            .status
            .code(),
        Some(3)
    );
    let out = bin()
        .env("SPECIAL_CUBE_SIZE_CAP", "4")
        .args([
            "build", "--m", "4", "--k", "2", "--hmin", "0", "--hmax", "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "--size-cap",
        "10",
        "build",
        "--m",
        "3",
        "--k",
        "2",
        "--hmin",
        "0",
        "--hmax",
        "2",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn check_built_core_is_clean_and_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.json");
    let dot = dir.path().join("x.dot");
    let report = dir.path().join("r.json");
    let x_s = x.to_str().unwrap();
    assert!(
        run(&["build", "--m", "4", "--k", "2", "--hmin", "-6", "--hmax", "6", "-o", x_s])
            .status
            .success()
    );
    let out = run(&[
        "check",
        x_s,
        "--margin",
        "2",
        "--dot",
        dot.to_str().unwrap(),
        "-o",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot)
        .unwrap()
        .starts_with("graph hyperplanes {"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["core"]["lo"], -4);
    assert_eq!(doc["npc"]["pass"], true);
    // The raw truncation has boundary artefacts.
    assert_eq!(run(&["check", x_s]).status.code(), Some(1));
}

#[test]
fn check_klein_bottle_reports_one_sided() {
    let out = run(&["--json", "check", fixture("klein_bottle").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["violations"]["one_sided"].as_array().unwrap().len(), 1);
}

#[test]
fn check_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"vertices": [{"id": "v"}], "edges": [{"id": "a", "tail": "v", "head": "w"}], "squares": []}"#).unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&bad, r#"{"vertices": 3, "edges": [], "squares": []}"#).unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vertices"));
    assert_eq!(
        run(&["check", "/nonexistent/file.json"]).status.code(),
        Some(2)
    );
    // Margins need heights.
    assert_eq!(
        run(&["check", fixture("torus").to_str().unwrap(), "--margin", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_exit_codes_and_warning() {
    let out = run(&["verify", "--m", "4", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("D(1)"));
    assert!(out.stderr.is_empty());
    let out = run(&["verify", "--m", "3", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(
        run(&["verify", "--m", "2", "--k", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_json_is_certificate_array() {
    let v = json(&run(&["--json", "verify", "--m", "4", "--k", "2"]));
    let certs = v.as_array().unwrap();
    assert_eq!(certs.len(), 2 + 4 * 4 + 4 * 4);
    assert!(certs.iter().all(|c| c["empty"] == true));
}

#[test]
fn verify_cross_validation() {
    let out = run(&[
        "--json",
        "verify",
        "--m",
        "4",
        "--k",
        "3",
        "--cross-validate",
        "--hmin",
        "-5",
        "--hmax",
        "5",
        "--margin",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["cross_validation"]["agreement"], true);
    assert_eq!(v["cross_validation"]["core"], serde_json::json!([-2, 2]));
}

#[test]
fn algebra_subcommands() {
    let out = run(&["abelianize", "--m", "4", "--k", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "C2 x Z^3\n");
    let v = json(&run(&[
        "--json", "growth", "--m", "4", "--k", "2", "--radius", "5",
    ]));
    assert_eq!(v["count"], 11);
    assert_eq!(v["interpretation"], "lower bound on orbit count");
    assert_eq!(
        run(&["growth", "--m", "3", "--k", "2", "--radius", "5"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, "[[2,2,2,2]]").unwrap();
    let v = json(&run(&["--json", "snf", "--matrix", m.to_str().unwrap()]));
    assert_eq!(v["invariant_factors"], serde_json::json!([2]));
    assert_eq!(v["d"], serde_json::json!([[2, 0, 0, 0]]));
    std::fs::write(&m, "1 2\n3 x\n").unwrap();
    assert_eq!(
        run(&["snf", "--matrix", m.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let v = json(&run(&["--json", "torsion-probe", "--m", "5", "--k", "3"]));
    assert_eq!(v["period"], 3);
    assert_eq!(v["trivial_exactly_at_multiples_of_k"], true);
}

#[test]
fn outputs_are_deterministic_unless_stamped() {
    let wedge = fixture("osculating_wedge");
    let args = ["--json", "check", wedge.to_str().unwrap()];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["--json", "verify", "--m", "5", "--k", "2"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let v = json(&run(&[
        "--json",
        "--stamp",
        "abelianize",
        "--m",
        "4",
        "--k",
        "2",
    ]));
    assert_eq!(v["meta"]["tool"], "special-cube");
    assert_eq!(v["group"], "C2 x Z^3");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["build", "--m", "4"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "--m", "four", "--k", "2"]).status.code(),
        Some(2)
    );
}
