//! Binary-level checks: byte-identical reruns for every subcommand, the
//! exit-code contract, and the emission format.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ufh")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary launches")
}

fn run_expect(args: &[&str], code: i32) -> Output {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "ufh {:?}: expected exit {code}, got {:?}\nstderr: {}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// All regular files in a directory (flat), name → bytes.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("output dir exists") {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            out.insert(
                entry.file_name().to_string_lossy().into_owned(),
                std::fs::read(entry.path()).unwrap(),
            );
        }
    }
    out
}

fn assert_identical_reruns(label: &str, args: &[&str]) {
    let d1 = TempDir::new().unwrap();
    let d2 = TempDir::new().unwrap();
    let mut a1: Vec<&str> = args.to_vec();
    let p1 = d1.path().to_str().unwrap().to_string();
    a1.extend(["--out", &p1]);
    run_expect(&a1, 0);
    let mut a2: Vec<&str> = args.to_vec();
    let p2 = d2.path().to_str().unwrap().to_string();
    a2.extend(["--out", &p2]);
    run_expect(&a2, 0);
    let s1 = snapshot(d1.path());
    let s2 = snapshot(d2.path());
    assert!(!s1.is_empty(), "{label}: no outputs written");
    assert_eq!(
        s1.keys().collect::<Vec<_>>(),
        s2.keys().collect::<Vec<_>>(),
        "{label}: file sets differ"
    );
    for (name, bytes) in &s1 {
        assert_eq!(bytes, &s2[name], "{label}: {name} differs between reruns");
    }
}

#[test]
fn a13_reruns_are_byte_identical() {
    // Artifacts consumed by the verify/cycle runs are built once so both
    // reruns reference the same input path.
    let shared = TempDir::new().unwrap();
    let sparse_dir = shared.path().join("sparse");
    let thick_dir = shared.path().join("thick");
    run_expect(
        &[
            "sparse-build", "--group", "Z", "--family", "supergeo", "--jmax", "2",
            "--c", "sigma_squared", "--out", sparse_dir.to_str().unwrap(),
        ],
        0,
    );
    run_expect(
        &[
            "thick-build", "--group", "Z2", "--sub", "coordinate:0", "--n", "2", "--l", "2",
            "--out", thick_dir.to_str().unwrap(),
        ],
        0,
    );
    let sparse_artifact = sparse_dir.join("sparse.json");
    let thick_artifact = thick_dir.join("thick.json");
    let sparse_in = sparse_artifact.to_str().unwrap();
    let thick_in = thick_artifact.to_str().unwrap();

    let battery: Vec<(&str, Vec<&str>)> = vec![
        ("ball", vec!["ball", "--group", "Z2", "--r", "6"]),
        ("folner", vec!["folner", "--group", "heis", "--family", "heis_boxes", "--jmax", "5"]),
        (
            "growth",
            vec!["growth", "--group", "Z2", "--family", "cubes", "--jmax", "50", "--chain", "chi_even_x"],
        ),
        ("tile", vec!["tile", "--group", "Z2", "--r", "2", "--window", "12"]),
        (
            "sparse-build",
            vec!["sparse-build", "--group", "Z", "--family", "supergeo", "--jmax", "2", "--c", "sigma_squared"],
        ),
        ("sparse-verify", vec!["sparse-verify", "--group", "Z", "--input", sparse_in]),
        (
            "thick-build",
            vec!["thick-build", "--group", "Z2", "--sub", "coordinate:0", "--n", "2", "--l", "2"],
        ),
        ("thick-verify", vec!["thick-verify", "--group", "Z2", "--input", thick_in]),
        (
            "whyte",
            vec![
                "whyte", "--group", "Z", "--family", "balls", "--function", "chi_g",
                "--level", "3", "--bound-chains", "5", "--seed", "11",
            ],
        ),
        (
            "indep",
            vec![
                "indep", "--group", "Z", "--family", "balls", "--functions",
                "powers:2,powers:1", "--jmax", "4096",
            ],
        ),
        ("cycle", vec!["cycle", "--group", "Z2", "--input", thick_in, "--k", "1", "--m", "2"]),
        (
            "coset-avg",
            vec![
                "coset-avg", "--group", "Z2", "--sub", "coordinate:0", "--function",
                "chi_even_x", "--j", "3", "--probe", "4", "--rational",
            ],
        ),
    ];
    for (label, args) in &battery {
        assert_identical_reruns(label, args);
    }
}

#[test]
fn usage_and_config_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();

    run_expect(&["ball", "--group", "Z9", "--r", "2", "--out", out], 1);
    run_expect(&["growth", "--group", "Z", "--family", "cubes", "--out", out], 1);
    run_expect(&["ball", "--group", "Z", "--r", "2", "--no-such-flag"], 1);
    run_expect(&["no-such-subcommand"], 1);

    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"group": "Z", "bogus_key": 1}"#).unwrap();
    let o = run_expect(
        &["ball", "--config", cfg.to_str().unwrap(), "--r", "2", "--out", out],
        1,
    );
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("bogus_key"), "unknown key not named: {stderr}");

    let missing = tmp.path().join("missing.json");
    run_expect(
        &["ball", "--config", missing.to_str().unwrap(), "--r", "2", "--out", out],
        1,
    );
}

#[test]
fn verification_failures_exit_2_with_witness() {
    let tmp = TempDir::new().unwrap();
    let build = tmp.path().join("build");
    run_expect(
        &[
            "thick-build", "--group", "Z2", "--sub", "coordinate:0", "--n", "2", "--l", "2",
            "--out", build.to_str().unwrap(),
        ],
        0,
    );
    // Shift one tile of family 2 onto family 1's coset footprint.
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(build.join("thick.json")).unwrap()).unwrap();
    let mut tampered = artifact.clone();
    tampered["families"][1][0]["translator"] = artifact["families"][0][0]["translator"].clone();
    let tampered_path = tmp.path().join("tampered.json");
    std::fs::write(&tampered_path, serde_json::to_string(&tampered).unwrap()).unwrap();

    let verify_dir = tmp.path().join("verify");
    run_expect(
        &[
            "thick-verify", "--group", "Z2", "--input", tampered_path.to_str().unwrap(),
            "--out", verify_dir.to_str().unwrap(),
        ],
        2,
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(verify_dir.join("thick_verify.json")).unwrap())
            .unwrap();
    let failures = report["failures"].as_array().unwrap();
    assert!(!failures.is_empty(), "report must carry the witness");
    assert!(
        failures.iter().any(|f| f.as_str().unwrap().contains("overlap in coset")),
        "overlapping coset not named: {failures:?}"
    );

    // A point mass admits no witness at any level: |Σ_S δ_e| ≤ 1 ≤ |∂S|.
    let whyte_dir = tmp.path().join("whyte");
    run_expect(
        &[
            "whyte", "--group", "Z", "--family", "balls", "--function", "delta_e",
            "--level", "1", "--budget", "5", "--out", whyte_dir.to_str().unwrap(),
        ],
        2,
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(whyte_dir.join("whyte.json")).unwrap())
            .unwrap();
    assert_eq!(report["outcome"]["found"], serde_json::json!(false));
}

#[test]
fn csv_headers_carry_tool_config_and_window() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    run_expect(
        &["growth", "--group", "Z2", "--family", "cubes", "--jmax", "50", "--chain", "chi_even_x", "--out", out],
        0,
    );
    let csv = std::fs::read_to_string(tmp.path().join("growth.csv")).unwrap();
    let mut lines = csv.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# tool=ufh/"), "bad comment line: {comment}");
    assert!(comment.contains("config="), "missing config hash: {comment}");
    assert!(comment.contains("window="), "missing window: {comment}");
    assert_eq!(lines.next().unwrap(), "j,size,boundary,sigma,chain_sum,beta,beta_over_sigma");

    // Even-first-coordinate density over the 50-cube: exactly 1/2.
    let last = csv.lines().rev().find(|l| !l.starts_with('#') && !l.is_empty()).unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[0], "50");
    let beta: f64 = fields[5].parse().unwrap();
    assert_eq!(beta, 0.5);
}
