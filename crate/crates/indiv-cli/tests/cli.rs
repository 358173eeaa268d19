//! End-to-end runs of the binary: scenario execution, CSV determinism,
//! certificate round trips, corruption detection, and config validation.

use std::path::Path;
use std::process::{Command, Output};

fn indiv_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_indiv"))
}

fn run_ok(out: &Output) -> bool {
    out.status.code() == Some(0)
}

#[test]
fn demo_e1_succeeds_and_writes_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = indiv_bin()
        .args(["demo", "E1", "--out-dir"])
        .arg(dir.path().join("certs"))
        .arg("--csv")
        .arg(dir.path().join("e1.csv"))
        .output()
        .unwrap();
    assert!(run_ok(&out), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 mismatches"));
    let csv = std::fs::read_to_string(dir.path().join("e1.csv")).unwrap();
    assert!(csv.starts_with("# indiv-csv-v1 experiment=E1"));
    // at least one certificate landed on disk and verifies
    let cert = std::fs::read_dir(dir.path().join("certs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".leftinv.json"))
        .expect("a left-inverse certificate");
    let out = indiv_bin().arg("verify").arg(&cert).output().unwrap();
    assert!(run_ok(&out));
}

#[test]
fn identical_config_reproduces_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("e3.json");
    std::fs::write(
        &config,
        r#"{
  "experiment": "E3",
  "seed": 7,
  "instances": 25,
  "n_max": 2,
  "k_max": 2,
  "out_dir": "OUT",
  "csv": "CSV"
}"#
        .replace("OUT", &dir.path().join("certs").to_string_lossy())
        .replace("CSV", &dir.path().join("a.csv").to_string_lossy()),
    )
    .unwrap();
    let out = indiv_bin().arg("run").arg(&config).output().unwrap();
    assert!(run_ok(&out), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    std::fs::rename(dir.path().join("a.csv"), dir.path().join("b.csv")).unwrap();
    let out = indiv_bin().arg("run").arg(&config).output().unwrap();
    assert!(run_ok(&out));
    let second = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(first, second, "rows must be byte-identical across reruns");
}

#[test]
fn verify_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let out = indiv_bin()
        .args(["demo", "E2", "--out-dir"])
        .arg(dir.path().join("certs"))
        .output()
        .unwrap();
    assert!(run_ok(&out));
    let witness = std::fs::read_dir(dir.path().join("certs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".witness.json"))
        .expect("a split witness");
    let out = indiv_bin().arg("verify").arg(&witness).output().unwrap();
    assert!(run_ok(&out));

    // flip one coefficient: the digest catches it
    let text = std::fs::read_to_string(&witness).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let coeff = &mut value["r"]["columns"][0][0][1]["terms"][0][1];
    *coeff = serde_json::json!(coeff.as_u64().unwrap() ^ 1);
    let corrupted = dir.path().join("corrupted.json");
    std::fs::write(&corrupted, serde_json::to_string(&value).unwrap()).unwrap();
    let out = indiv_bin().arg("verify").arg(&corrupted).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED"));

    // an empty file is a hard error
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let out = indiv_bin().arg("verify").arg(&empty).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_validation_is_precise() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    // unknown field
    let p = write("unknown.json", r#"{"experiment": "E1", "bogus": 3}"#);
    let out = indiv_bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    // E3 without a seed
    let p = write("noseed.json", r#"{"experiment": "E3"}"#);
    let out = indiv_bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    // malformed JSON reports the line
    let p = write("broken.json", "{\n  \"experiment\": \"E1\",\n}");
    let out = indiv_bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    // non-prime p
    let p = write("nonprime.json", r#"{"experiment": "E1", "p_values": [4]}"#);
    let out = indiv_bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not prime"));
}

#[test]
fn explicit_spec_in_config_runs_through_e5() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("e5.json");
    // the idempotent-complement sequence over F_2 x F_2, spelled out
    std::fs::write(
        &config,
        r#"{
  "experiment": "E5",
  "p_values": [2],
  "m_max": 2,
  "spec": {
    "ring": {"kind": "product_fp", "p": 2, "m": 2},
    "entries": [
      {
        "index": {"shape": "atoms", "labels": ["s1", "s2"]},
        "psi": [
          {"repr": "basis", "terms": [[1, 1]]},
          {"repr": "basis", "terms": [[0, 1]]}
        ]
      }
    ]
  },
  "out_dir": "OUT"
}"#
        .replace("OUT", &dir.path().join("certs").to_string_lossy()),
    )
    .unwrap();
    let out = indiv_bin().arg("run").arg(&config).output().unwrap();
    assert!(run_ok(&out), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("config spec"));
    assert!(stdout.contains("0 mismatches"));
}

#[test]
fn all_demos_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for e in ["E3", "E4", "E5"] {
        let out = indiv_bin()
            .args(["demo", e, "--out-dir"])
            .arg(dir.path().join(e))
            .output()
            .unwrap();
        assert!(
            run_ok(&out),
            "{e} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert!(Path::new(&dir.path().join("E5")).exists());
}
