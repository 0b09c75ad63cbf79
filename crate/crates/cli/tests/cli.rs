use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn flabby(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flabby")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = flabby(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn constant_z_on_the_pseudocircle_is_not_flabby() {
    let (code, v) = json(&["check", "--corpus", "pseudocircle", "--sheaf", "const-Z", "--mode", "traditional"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["verdict"], false);
    assert_eq!(v["result"]["counterexample"]["open"], serde_json::json!(["a", "b"]));
    assert_eq!(v["command"], "check");
    assert_eq!(v["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn cohomology_of_the_pseudocircle() {
    let (code, v) = json(&["cohomology", "--corpus", "pseudocircle", "--sheaf", "const-Z", "--nmax", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"], serde_json::json!({"H0": "Z", "H1": "Z", "H2": "0", "H3": "0"}));
}

#[test]
fn sheaf_files_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let fork = r#"{"format": 1,
      "site": {"points": ["r", "a", "b"], "le": [["r", "a"], ["r", "b"]]},
      "flavor": "set",
      "stalks": {"r": ["0", "1"], "a": ["0", "1"], "b": ["0", "1"]},
      "maps": {"r<=a": ["0", "1"], "r<=b": ["0", "1"]}}"#;
    let f = write(dir.path(), "fork.json", fork);
    for mode in ["traditional", "local", "strong", "internal"] {
        let (code, v) = json(&["check", "--sheaf", &f, "--mode", mode]);
        assert_eq!(code, 1, "{mode}");
        assert_eq!(v["result"]["verdict"], false);
    }
    let phi = write(
        dir.path(),
        "flabby.sexp",
        "; X is a flabby set\n(format 1 (forall (K (P1 X)) (exists (x X) (forall (y X) (imp (in y K) (eq y x))))))\n",
    );
    let (code, v) = json(&["internal", "eval", "--sheaf", &f, "--formula", &phi]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["stages"]["a"], true);
    assert_eq!(v["result"]["stages"]["r"], false);
    let out = flabby(&["internal", "eval", "--corpus", "sierpinski", "--sheaf", "terminal", "--formula", &phi]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\n  \"format\": 1,,\n}");
    let out = flabby(&["check", "--sheaf", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = flabby(&["check", "--corpus", "pseudocircle", "--sheaf", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let out = flabby(&["injective", "--corpus", "pseudocircle", "--sheaf", "const-Z"]);
    assert_eq!(out.status.code(), Some(2));
    let out = flabby(&["corpus", "list", "--points", "6"]);
    assert_eq!(out.status.code(), Some(2));
    let phi = write(dir.path(), "f.sexp", "(forall (x X)\n  (eq x x)");
    let out = flabby(&["internal", "eval", "--corpus", "point", "--sheaf", "terminal", "--formula", &phi]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn derived_images_and_stalks() {
    let (code, v) = json(&["rderived", "--map", "pseudocircle->point", "--sheaf", "const-Z", "--check-stalks"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["direct_images"]["R1"]["*"], "Z");
    assert_eq!(v["result"]["mismatches"], serde_json::json!([]));
}

#[test]
fn bg_presheaves() {
    let (code, _) = json(&["check", "--corpus", "BG-Z2", "--sheaf", "regular", "--mode", "strong"]);
    assert_eq!(code, 1);
    let (code, _) = json(&["check", "--corpus", "BG-Z2", "--sheaf", "regular", "--mode", "internal"]);
    assert_eq!(code, 0);
    let (code, _) = json(&["check", "--corpus", "BG-Z2", "--sheaf", "terminal", "--mode", "strong"]);
    assert_eq!(code, 0);
}

#[test]
fn injectivity_over_a_field() {
    let (code, v) = json(&["injective", "--corpus", "sierpinski", "--sheaf", "const-Z2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["internal_family"]["passed"], true);
    let (code, v) = json(&["injective", "--corpus", "pseudocircle", "--sheaf", "const-Z2"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["internal_family"]["passed"], false);
}

#[test]
fn small_suite_and_corpus() {
    let (code, v) = json(&["suite", "--max-points", "2", "--max-stalk", "2", "--max-dim", "1", "--vect-points", "2"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["passed"], true);
    let (code, v) = json(&["corpus", "list"]);
    assert_eq!(code, 0);
    assert!(v["result"]["sites"].as_array().unwrap().iter().any(|s| s == "sphere2"));
    let (_, v) = json(&["corpus", "list", "--points", "1", "--stalk", "1"]);
    assert_eq!(v["result"]["sheaves"].as_array().unwrap().len(), 2);
}
