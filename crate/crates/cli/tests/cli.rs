use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Value,
    stdout: Vec<u8>,
    stderr: String,
}

fn morita(dir: &Path, args: &[&str]) -> Run {
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_morita"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: status.code().expect("exit code"),
        report: serde_json::from_slice(&stdout).expect("stdout is one JSON document"),
        stdout,
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

fn put(dir: &TempDir, name: &str, v: Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

fn workdir(files: &[(&str, Value)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, v) in files {
        put(&dir, name, v.clone());
    }
    dir
}

fn sphere(period: f64) -> Value {
    json!({
        "vertices": [{"id": "A", "genus": 0}, {"id": "B", "genus": 0}],
        "edges": [{"tail": "A", "head": "B", "period": period}]
    })
}

#[test]
fn report_shape() {
    let dir = workdir(&[("z4.json", json!({"group": "Z4"}))]);
    let r = morita(dir.path(), &["orbits", "z4.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["tool"], "morita");
    assert_eq!(r.report["status"], "ok");
    assert_eq!(r.report["command"]["name"], "orbits");
    assert_eq!(r.report["inputs"][0]["path"], "z4.json");
    assert_eq!(r.report["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(r.report["version"].is_string());
    assert!(r.stderr.contains("orbits"));
}

#[test]
fn quiet_silences_stderr() {
    let dir = workdir(&[("z4.json", json!({"group": "Z4"}))]);
    let r = morita(dir.path(), &["--quiet", "orbits", "z4.json"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.is_empty());
}

#[test]
fn validate_accepts_good_groupoid() {
    let dir = workdir(&[("g.json", json!({"gauge": {"group": "S3", "base": ["a", "b"]}}))]);
    let r = morita(dir.path(), &["validate", "g.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["result"]["violations"], json!([]));
    assert_eq!(r.report["result"]["kind"], "groupoid");
}

#[test]
fn validate_rejects_broken_composition() {
    let broken = json!({
        "objects": ["o"],
        "arrows": [{"id": "e", "src": "o", "tgt": "o"}, {"id": "a", "src": "o", "tgt": "o"}],
        "comp": [["e", "e", "e"], ["e", "a", "a"], ["a", "e", "a"], ["a", "a", "a"]],
        "units": {"o": "e"},
        "inv": {"e": "e", "a": "a"}
    });
    let dir = workdir(&[("bad.json", broken)]);
    let r = morita(dir.path(), &["validate", "bad.json"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["status"], "invalid");
    let violations = r.report["result"]["violations"].as_array().unwrap();
    assert!(!violations.is_empty());
    assert!(violations.iter().all(|v| !v["witness"].as_array().unwrap().is_empty()));
}

#[test]
fn validate_rejects_non_positive_period() {
    let dir = workdir(&[("t.json", sphere(0.0))]);
    let r = morita(dir.path(), &["validate", "t.json"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.windows(19).any(|w| w == b"non-positive period"));
}

#[test]
fn validate_field_files() {
    let dir = workdir(&[(
        "pi.json",
        json!({"kind": "bivector", "grid": {"dimension": 2, "origin": [0.0, 0.0], "spacing": 0.5, "shape": [3, 3]},
               "entries": [{"i": 0, "j": 1, "constant": 1.0}]}),
    )]);
    assert_eq!(morita(dir.path(), &["validate", "pi.json"]).code, 0);
    let bad = workdir(&[(
        "pi.json",
        json!({"kind": "bivector", "grid": {"dimension": 2, "origin": [0.0, 0.0], "spacing": 0.5, "shape": [3, 3]},
               "entries": [{"i": 0, "j": 5, "constant": 1.0}]}),
    )]);
    assert_eq!(morita(bad.path(), &["validate", "pi.json"]).code, 1);
}

#[test]
fn missing_file_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let r = morita(dir.path(), &["orbits", "nope.json"]);
    assert_eq!(r.code, 2);
    assert!(r.report["error"]["message"].is_string());
}

#[test]
fn picard_of_z4_has_order_two() {
    let dir = workdir(&[("z4.json", json!({"group": "Z4"}))]);
    let r = morita(dir.path(), &["picard", "z4.json"]);
    assert_eq!(r.code, 0);
    let pic = &r.report["result"]["picard"];
    assert_eq!(pic["elements"], json!(["p0", "p1"]));
    assert_eq!(pic["table"], json!([["p0", "p1"], ["p1", "p0"]]));
    assert_eq!(r.report["result"]["crossChecked"], true);
}

#[test]
fn picard_of_pair_groupoid_is_trivial() {
    let dir = workdir(&[("p.json", json!({"pair": 3}))]);
    for method in ["auto", "enumerate", "formula"] {
        let r = morita(dir.path(), &["picard", "p.json", "--method", method]);
        assert_eq!(r.code, 0, "{method}");
        assert_eq!(r.report["result"]["order"], 1);
    }
}

#[test]
fn inapplicable_formula_exits_two() {
    let dir = workdir(&[("u.json", json!({"union": [{"group": "1"}, {"pair": 2}]}))]);
    let r = morita(dir.path(), &["picard", "u.json", "--method", "formula"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["kind"], "FormulaInapplicable");
    // enumeration still works on the same input
    assert_eq!(morita(dir.path(), &["picard", "u.json"]).report["result"]["order"], 2);
}

#[test]
fn automorphism_queries() {
    let dir = workdir(&[("v4.json", json!({"group": "V4"})), ("s3.json", json!({"group": "S3"}))]);
    assert_eq!(morita(dir.path(), &["aut", "v4.json"]).report["result"]["order"], 6);
    assert_eq!(morita(dir.path(), &["inaut", "v4.json"]).report["result"]["order"], 1);
    assert_eq!(morita(dir.path(), &["out", "v4.json"]).report["result"]["order"], 6);
    assert_eq!(morita(dir.path(), &["inaut", "s3.json"]).report["result"]["order"], 6);
    assert_eq!(morita(dir.path(), &["out", "s3.json"]).report["result"]["order"], 1);
}

#[test]
fn orbits_isotropy_and_bisections() {
    let dir = workdir(&[("g.json", json!({"gauge": {"group": "Z3", "base": ["a", "b"]}}))]);
    let r = morita(dir.path(), &["orbits", "g.json"]);
    assert_eq!(r.report["result"]["orbits"], json!([["a", "b"]]));
    assert_eq!(r.report["result"]["transitive"], true);
    let r = morita(dir.path(), &["isotropy", "g.json", "--object", "b"]);
    assert_eq!(r.report["result"]["isotropy"][0]["order"], 3);
    assert_eq!(morita(dir.path(), &["isotropy", "g.json", "--object", "zz"]).code, 2);
    let r = morita(dir.path(), &["bisections", "g.json"]);
    assert_eq!(r.report["result"]["count"], 18);
    assert_eq!(r.report["result"]["ciso"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_exact_passes() {
    let dir = workdir(&[("d4.json", json!({"group": "D4"}))]);
    let r = morita(dir.path(), &["verify-exact", "d4.json"]);
    assert_eq!(r.code, 0);
    assert!(r.report["result"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn morita_emits_witness_only_on_request() {
    let dir = workdir(&[
        ("g.json", json!({"gauge": {"group": "Z3", "base": ["a", "b"]}})),
        ("z3.json", json!({"group": "Z3"})),
    ]);
    let r = morita(dir.path(), &["morita", "g.json", "z3.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["result"]["equivalent"], true);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);

    let r = morita(dir.path(), &["morita", "g.json", "z3.json", "--emit-witness", "w.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["result"]["witnessBiprincipal"], true);
    let w = dir.path().join("w.json");
    assert!(w.exists());
    let v = morita(dir.path(), &["validate", "w.json"]);
    assert_eq!(v.code, 0);
    assert_eq!(v.report["result"]["principality"]["left_principal"], true);
    assert_eq!(v.report["result"]["principality"]["right_principal"], true);

    let r = morita(dir.path(), &["morita", "g.json", "z3.json", "--exhaustive"]);
    assert_eq!(r.code, 0);
}

#[test]
fn non_equivalent_groupoids_exit_four() {
    let dir = workdir(&[("z4.json", json!({"group": "Z4"})), ("v4.json", json!({"group": "V4"}))]);
    let r = morita(dir.path(), &["morita", "z4.json", "v4.json"]);
    assert_eq!(r.code, 4);
    assert_eq!(r.report["status"], "not-equivalent");
}

#[test]
fn compose_with_emitted_witness() {
    let dir = workdir(&[
        ("g.json", json!({"gauge": {"group": "Z2", "base": ["a", "b"]}})),
        ("z2.json", json!({"group": "Z2"})),
    ]);
    morita(dir.path(), &["morita", "g.json", "z2.json", "--emit-witness", "w.json"]);
    morita(dir.path(), &["morita", "z2.json", "g.json", "--emit-witness", "v.json"]);
    let r = morita(dir.path(), &["compose", "w.json", "v.json", "--emit-witness", "wv.json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report["result"]["principality"]["left_principal"], true);
    assert!(dir.path().join("wv.json").exists());
    // middle groupoids differ in this order
    assert_eq!(morita(dir.path(), &["compose", "w.json", "w.json"]).code, 2);
}

#[test]
fn tss_queries() {
    let dir = workdir(&[
        ("s.json", sphere(1.5)),
        ("t.json", json!({"vertices": [{"id": "A", "genus": 0}], "edges": [{"tail": "A", "head": "A", "period": 2.0}]})),
    ]);
    assert_eq!(morita(dir.path(), &["tss-genus", "s.json"]).report["result"]["genus"], 0);
    let r = morita(dir.path(), &["tss-genus", "t.json"]);
    assert_eq!(r.report["result"]["genus"], 1);
    assert_eq!(r.report["result"]["eulerCharacteristic"], 0);
    let r = morita(dir.path(), &["tss-picard-ingredients", "s.json"]);
    assert_eq!(r.code, 0);
    assert!(r.report["result"]["graphAut"].is_object());
}

#[test]
fn tss_period_mismatch_names_invariant() {
    let dir = workdir(&[("a.json", sphere(1.0)), ("b.json", sphere(1.001))]);
    let r = morita(dir.path(), &["tss-iso", "a.json", "b.json"]);
    assert_eq!(r.code, 4);
    let diffs = r.report["result"]["differences"].as_array().unwrap();
    assert_eq!(diffs.len(), 1);
    assert_eq!(diffs[0]["invariant"], "modularPeriods");
    assert!(r.stderr.contains("modularPeriods"));

    let r = morita(dir.path(), &["tss-iso", "a.json", "b.json", "--tol", "0.01"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["result"]["isomorphism"]["vertices"]["A"], "A");
}

#[test]
fn tss_volume_mode() {
    let mut a = sphere(1.0);
    a["volume"] = json!(3.0);
    let mut b = sphere(1.0);
    b["volume"] = json!(4.0);
    let dir = workdir(&[("a.json", a), ("b.json", b), ("c.json", sphere(1.0))]);
    assert_eq!(morita(dir.path(), &["tss-iso", "a.json", "b.json"]).code, 0);
    let r = morita(dir.path(), &["tss-iso", "a.json", "b.json", "--volume"]);
    assert_eq!(r.code, 4);
    assert_eq!(r.report["result"]["differences"][0]["invariant"], "volume");
    assert_eq!(morita(dir.path(), &["tss-iso", "a.json", "c.json", "--volume"]).code, 2);
}

fn grid2(n: usize) -> Value {
    json!({"dimension": 2, "origin": [0.0, 0.0], "spacing": 2.0 / (n - 1) as f64, "shape": [n, n]})
}

#[test]
fn gauge_singular_point_exits_three() {
    // π = ∂1∧∂2, B = x1 dx1∧dx2: det(I + Bπ) = (1 - x1)², zero on x1 = 1
    let dir = workdir(&[
        ("pi.json", json!({"kind": "bivector", "grid": grid2(5), "entries": [{"i": 0, "j": 1, "constant": 1.0}]})),
        ("b.json", json!({"kind": "twoform", "entries": [{"i": 0, "j": 1, "linear": [1.0, 0.0]}]})),
    ]);
    let r = morita(dir.path(), &["gauge-apply", "pi.json", "b.json"]);
    assert_eq!(r.code, 3);
    assert_eq!(r.report["status"], "singular");
    let detail = &r.report["error"]["detail"];
    assert_eq!(detail["worstCoords"][0], 1.0);
    assert_eq!(detail["minAbsDet"], 0.0);
    assert_eq!(morita(dir.path(), &["gauge-check", "pi.json", "--b", "b.json"]).code, 3);
}

#[test]
fn gauge_apply_writes_output() {
    let dir = workdir(&[
        ("pi.json", json!({"kind": "bivector", "grid": grid2(5), "entries": [{"i": 0, "j": 1, "constant": 1.0}]})),
        ("b.json", json!({"kind": "twoform", "entries": [{"i": 0, "j": 1, "constant": -1.0}]})),
    ]);
    let r = morita(dir.path(), &["gauge-apply", "pi.json", "b.json", "--out", "tau.json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(dir.path().join("tau.bin").exists());
    // I + Bπ = 2I, so τ = π / 2
    let bytes = fs::read(dir.path().join("tau.bin")).unwrap();
    assert_eq!(bytes.len(), 25 * 8);
    for c in bytes.chunks_exact(8) {
        assert_eq!(f64::from_le_bytes(c.try_into().unwrap()), 0.5);
    }
    let r = morita(dir.path(), &["gauge-check", "tau.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["result"]["ranks"], json!({"2": 25}));
}

#[test]
fn gauge_check_reports_residuals() {
    let grid = json!({"dimension": 3, "origin": [0.0, 0.0, 0.0], "spacing": 0.25, "shape": [5, 5, 5]});
    let dir = workdir(&[(
        "pi.json",
        json!({"kind": "bivector", "grid": grid, "entries": [
            {"i": 0, "j": 1, "linear": [0.0, 0.0, 1.0]},
            {"i": 1, "j": 2, "linear": [1.0, 0.0, 0.0]},
            {"i": 2, "j": 0, "linear": [0.0, 1.0, 0.0]}
        ]}),
    )]);
    let r = morita(dir.path(), &["gauge-check", "pi.json"]);
    assert_eq!(r.code, 0);
    assert!(r.report["result"]["jacobi"]["max"].as_f64().unwrap() < 1e-12);
}

#[test]
fn reports_are_byte_identical() {
    let dir = workdir(&[
        ("g.json", json!({"gauge": {"group": "S3", "base": ["a", "b"]}})),
        ("s3.json", json!({"group": "S3"})),
    ]);
    for args in [
        vec!["picard", "g.json"],
        vec!["verify-exact", "g.json"],
        vec!["morita", "g.json", "s3.json"],
        vec!["aut", "s3.json"],
    ] {
        let a = morita(dir.path(), &args);
        let b = morita(dir.path(), &args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
