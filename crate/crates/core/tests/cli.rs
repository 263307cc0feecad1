use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vertexlab"))
}

fn lattice(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn a1(dir: &Path) -> PathBuf {
    lattice(dir, "a1.json", r#"{"rank": 1, "gram": [[2]]}"#)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn json_out(cmd: &mut Command) -> (i32, Value) {
    let (code, out, err) = run(cmd);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}")))
}

// coefficients of Σ q^{m²} · Π(1 - q^n)^{-1}
fn theta_over_eta(n: usize) -> Vec<u64> {
    let mut p = vec![0u64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    let mut out = vec![0u64; n + 1];
    for m in -4i64..=4 {
        let s = (m * m) as usize;
        for k in s..=n {
            out[k] += p[k - s];
        }
    }
    out
}

#[test]
fn build_writes_dims_and_is_idempotent() {
    let d = TempDir::new().unwrap();
    let l = a1(d.path());
    let (a, b) = (d.path().join("a.json"), d.path().join("b.json"));
    let (code, out, _) = run(bin().args(["build", "--max-weight", "8", "--out"]).arg(&a).arg("--lattice").arg(&l));
    assert_eq!(code, 0);
    let expected: Vec<String> = theta_over_eta(8).iter().map(|x| x.to_string()).collect();
    assert_eq!(out.trim(), format!("dims {}", expected.join(" ")));
    assert!(out.starts_with("dims 1 3 4 7 13 19 29"));
    run(bin().args(["build", "--max-weight", "8", "--out"]).arg(&b).arg("--lattice").arg(&l));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let art: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(art["central_charge"], "1");
    assert_eq!(art["dims"][8], 62);

    let l2 = lattice(d.path(), "d24.json", r#"{"rank": 2, "gram": [[2, 0], [0, 4]]}"#);
    let (code, out, _) = run(bin().args(["build", "--max-weight", "3", "--out"]).arg(d.path().join("c.json")).arg("--lattice").arg(&l2));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "dims 1 4 11 28");
}

#[test]
fn usage_and_io_errors_exit_2() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(bin().args(["build", "--lattice"]).arg(d.path().join("missing.json"))).0, 2);
    let odd = lattice(d.path(), "odd.json", r#"{"rank": 1, "gram": [[3]]}"#);
    assert_eq!(run(bin().args(["build", "--lattice"]).arg(&odd)).0, 2);
    assert_eq!(run(bin().args(["verify", "nonsense"])).0, 2);
    assert_eq!(run(bin().args(["verify", "forms"])).0, 2);
    let l = a1(d.path());
    assert_eq!(run(bin().args(["verify", "forms", "--max-weight", "1", "--lattice"]).arg(&l)).0, 2);
    assert_eq!(run(bin().args(["verify", "all", "--lattice"]).arg(&l)).0, 2);
}

#[test]
fn derivations_and_forms_reports() {
    let d = TempDir::new().unwrap();
    let l = a1(d.path());
    let (code, v) = json_out(bin().args(["verify", "derivations", "--max-weight", "8", "--canonical", "--lattice"]).arg(&l));
    assert_eq!(code, 0);
    assert_eq!((v["dim"].as_u64(), v["inner_dim"].as_u64(), v["perp_dim"].as_u64()), (Some(3), Some(3), Some(0)));
    assert_eq!(v["passed"], true);

    let (code, v) = json_out(bin().args(["verify", "--suite", "forms", "--canonical", "--lattice"]).arg(&l));
    assert_eq!(code, 0);
    assert_eq!(v["witness_n"], 1);
    assert_eq!(v["det"], "-128");
    assert!(v.get("elapsed_ms").is_none());
}

#[test]
fn ideals_table() {
    let d = TempDir::new().unwrap();
    let l = a1(d.path());
    let (code, v) = json_out(bin().args(["verify", "ideals", "--n", "2", "--max-weight", "9", "--canonical", "--lattice"]).arg(&l));
    assert_eq!(code, 0);
    let dims: Vec<u64> = v["ideals"][0]["dims"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(dims, vec![0, 0, 0, 0, 1, 1, 2, 3, 5, 7]);
    assert_eq!(v["ideals"][0]["climbing_coefficient"], "1");
}

#[test]
fn canonical_output_is_byte_identical() {
    let d = TempDir::new().unwrap();
    let l = a1(d.path());
    let go = || run(bin().args(["verify", "fixedpoint", "--max-weight", "6", "--canonical", "--lattice"]).arg(&l)).1;
    let a = go();
    assert_eq!(a, go());
    assert!(!a.contains("elapsed_ms"));
}

#[test]
fn report_on_empty_and_full_runs() {
    let d = TempDir::new().unwrap();
    let empty = d.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let (code, out, _) = run(bin().arg("report").arg(&empty));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "nothing to report");

    let l = a1(d.path());
    let runs = d.path().join("run");
    let (code, _, err) = run(bin().args(["verify", "all", "--max-weight", "6", "--canonical", "--out"]).arg(&runs).arg("--lattice").arg(&l));
    assert_eq!(code, 0, "{err}");
    let summary = d.path().join("summary.json");
    let (code, out, _) = run(bin().arg("report").arg(&runs).arg("--out").arg(&summary));
    assert_eq!(code, 0);
    assert!(out.ends_with("all 8 suites passed\n"), "{out}");
    let s: Value = serde_json::from_slice(&std::fs::read(summary).unwrap()).unwrap();
    assert_eq!(s["passed"], true);
    assert_eq!(s["suites"].as_array().unwrap().len(), 8);
}

#[test]
fn flipped_cocycle_is_flagged() {
    let d = TempDir::new().unwrap();
    let bad = lattice(d.path(), "bad.json", r#"{"rank": 1, "gram": [[2]], "cocycle": {"table": [[-1]]}}"#);
    let runs = d.path().join("run");
    let out = runs.join("automorphisms.json");
    let (code, _, err) = run(bin().args(["verify", "automorphisms", "--max-weight", "6", "--canonical", "--out"]).arg(&out).arg("--lattice").arg(&bad));
    assert_eq!(code, 1);
    assert!(err.contains("residuals_match_default_cocycle"));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
    // θ itself stays an automorphism; its sign conventions show up in the
    // residuals of the scaled-e control
    let theta = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "theta_accepted").unwrap();
    assert_eq!(theta["passed"], true);
    let flags = v["flags"].as_array().unwrap();
    assert_eq!(flags[0]["candidate"], "scaled_e");
    let (code, text, _) = run(bin().arg("report").arg(&runs));
    assert_eq!(code, 1);
    assert!(text.contains("flagged: scaled_e"));
}

#[test]
fn dsum_from_spec_file() {
    let d = TempDir::new().unwrap();
    let spec = lattice(d.path(), "dsum.json", r#"{"hw_weights": [0, 1, 4], "cutoff": 6}"#);
    let (code, v) = json_out(bin().args(["verify", "dsum", "--canonical", "--summands"]).arg(&spec));
    assert_eq!(code, 0);
    assert_eq!(v["derivation_dim"], 2);
    let bad = lattice(d.path(), "bad.json", r#"{"hw_weights": [0, 4, 1], "cutoff": 6}"#);
    assert_eq!(run(bin().args(["verify", "dsum", "--summands"]).arg(&bad)).0, 2);
}
