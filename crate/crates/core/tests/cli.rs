//! The `triofm` binary end to end: outputs, files and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use triofm::io::{gen_diag, read_matrix_market};

fn triofm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triofm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const DIAG4: &str = "gen:diag=-4,-2,-1,3";

#[test]
fn solve_recovers_lowest_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("run.json");
    let o = triofm(&["solve", DIAG4, "-p", "2", "--auto", "--oracle", "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("CONVERGED"));
    assert!(text.contains("e_vec"));
    let run = read_json(&json);
    assert_eq!(run["outcome"], "CONVERGED");
    assert_eq!(run["config"]["tol"], 1e-6);
    let est: Vec<f64> = run["eigenvalue_estimates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((est[0] + 4.0).abs() <= 1e-5);
    assert!((est[1] + 2.0).abs() <= 1e-5);
}

#[test]
fn solve_exit_codes() {
    let o = triofm(&["solve", DIAG4, "-p", "2", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("MAX_ITER"));
    let o = triofm(&["solve", DIAG4, "-p", "2", "--alpha", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("DIVERGED"));
    for bad in [
        vec!["solve", DIAG4, "-p", "0"],
        vec!["solve", DIAG4, "-p", "2", "--alpha", "0.1", "--auto"],
        vec!["solve", DIAG4, "-p", "2", "--tol", "abc"],
        vec!["frobnicate"],
    ] {
        assert_eq!(triofm(&bad).status.code(), Some(64), "{bad:?}");
    }
}

#[test]
fn solve_warns_when_p_exceeds_q() {
    let o = triofm(&["solve", "gen:diag=-1,2,3", "-p", "2", "--oracle", "--max-iter", "10"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning"), "{err}");
}

#[test]
fn gen_writes_rereadable_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.mtx");
    let o = triofm(&["gen", "diag=-4,-2,-1,3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_matrix_market(&path).unwrap(), gen_diag(&[-4.0, -2.0, -1.0, 3.0]).unwrap());
    let o = triofm(&["spectrum", path.to_str().unwrap(), "--top", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("q      3"));
}

#[test]
fn spectrum_prints_ladder_and_top_pairs() {
    let o = triofm(&["spectrum", DIAG4, "-p", "2", "--top", "2"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0));
    let field = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    let rho = field("rho");
    assert!((4.0..=4.2).contains(&rho));
    assert!((field("R_1") - (3.0 * rho).sqrt()).abs() <= 1e-12);
    assert!((field("R_2") - 2.0 * (3.0 * rho).sqrt()).abs() <= 1e-12);
    assert!((field("alpha") - 1.0 / (120.0 * rho)).abs() <= 1e-15);
    let pairs: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).collect();
    assert_eq!(pairs.len(), 2);
    assert!(pairs[0].contains("-4") && pairs[1].contains("-2"));
}

#[test]
fn verify_all_suites_pass_on_small_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("verify.json");
    let o = triofm(&["verify", DIAG4, "-p", "2", "--suite", "all", "--seeds", "0,1", "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = read_json(&json);
    let suites = report["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 7);
    for s in suites {
        assert_eq!(s["status"], "PASS", "{}", s["suite"]);
    }
}

#[test]
fn verify_fixed_points_enumerates_every_spec() {
    let o = triofm(&["verify", "gen:diag=-4,-3,-2,-1,2", "-p", "2", "--suite", "fixed-points"]);
    assert_eq!(o.status.code(), Some(0));
    // 1 + 2·2·4 + 4·3·4 = 65 specs for p = 2, q = 4.
    assert!(stdout(&o).contains("65 of 65 specs"), "{}", stdout(&o));
}

#[test]
fn verify_refuses_degenerate_spectrum() {
    let o = triofm(&["verify", "gen:lap2d=2,2,5", "-p", "2", "--suite", "tangent"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("REFUSED"));
}

#[test]
fn replay_matches_live_monitors() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let json = dir.path().join("run.json");
    let o = triofm(&[
        "solve", DIAG4, "-p", "2", "--auto", "--trace", trace.to_str().unwrap(), "--trace-every", "1",
        "--monitor", "bounds", "--monitor", "tangent", "--monitor", "norm-floor", "--json", json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let live = read_json(&json);
    let vjson = dir.path().join("replay.json");
    let o = triofm(&[
        "verify", DIAG4, "-p", "2", "--replay", trace.to_str().unwrap(), "--suite", "all", "--json",
        vjson.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let replay = read_json(&vjson);
    for m in live["monitors"].as_array().unwrap() {
        let name = m["monitor"].as_str().unwrap();
        let suite = replay["suites"]
            .as_array()
            .unwrap()
            .iter()
            .find(|s| s["suite"] == name)
            .unwrap_or_else(|| panic!("no replay suite {name}"));
        assert_eq!(suite["status"], m["status"], "{name}");
    }
}

#[test]
fn saddle_escape_counts_trials() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("saddle.json");
    let o = triofm(&["saddle-escape", DIAG4, "-p", "2", "--trials", "5", "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("escaped 5/5"));
    let s = read_json(&json);
    assert_eq!(s["trials"].as_array().unwrap().len(), 5);
}
