use std::process::Command;

use serde_json::Value;
use virtknot::cli::{run, EXIT_CAP, EXIT_FAILURE, EXIT_PARSE};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("virtknot").chain(args.iter().copied()).collect();
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn invariant_report() {
    let (code, out, _) = call(&["invariants", "long: O1+ U2+ O3+ U1+ O2+ U3+", "closed: O1+ O2+ U1+ U2+"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0]["invariants"]["v21"], 1);
    assert_eq!(r[0]["invariants"]["v22"], 1);
    assert_eq!(r[0]["realizable"], true);
    assert_eq!(r[1]["invariants"]["v3"], 1);
    assert_eq!(r[1]["realizable"], false);
    assert_eq!(r[1]["group"]["hom_counts"]["S3"], 6);
    assert_eq!(r[0]["group"]["hom_counts"]["S3"], 12);
}

#[test]
fn exit_codes() {
    let (code, _, err) = call(&["invariants", "closed: O1+ U7+"]);
    assert_eq!(code, EXIT_PARSE);
    assert!(!err.is_empty());
    let (code, _, _) = call(&["pn", "--degree", "9"]);
    assert_eq!(code, EXIT_CAP);
    let (code, out, _) = call(&["search", "long: O1+ U2+ O3+ U1+ O2+ U3+", "long:", "--budget", "200"]);
    assert_eq!(code, EXIT_FAILURE);
    assert_eq!(json(&out)[0]["found"], false);
}

#[test]
fn forbidden_moves_unknot_the_virtual_trefoil() {
    let (code, out, _) = call(&["search", "closed: O1+ O2+ U1+ U2+", "closed:", "--forbidden"]);
    assert_eq!(code, 0);
    let r = &json(&out)[0];
    assert_eq!(r["found"], true);
    let (code, _, _) = call(&["search", "closed: O1+ O2+ U1+ U2+", "closed:", "--budget", "3000"]);
    assert_eq!(code, EXIT_FAILURE);
}

#[test]
fn verify_is_deterministic() {
    let args = ["--seed", "17", "verify", "--diagrams", "6", "--steps", "10"];
    let (c1, a, _) = call(&args);
    let (c2, b, _) = call(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let (_, c, _) = call(&["--seed", "18", "verify", "--diagrams", "6", "--steps", "10"]);
    assert_ne!(a, c);
}

#[test]
fn pairing_and_reduction() {
    let (code, out, _) = call(&["pair", "long: O1* U2* U1* O2*", "long: O1+ U2+ O3+ U1+ O2+ U3+"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)[0]["value"], 1);
    let (code, out, _) = call(&["reduce", "long: U1+ O1+", "--degree", "1"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)[0]["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn quotient_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let (code, first, _) = call(&["--cache-dir", cache, "pn", "--degree", "2", "--kind", "long"]);
    assert_eq!(code, 0);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let (_, second, _) = call(&["--cache-dir", cache, "pn", "--degree", "2", "--kind", "long"]);
    assert_eq!(first, second);
}

#[test]
fn binary_reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_virtknot"))
        .args(["--format", "text", "realizable", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"# trefoil\nclosed: O1+ U2+ O3+ U1+ O2+ U3+\n\nclosed: O1+ O2+ U1+ U2+\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("realizable: true").count(), 1);
    assert_eq!(text.matches("realizable: false").count(), 1);
}
