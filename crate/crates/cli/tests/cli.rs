use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn hflmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hflmc")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = hflmc(&all);
    let v: Value = serde_json::from_slice(&out.stdout).expect("json report");
    (out.status.code().unwrap(), v)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn report_keys_are_stable() {
    let (code, v) = json(&["--no-race", "validity", &corpus("countdown.hfl")]);
    assert_eq!(code, 0);
    for k in ["command", "verdict", "stage", "pipeline", "bound", "solver", "output", "reason", "timings", "error"] {
        assert!(v.get(k).is_some(), "missing key {}", k);
    }
    assert_eq!(v["verdict"], "valid");
    assert_eq!(v["stage"], "chc");
    assert_eq!(v["solver"], "sat");
    assert_eq!(v["bound"], "scaled 1");
}

#[test]
fn false_is_invalid() {
    let (code, v) = json(&["validity", &corpus("false.hfl")]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "invalid");
}

#[test]
fn file_protocol() {
    let m = corpus("m_file.lts");
    assert_eq!(hflmc(&["check", &m, &corpus("file_ok.hfl")]).status.code(), Some(0));
    assert_eq!(hflmc(&["check", &m, &corpus("file_bad.hfl")]).status.code(), Some(1));
    assert_eq!(hflmc(&["check", &m, &corpus("file.prog")]).status.code(), Some(0));
    assert_eq!(hflmc(&["check", &m, &corpus("file_bad.prog")]).status.code(), Some(1));
    let o = hflmc(&["--lts", &m, "--window", "16", "eval", &corpus("file_rec.prog")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn horn_inputs() {
    for (f, code) in [("mult.smt2", 0), ("mult_neg.smt2", 1), ("counter.smt2", 1), ("even_odd.smt2", 0)] {
        let (c, v) = json(&["--no-race", "validity", &corpus(f)]);
        assert_eq!(c, code, "{}: {}", f, v);
    }
}

#[test]
fn racing_agrees_with_sequential() {
    for f in ["countdown.hfl", "false.hfl", "mult.smt2", "mult_neg.smt2", "worked.hfl"] {
        let a = hflmc(&["--no-race", "validity", &corpus(f)]).status.code();
        let b = hflmc(&["validity", &corpus(f)]).status.code();
        assert_eq!(a, b, "{}", f);
    }
}

#[test]
fn sequential_runs_are_deterministic() {
    let strip = |mut v: Value| {
        for t in v["timings"].as_array_mut().unwrap() {
            t["ms"] = Value::Null;
        }
        v
    };
    let a = strip(json(&["--no-race", "validity", &corpus("mult.smt2")]).1);
    let b = strip(json(&["--no-race", "validity", &corpus("mult.smt2")]).1);
    assert_eq!(a, b);
}

#[test]
fn transforms_print_formulas() {
    let o = hflmc(&["translate", &corpus("file.prog")]);
    assert_eq!(stdout(&o), "<read><read><close><end>true");
    let o = hflmc(&["dualize", &corpus("file_ok.hfl")]);
    assert_eq!(stdout(&o), "[read][read][close][end]false");
    let o = hflmc(&["--bound", "max(i + 1, 1)", "elim-mu", &corpus("countdown.hfl")]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("mu "), "{}", stdout(&o));
    let o = hflmc(&["typecheck", &corpus("worked.hfl")]);
    assert_eq!(stdout(&o), "prop (fixpoint order 1)");
}

#[test]
fn chc_round_trip_through_the_cli() {
    let o = hflmc(&["--bound", "3", "to-chc", &corpus("countdown.hfl")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("(set-logic HORN)"));
    assert_eq!(text.matches("(assert").count(), 3);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.smt2");
    std::fs::write(&p, &text).unwrap();
    let o = hflmc(&["from-chc", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("forall"));
    // without a bound the least fixpoint cannot be encoded
    assert_eq!(hflmc(&["to-chc", &corpus("countdown.hfl")]).status.code(), Some(3));
}

#[test]
fn abstraction_path() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("a.hfl");
    std::fs::write(&f, "<a>(nu x: int -> prop. \\y: int. y > 0 \\/ <b>(x (y + 1))) 1").unwrap();
    let m = dir.path().join("m.lts");
    std::fs::write(&m, "states: s t\ninitial: s\ntrans:\n  s a t\n").unwrap();
    let p = dir.path().join("p.preds");
    std::fs::write(&p, "y: y > 0\n").unwrap();
    let args = ["--no-race", "--lts", m.to_str().unwrap(), "--preds", p.to_str().unwrap(), "--format", "json"];
    let mut v = args.to_vec();
    v.extend(["validity", f.to_str().unwrap()]);
    let out = hflmc(&v);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdict"], "valid", "{}", r);
    assert_eq!(r["stage"], "abstraction");
}

#[test]
fn errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.hfl");
    std::fs::write(&f, "true /\\ ").unwrap();
    let (code, v) = json(&["validity", f.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(v["verdict"], "error");
    assert!(v["error"].as_str().unwrap().contains("1:"));
    let (code, _) = json(&["validity", "/nonexistent.hfl"]);
    assert_eq!(code, 3);
    let (code, _) = json(&["--bounds", "0", "validity", &corpus("false.hfl")]);
    assert_eq!(code, 3);
}

#[test]
fn solver_failure_is_unknown_not_wrong() {
    let (code, v) = json(&["--no-race", "--solver", "false {file}", "validity", &corpus("countdown.hfl")]);
    assert_eq!(code, 2, "{}", v);
    assert_eq!(v["verdict"], "unknown");
    assert!(v["reason"].as_str().unwrap().contains("chc"));
}
