//! SMT-LIB rendering of linear terms and a client for external solver
//! processes.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::syntax::{CmpOp, IntExpr, LinearAtom, Name};

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("cannot run solver `{cmd}`: {source}")]
    Spawn { cmd: String, source: std::io::Error },
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver run was cancelled")]
    Cancelled,
    #[error("i/o error talking to the solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("unexpected solver answer: {0}")]
    Answer(String),
}

/// A symbol, quoted with `|...|` unless it is a plain simple symbol.
pub fn symbol(n: &Name) -> String {
    let s = n.as_str();
    let simple = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "_'.$".contains(c))
        && !matches!(s, "and" | "or" | "not" | "true" | "false" | "let" | "forall" | "exists");
    if simple && !s.contains('\'') {
        s.to_string()
    } else {
        format!("|{}|", s.replace('|', "_"))
    }
}

pub fn int_term(e: &IntExpr) -> String {
    match e {
        IntExpr::Const(k) if *k < 0 => format!("(- {})", k.unsigned_abs()),
        IntExpr::Const(k) => k.to_string(),
        IntExpr::Var(v) => symbol(v),
        IntExpr::Add(a, b) => format!("(+ {} {})", int_term(a), int_term(b)),
        IntExpr::Sub(a, b) => format!("(- {} {})", int_term(a), int_term(b)),
        IntExpr::Neg(a) => format!("(- {})", int_term(a)),
    }
}

pub fn atom_term(a: &LinearAtom) -> String {
    let (l, r) = (int_term(&a.lhs), int_term(&a.rhs));
    match a.op {
        CmpOp::Ne => format!("(not (= {} {}))", l, r),
        op => format!("({} {} {})", op.symbol(), l, r),
    }
}

/// Runs `template` with `{file}` replaced by a temporary file holding
/// `script` (the path is appended when the placeholder is missing) and
/// returns the solver's standard output.
pub fn run_solver(
    template: &str,
    script: &str,
    timeout: Duration,
    cancel: Option<&AtomicBool>,
) -> Result<String, SmtError> {
    let mut file = tempfile::Builder::new().prefix("hflz-").suffix(".smt2").tempfile()?;
    file.write_all(script.as_bytes())?;
    file.flush()?;
    let path = file.path().to_string_lossy().into_owned();

    let mut words: Vec<String> = template.split_whitespace().map(String::from).collect();
    if words.is_empty() {
        return Err(SmtError::EmptyCommand);
    }
    if words.iter().any(|w| w.contains("{file}")) {
        for w in words.iter_mut() {
            *w = w.replace("{file}", &path);
        }
    } else {
        words.push(path);
    }
    log::debug!("running solver: {}", words.join(" "));
    let mut child = Command::new(&words[0])
        .args(&words[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SmtError::Spawn { cmd: words[0].clone(), source })?;

    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let start = Instant::now();
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SmtError::Cancelled);
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SmtError::Timeout(timeout));
        }
        thread::sleep(Duration::from_millis(5));
    }
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if !err.trim().is_empty() {
        log::debug!("solver stderr: {}", err.trim());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(symbol(&Name::new("x")), "x");
        assert_eq!(symbol(&Name::new("x#3")), "|x#3|");
        assert_eq!(symbol(&Name::new("x'")), "|x'|");
        assert_eq!(symbol(&Name::new("and")), "|and|");
    }

    #[test]
    fn terms() {
        let e = IntExpr::sub(IntExpr::var("a"), IntExpr::Const(-2));
        assert_eq!(int_term(&e), "(- a (- 2))");
        let a = LinearAtom::new(CmpOp::Ne, IntExpr::var("a"), IntExpr::Const(0));
        assert_eq!(atom_term(&a), "(not (= a 0))");
    }

    #[test]
    fn missing_solver_is_reported() {
        let r = run_solver("/nonexistent/solver {file}", "", Duration::from_secs(1), None);
        assert!(matches!(r, Err(SmtError::Spawn { .. })));
    }

    #[test]
    fn timeout_kills_the_process() {
        let start = Instant::now();
        let r = run_solver("sh {file}", "sleep 5\n", Duration::from_millis(100), None);
        assert!(matches!(r, Err(SmtError::Timeout(_))));
        assert!(start.elapsed() < Duration::from_secs(3));
    }

    #[test]
    fn cancel_flag_stops_the_process() {
        let flag = AtomicBool::new(true);
        let r = run_solver("sh {file}", "sleep 5\n", Duration::from_secs(10), Some(&flag));
        assert!(matches!(r, Err(SmtError::Cancelled)));
    }

    #[test]
    fn output_is_captured() {
        let r = run_solver("sh {file}", "echo unsat\n", Duration::from_secs(10), None).unwrap();
        assert_eq!(r.trim(), "unsat");
    }
}
