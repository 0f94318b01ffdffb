use std::fmt;
use std::sync::atomic::AtomicBool;
use std::time::Duration;

use super::{emit_smtlib_horn, ChcError, ChcSystem};
use crate::smt::{run_solver, SmtError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverVerdict {
    /// Satisfiable, with whatever the solver printed after `sat`.
    Sat(Option<String>),
    Unsat,
    Unknown(String),
}

impl fmt::Display for SolverVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverVerdict::Sat(_) => write!(f, "sat"),
            SolverVerdict::Unsat => write!(f, "unsat"),
            SolverVerdict::Unknown(why) => write!(f, "unknown ({})", why),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Command template; `{file}` is replaced by the script path.
    pub command: String,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { command: default_solver_command(), timeout: Duration::from_secs(30) }
    }
}

/// `$HFLMC_SOLVER`, or `z3 {file}`.
pub fn default_solver_command() -> String {
    std::env::var("HFLMC_SOLVER")
        .ok()
        .filter(|s| !s.trim().is_empty())
        .unwrap_or_else(|| "z3 {file}".to_string())
}

/// Maps raw solver output to a verdict.
pub fn read_answer(out: &str) -> SolverVerdict {
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("sat") => {
            let rest: Vec<&str> = lines.collect();
            SolverVerdict::Sat((!rest.is_empty()).then(|| rest.join("\n")))
        }
        Some("unsat") => SolverVerdict::Unsat,
        Some("unknown") => SolverVerdict::Unknown("solver answered unknown".into()),
        Some(other) => SolverVerdict::Unknown(other.to_string()),
        None => SolverVerdict::Unknown("no output".into()),
    }
}

/// Runs an external Horn solver on the system. Timeouts and cancellation
/// give `Unknown`; failing to start the solver is an error.
pub fn solve_external(
    s: &ChcSystem,
    cfg: &SolverConfig,
    cancel: Option<&AtomicBool>,
) -> Result<SolverVerdict, ChcError> {
    s.validate()?;
    let script = emit_smtlib_horn(s);
    match run_solver(&cfg.command, &script, cfg.timeout, cancel) {
        Ok(out) => Ok(read_answer(&out)),
        Err(SmtError::Timeout(_)) => Ok(SolverVerdict::Unknown("timeout".into())),
        Err(SmtError::Cancelled) => Ok(SolverVerdict::Unknown("cancelled".into())),
        Err(e) => Err(ChcError::Solver(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::mult;
    use super::*;

    fn z3() -> bool {
        std::process::Command::new("z3").arg("-version").output().is_ok()
    }

    #[test]
    fn answers() {
        assert_eq!(read_answer("\nunsat\n"), SolverVerdict::Unsat);
        assert_eq!(read_answer("sat\n(model)\n"), SolverVerdict::Sat(Some("(model)".into())));
        assert_eq!(read_answer("sat"), SolverVerdict::Sat(None));
        assert!(matches!(read_answer("(error \"x\")"), SolverVerdict::Unknown(_)));
        assert!(matches!(read_answer(""), SolverVerdict::Unknown(_)));
    }

    #[test]
    fn scripted_solver_and_timeout() {
        let s = mult();
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("solver.sh");
        std::fs::write(&script, "#!/bin/sh\nsleep 5\n").unwrap();
        let cfg = SolverConfig {
            command: format!("sh {}", script.display()),
            timeout: Duration::from_millis(100),
        };
        assert_eq!(solve_external(&s, &cfg, None).unwrap(), SolverVerdict::Unknown("timeout".into()));
        let bad = SolverConfig { command: "/nonexistent/solver".into(), timeout: Duration::from_secs(1) };
        assert!(solve_external(&s, &bad, None).is_err());
    }

    #[test]
    fn z3_on_mult() {
        if !z3() {
            return;
        }
        let cfg = SolverConfig { command: "z3 {file}".into(), timeout: Duration::from_secs(20) };
        assert!(matches!(solve_external(&mult(), &cfg, None).unwrap(), SolverVerdict::Sat(_)));
        let mut broken = mult();
        broken.goals[0].body.pop();
        assert_eq!(solve_external(&broken, &cfg, None).unwrap(), SolverVerdict::Unsat);
    }
}
