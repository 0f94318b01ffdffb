use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use thiserror::Error;

use crate::smt::{atom_term, run_solver, symbol, SmtError};
use crate::syntax::{CmpOp, LinearAtom, LinearForm, Name};

#[derive(Debug, Error)]
pub enum EntailError {
    #[error("too many variables for window enumeration ({0})")]
    TooLarge(usize),
    #[error("integer overflow while checking entailment")]
    Overflow,
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// Decides `∧ hyps ⊨ goal` over the integers.
pub trait Entailment: Send + Sync {
    fn entails(&self, hyps: &[LinearAtom], goal: &LinearAtom) -> Result<bool, EntailError>;

    /// Whether a positive answer is a proof.
    fn is_sound(&self) -> bool;
}

fn vars_of(hyps: &[LinearAtom], goal: &LinearAtom) -> Vec<Name> {
    let mut vs = goal.vars();
    for h in hyps {
        for v in h.vars() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
    }
    vs
}

/// Checks the entailment on every assignment in `[-window, window]`. A
/// positive answer is only evidence, not proof.
pub struct WindowEntailment {
    pub window: i64,
    warned: AtomicBool,
}

impl WindowEntailment {
    pub fn new(window: i64) -> Self {
        WindowEntailment { window, warned: AtomicBool::new(false) }
    }
}

impl Entailment for WindowEntailment {
    fn entails(&self, hyps: &[LinearAtom], goal: &LinearAtom) -> Result<bool, EntailError> {
        if !self.warned.swap(true, Ordering::Relaxed) {
            log::warn!(
                "entailment checked by enumeration over [-{0}, {0}]; abstraction results are heuristic",
                self.window
            );
        }
        let vs = vars_of(hyps, goal);
        let w = self.window.max(0);
        let width = (2 * w + 1) as u128;
        if width.checked_pow(vs.len() as u32).map_or(true, |n| n > 10_000_000) {
            return Err(EntailError::TooLarge(vs.len()));
        }
        let mut vals = vec![-w; vs.len()];
        loop {
            let look = |n: &Name| vs.iter().position(|v| v == n).map(|i| vals[i]);
            let mut all = true;
            for h in hyps {
                match h.eval(&look) {
                    Some(true) => {}
                    Some(false) => {
                        all = false;
                        break;
                    }
                    None => return Err(EntailError::Overflow),
                }
            }
            if all && !goal.eval(&look).ok_or(EntailError::Overflow)? {
                return Ok(false);
            }
            let mut i = 0;
            loop {
                if i == vals.len() {
                    return Ok(true);
                }
                if vals[i] < w {
                    vals[i] += 1;
                    break;
                }
                vals[i] = -w;
                i += 1;
            }
        }
    }

    fn is_sound(&self) -> bool {
        false
    }
}

/// Exact answer when every atom constrains at most one common variable,
/// so the models form an interval minus finitely many points.
fn one_variable(hyps: &[LinearAtom], goal: &LinearAtom) -> Option<bool> {
    let (mut lo, mut hi) = (i128::MIN, i128::MAX);
    let mut holes = Vec::new();
    let mut var: Option<Name> = None;
    let negated = goal.negate();
    for a in hyps.iter().chain(std::iter::once(&negated)) {
        // c·v + k op 0
        let lf = LinearForm::from_expr(&a.lhs).plus(&LinearForm::from_expr(&a.rhs), -1);
        let k = lf.constant;
        let (c, v) = match lf.coeffs.iter().find(|(_, &c)| c != 0) {
            None => {
                if !a.op.holds(k.signum() as i64, 0) {
                    return Some(true);
                }
                continue;
            }
            Some((v, &c)) => (c, v.clone()),
        };
        if lf.coeffs.values().filter(|&&c| c != 0).count() > 1 || var.as_ref().is_some_and(|w| *w != v) {
            return None;
        }
        var = Some(v);
        // normalize to v op' q with exact integer rounding
        let (op, c, k) = if c < 0 { (flip(a.op), -c, -k) } else { (a.op, c, k) };
        let floor = (-k).div_euclid(c);
        let ceil = floor + i128::from((-k).rem_euclid(c) != 0);
        match op {
            CmpOp::Le => hi = hi.min(floor),
            CmpOp::Lt => hi = hi.min(ceil - 1),
            CmpOp::Ge => lo = lo.max(ceil),
            CmpOp::Gt => lo = lo.max(floor + 1),
            CmpOp::Eq if floor != ceil => return Some(true),
            CmpOp::Eq => {
                lo = lo.max(floor);
                hi = hi.min(floor);
            }
            CmpOp::Ne if floor == ceil => holes.push(floor),
            CmpOp::Ne => {}
        }
    }
    if lo > hi {
        return Some(true);
    }
    holes.sort_unstable();
    holes.dedup();
    let blocked = holes.iter().filter(|&&h| lo <= h && h <= hi).count() as i128;
    let size = hi.checked_sub(lo).and_then(|d| d.checked_add(1));
    // models of hyps ∧ ¬goal exist unless the holes cover the interval
    Some(size.is_some_and(|n| n <= blocked))
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Ge => CmpOp::Le,
        CmpOp::Gt => CmpOp::Lt,
        o => o,
    }
}

/// Asks an external SMT solver whether `hyps ∧ ¬goal` is unsatisfiable.
pub struct SmtEntailment {
    pub command: String,
    pub timeout: Duration,
}

impl SmtEntailment {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Self {
        SmtEntailment { command: command.into(), timeout }
    }

    pub fn z3() -> Self {
        Self::new("z3 -smt2 {file}", Duration::from_secs(10))
    }

    pub fn script(hyps: &[LinearAtom], goal: &LinearAtom) -> String {
        let mut s = String::from("(set-logic QF_LIA)\n");
        for v in vars_of(hyps, goal) {
            s.push_str(&format!("(declare-const {} Int)\n", symbol(&v)));
        }
        for h in hyps {
            s.push_str(&format!("(assert {})\n", atom_term(h)));
        }
        s.push_str(&format!("(assert (not {}))\n(check-sat)\n", atom_term(goal)));
        s
    }
}

impl Entailment for SmtEntailment {
    fn entails(&self, hyps: &[LinearAtom], goal: &LinearAtom) -> Result<bool, EntailError> {
        if let Some(r) = one_variable(hyps, goal) {
            return Ok(r);
        }
        let out = run_solver(&self.command, &Self::script(hyps, goal), self.timeout, None)?;
        match out.lines().map(str::trim).find(|l| !l.is_empty()) {
            Some("unsat") => Ok(true),
            Some("sat") | Some("unknown") => Ok(false),
            other => Err(SmtError::Answer(other.unwrap_or("").to_string()).into()),
        }
    }

    fn is_sound(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{CmpOp, IntExpr};

    fn atom(op: CmpOp, v: &str, k: i64) -> LinearAtom {
        LinearAtom::new(op, IntExpr::var(v), IntExpr::Const(k))
    }

    #[test]
    fn window_engine() {
        let e = WindowEntailment::new(5);
        assert!(e.entails(&[atom(CmpOp::Gt, "y", 0)], &atom(CmpOp::Ge, "y", 0)).unwrap());
        assert!(!e.entails(&[], &atom(CmpOp::Ge, "y", 0)).unwrap());
        assert!(e.entails(&[], &atom(CmpOp::Ge, "y", -5)).unwrap());
        assert!(!e.is_sound());
    }

    #[test]
    fn smt_script_shape() {
        let s = SmtEntailment::script(&[atom(CmpOp::Gt, "y", 0)], &atom(CmpOp::Ne, "y", 0));
        assert!(s.contains("(declare-const y Int)"));
        assert!(s.contains("(assert (not (not (= y 0))))"));
    }

    #[test]
    fn one_variable_fragment_matches_the_window_engine() {
        let ops = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
        let w = WindowEntailment::new(12);
        let two_y = |op, k| LinearAtom::new(op, IntExpr::add(IntExpr::var("y"), IntExpr::var("y")), IntExpr::Const(k));
        for &o1 in &ops {
            for &o2 in &ops {
                for k1 in -3..=3 {
                    for k2 in -3..=3 {
                        for h in [vec![atom(o1, "y", k1)], vec![two_y(o1, k1)], vec![]] {
                            let g = atom(o2, "y", k2);
                            assert_eq!(one_variable(&h, &g), Some(w.entails(&h, &g).unwrap()), "{:?} |= {}", h, g);
                            let g = two_y(o2, k2);
                            assert_eq!(one_variable(&h, &g), Some(w.entails(&h, &g).unwrap()), "{:?} |= {}", h, g);
                        }
                    }
                }
            }
        }
        let two = [atom(CmpOp::Gt, "y", 0), atom(CmpOp::Gt, "z", 0)];
        assert_eq!(one_variable(&two, &atom(CmpOp::Gt, "y", 0)), None);
    }

    #[test]
    fn smt_engine_when_available() {
        if std::process::Command::new("z3").arg("-version").output().is_err() {
            return;
        }
        let e = SmtEntailment::z3();
        assert!(e.entails(&[atom(CmpOp::Gt, "y", 0)], &atom(CmpOp::Ge, "y", 1)).unwrap());
        assert!(!e.entails(&[atom(CmpOp::Gt, "y", 0)], &atom(CmpOp::Ge, "y", 2)).unwrap());
    }
}
