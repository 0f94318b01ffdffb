//! Evaluators for HFL(Z).
//!
//! Both entry points share one environment-based evaluator. Predicate values
//! are state sets (bitsets over at most 64 states); function values are
//! either closures or total tables over a finite argument domain, and
//! fixpoints are computed by Kleene iteration on tables: `mu` from bottom,
//! `nu` from top.
//!
//! [`check_pure`] is exact for formulas without integers. [`eval_bounded`]
//! restricts the integer part of every fixpoint table to the window
//! `[-B, B]`; quantifiers range over the window as well.

mod eval;

use std::fmt;

use thiserror::Error;

use crate::lts::{trivial_model, Lts};
use crate::syntax::{typecheck_closed, Formula, Type, TypeError};

pub use eval::{FunTable, SemValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
    Unknown(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Invalid => f.write_str("invalid"),
            Verdict::Unknown(r) => write!(f, "unknown ({})", r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("formula is not pure (it mentions integers)")]
    Impure,
    #[error("formula has type {0}, expected prop")]
    NotProp(Type),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("model has {0} states; at most 64 are supported")]
    TooManyStates(usize),
    #[error("function table for type {ty} needs {size} entries, cap is {cap}")]
    TableCap { ty: Type, size: u128, cap: usize },
    #[error("integer overflow while evaluating `{0}`")]
    Overflow(String),
    #[error("fixpoint iteration at type {ty} took {iterations} rounds, lattice height is {height}")]
    HeightExceeded { ty: Type, iterations: u64, height: u128 },
    #[error("internal evaluator error: {0}")]
    Internal(String),
}

/// Value taken by a fixpoint table applied outside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Always the bottom element (`false` at type prop).
    #[default]
    Bottom,
    /// Bottom for `mu` tables, top for `nu` tables.
    Polarity,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub window: i64,
    pub boundary: Boundary,
    /// Maximum number of leaf entries in any function table or domain.
    pub table_cap: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { window: 8, boundary: Boundary::Bottom, table_cap: 1 << 20 }
    }
}

impl EvalConfig {
    pub fn with_window(window: i64) -> Self {
        EvalConfig { window, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Number of fixpoint computations performed.
    pub fixpoints: u64,
    /// Total Kleene rounds over all fixpoint computations.
    pub rounds: u64,
    /// Largest `rounds / (height + 1)` ratio seen, in percent.
    pub worst_height_ratio_pct: u64,
}

fn check_prop(f: &Formula) -> Result<(), SemError> {
    match typecheck_closed(f)? {
        Type::Prop => Ok(()),
        t => Err(SemError::NotProp(t)),
    }
}

/// Exact model checking `M ⊨ φ` for closed pure formulas of type prop.
pub fn check_pure(m: &Lts, f: &Formula) -> Result<bool, SemError> {
    check_pure_with_stats(m, f, EvalConfig::default().table_cap).map(|r| r.0)
}

pub fn check_pure_with_stats(
    m: &Lts,
    f: &Formula,
    table_cap: usize,
) -> Result<(bool, EvalStats), SemError> {
    if !f.is_pure() {
        return Err(SemError::Impure);
    }
    check_prop(f)?;
    let cfg = EvalConfig { window: 0, boundary: Boundary::Bottom, table_cap };
    let (set, stats) = eval::denote(f, m, &cfg)?;
    Ok((set & (1 << m.initial) != 0, stats))
}

/// Bounded evaluation on `m` (default: the trivial model) with the
/// `Bottom` boundary policy.
pub fn eval_bounded(f: &Formula, window: i64, m: Option<&Lts>) -> Result<bool, SemError> {
    let trivial = trivial_model();
    eval_bounded_with(f, m.unwrap_or(&trivial), &EvalConfig::with_window(window)).map(|r| r.0)
}

pub fn eval_bounded_with(
    f: &Formula,
    m: &Lts,
    cfg: &EvalConfig,
) -> Result<(bool, EvalStats), SemError> {
    check_prop(f)?;
    let (set, stats) = eval::denote(f, m, cfg)?;
    Ok((set & (1 << m.initial) != 0, stats))
}

/// The set of states satisfying a closed prop formula, as a bitset.
pub fn satisfying_states(f: &Formula, m: &Lts, cfg: &EvalConfig) -> Result<u64, SemError> {
    check_prop(f)?;
    eval::denote(f, m, cfg).map(|r| r.0)
}

/// Tabulated denotation of a closed formula of any type.
pub fn denotation(f: &Formula, m: &Lts, cfg: &EvalConfig) -> Result<SemValue, SemError> {
    let t = typecheck_closed(f)?;
    eval::denote_value(f, &t, m, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::parse_lts;
    use crate::syntax::parse_formula;

    fn file_lts() -> Lts {
        parse_lts("states: q0 q1 q2\ninitial: q0\ntrans:\nq0 read q0\nq0 close q1\nq1 end q2\n").unwrap()
    }

    #[test]
    fn file_protocol_judgment() {
        let f = parse_formula("<read><read><close><end>true").unwrap();
        assert!(check_pure(&file_lts(), &f).unwrap());
        let g = parse_formula("<read><close><read><end>true").unwrap();
        assert!(!check_pure(&file_lts(), &g).unwrap());
    }

    #[test]
    fn trivial_fixpoints() {
        let m = trivial_model();
        assert!(check_pure(&m, &parse_formula("nu x: prop. x").unwrap()).unwrap());
        assert!(!check_pure(&m, &parse_formula("mu x: prop. x").unwrap()).unwrap());
        assert!(check_pure(&m, &Formula::True).unwrap());
        assert!(!check_pure(&m, &parse_formula("<a>true").unwrap()).unwrap());
        assert!(check_pure(&m, &parse_formula("[a]false").unwrap()).unwrap());
    }

    #[test]
    fn impure_and_ill_typed_inputs() {
        let m = trivial_model();
        assert_eq!(check_pure(&m, &parse_formula("0 <= 1").unwrap()), Err(SemError::Impure));
        let f = parse_formula("\\x: prop. x").unwrap();
        assert!(matches!(check_pure(&m, &f), Err(SemError::NotProp(_))));
    }

    #[test]
    fn bounded_arithmetic() {
        let even = "(mu e: int -> prop. \\y: int. y = 0 \\/ e (y - 2))";
        let f = parse_formula(&format!("{} 4", even)).unwrap();
        assert!(eval_bounded(&f, 8, None).unwrap());
        let g = parse_formula(&format!("{} 3", even)).unwrap();
        assert!(!eval_bounded(&g, 8, None).unwrap());
    }

    #[test]
    fn out_of_window_is_false() {
        let f = parse_formula("(nu x: int -> prop. \\n: int. n <= 3 /\\ x (n + 1)) 0").unwrap();
        assert!(!eval_bounded(&f, 5, None).unwrap());
    }

    #[test]
    fn polarity_boundary_uses_top_for_nu() {
        let f = parse_formula("(nu x: int -> prop. \\n: int. n >= 0 /\\ x (n + 1)) 0").unwrap();
        let cfg = EvalConfig { window: 4, boundary: Boundary::Polarity, ..EvalConfig::default() };
        assert!(eval_bounded_with(&f, &trivial_model(), &cfg).unwrap().0);
        assert!(!eval_bounded(&f, 4, None).unwrap());
    }

    #[test]
    fn table_cap_is_reported() {
        let f = parse_formula("(mu x: int -> prop. \\n: int. n = 0 \\/ x (n - 1)) 3").unwrap();
        let cfg = EvalConfig { window: 100, table_cap: 50, ..EvalConfig::default() };
        assert!(matches!(
            eval_bounded_with(&f, &trivial_model(), &cfg),
            Err(SemError::TableCap { .. })
        ));
    }
}
