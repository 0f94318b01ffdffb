//! Constrained Horn clauses over linear integer arithmetic and their
//! correspondence with first-order fixpoint formulas.
//!
//! A system is satisfiable iff the ν-formula built by [`chc_to_hfl`] is
//! valid; [`hfl_to_chc`] goes the other way for ν-only first-order
//! formulas.

mod from_hfl;
mod horn;
mod model;
mod solve;
mod to_hfl;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::syntax::{IntExpr, LinearAtom, Name};

pub use from_hfl::hfl_to_chc;
pub use horn::{emit_smtlib_horn, parse_horn, HornError};
pub use model::{check_model, Model};
pub use solve::{default_solver_command, solve_external, SolverConfig, SolverVerdict};
pub use to_hfl::chc_to_hfl;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChcError {
    #[error("predicate `{0}` is used but not declared")]
    Undeclared(String),
    #[error("predicate `{name}` has arity {expected} but is applied to {found} arguments")]
    Arity { name: String, expected: usize, found: usize },
    #[error("formula is outside the CHC fragment: {0}")]
    Fragment(String),
    #[error("dual body needs a disjunctive head or universal quantifier: {0}")]
    NotHorn(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

/// `P(e1, ..., ek)`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredApp {
    pub pred: String,
    pub args: Vec<IntExpr>,
}

impl PredApp {
    pub fn new(pred: impl Into<String>, args: Vec<IntExpr>) -> Self {
        PredApp { pred: pred.into(), args }
    }
}

/// A body conjunct: a constraint or a predicate application.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Constraint(LinearAtom),
    Pred(PredApp),
}

/// `body ⟹ head`; `head = None` is a goal clause (`⟹ false`). Variables are
/// implicitly universally quantified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub body: Vec<Literal>,
    pub head: Option<PredApp>,
}

impl Clause {
    pub fn constraints(&self) -> impl Iterator<Item = &LinearAtom> {
        self.body.iter().filter_map(|l| match l {
            Literal::Constraint(a) => Some(a),
            _ => None,
        })
    }

    pub fn pred_apps(&self) -> impl Iterator<Item = &PredApp> {
        self.body.iter().filter_map(|l| match l {
            Literal::Pred(p) => Some(p),
            _ => None,
        })
    }

    /// Variables in order of first occurrence (head first).
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        if let Some(h) = &self.head {
            for e in &h.args {
                e.vars(&mut out);
            }
        }
        for l in &self.body {
            match l {
                Literal::Constraint(a) => {
                    a.lhs.vars(&mut out);
                    a.rhs.vars(&mut out);
                }
                Literal::Pred(p) => {
                    for e in &p.args {
                        e.vars(&mut out);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChcSystem {
    /// Predicate name to arity.
    pub predicates: BTreeMap<String, usize>,
    pub definite: Vec<Clause>,
    pub goals: Vec<Clause>,
}

impl ChcSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, arity: usize) {
        self.predicates.insert(name.into(), arity);
    }

    /// Adds a clause to the definite or goal list according to its head.
    pub fn push(&mut self, c: Clause) {
        if c.head.is_some() {
            self.definite.push(c);
        } else {
            self.goals.push(c);
        }
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.definite.iter().chain(&self.goals)
    }

    /// Checks that every predicate is declared and applied with its arity.
    pub fn validate(&self) -> Result<(), ChcError> {
        let check = |p: &PredApp| match self.predicates.get(&p.pred) {
            None => Err(ChcError::Undeclared(p.pred.clone())),
            Some(&k) if k != p.args.len() => Err(ChcError::Arity {
                name: p.pred.clone(),
                expected: k,
                found: p.args.len(),
            }),
            Some(_) => Ok(()),
        };
        for c in &self.definite {
            match &c.head {
                Some(h) => check(h)?,
                None => return Err(ChcError::Fragment("goal clause in the definite list".into())),
            }
            c.pred_apps().try_for_each(check)?;
        }
        for c in &self.goals {
            if c.head.is_some() {
                return Err(ChcError::Fragment("definite clause in the goal list".into()));
            }
            c.pred_apps().try_for_each(check)?;
        }
        Ok(())
    }
}

pub(crate) fn rename_expr(e: &IntExpr, map: &HashMap<Name, Name>) -> IntExpr {
    match e {
        IntExpr::Const(_) => e.clone(),
        IntExpr::Var(v) => IntExpr::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        IntExpr::Add(a, b) => IntExpr::add(rename_expr(a, map), rename_expr(b, map)),
        IntExpr::Sub(a, b) => IntExpr::sub(rename_expr(a, map), rename_expr(b, map)),
        IntExpr::Neg(a) => IntExpr::neg(rename_expr(a, map)),
    }
}

impl Clause {
    fn rename(&self, map: &HashMap<Name, Name>) -> Clause {
        let app = |p: &PredApp| PredApp::new(&p.pred, p.args.iter().map(|e| rename_expr(e, map)).collect());
        Clause {
            body: self
                .body
                .iter()
                .map(|l| match l {
                    Literal::Constraint(a) => {
                        Literal::Constraint(LinearAtom::new(a.op, rename_expr(&a.lhs, map), rename_expr(&a.rhs, map)))
                    }
                    Literal::Pred(p) => Literal::Pred(app(p)),
                })
                .collect(),
            head: self.head.as_ref().map(app),
        }
    }

    /// Renames variables to their base names, numbering clashes.
    pub(crate) fn tidy(&self, avoid: &BTreeMap<String, usize>) -> Clause {
        let mut used: BTreeSet<String> = BTreeSet::new();
        let mut map = HashMap::new();
        for v in self.vars() {
            let base = v.base();
            let mut cand = base.to_string();
            let mut i = 1;
            while used.contains(&cand) || avoid.contains_key(&cand) {
                cand = format!("{}{}", base, i);
                i += 1;
            }
            used.insert(cand.clone());
            map.insert(v, Name::new(&cand));
        }
        self.rename(&map)
    }
}

impl fmt::Display for PredApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|e| e.to_string()).collect();
        write!(f, "{}({})", self.pred, args.join(", "))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self
            .body
            .iter()
            .map(|l| match l {
                Literal::Constraint(a) => a.to_string(),
                Literal::Pred(p) => p.to_string(),
            })
            .collect();
        let body = if body.is_empty() { "true".to_string() } else { body.join(" /\\ ") };
        match &self.head {
            Some(h) => write!(f, "{} => {}", body, h),
            None => write!(f, "{} => false", body),
        }
    }
}

impl fmt::Display for ChcSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.clauses() {
            writeln!(f, "{}", c)?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::CmpOp;

    #[test]
    fn validation() {
        let mut s = ChcSystem::new();
        s.push(Clause { body: vec![], head: Some(PredApp::new("P", vec![IntExpr::var("x")])) });
        assert_eq!(s.validate(), Err(ChcError::Undeclared("P".into())));
        s.declare("P", 2);
        assert!(matches!(s.validate(), Err(ChcError::Arity { .. })));
        s.declare("P", 1);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn clause_display_and_vars() {
        let c = Clause {
            body: vec![
                Literal::Constraint(LinearAtom::new(CmpOp::Gt, IntExpr::var("y"), IntExpr::Const(0))),
                Literal::Pred(PredApp::new("X", vec![IntExpr::var("z"), IntExpr::var("y")])),
            ],
            head: None,
        };
        assert_eq!(c.to_string(), "y > 0 /\\ X(z, y) => false");
        assert_eq!(c.vars(), vec![Name::new("y"), Name::new("z")]);
    }
}
