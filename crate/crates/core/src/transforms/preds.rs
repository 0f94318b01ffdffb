use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::lexer::Tok;
use crate::syntax::parser::{cursor, linear_atom};
use crate::syntax::{IntExpr, LinearAtom, Name};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct PredError {
    pub line: usize,
    pub msg: String,
}

/// Abstraction predicates per integer binder name, plus an optional global
/// list (`*`) whose atoms use `_` for the binder.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateSet {
    per_binder: BTreeMap<String, Vec<LinearAtom>>,
    global: Option<Vec<LinearAtom>>,
}

impl PredicateSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.per_binder.is_empty() && self.global.is_none()
    }

    /// Adds predicates for `binder`; each atom may mention only `binder`.
    pub fn insert(&mut self, binder: &str, atoms: Vec<LinearAtom>) {
        self.per_binder.entry(binder.to_string()).or_default().extend(atoms);
    }

    pub fn set_global(&mut self, atoms: Vec<LinearAtom>) {
        self.global = Some(atoms);
    }

    /// Predicates for a binder, rewritten over the binder's own name.
    /// Looks up the exact name, then its display name, then `*`.
    pub fn for_binder(&self, binder: &Name) -> Option<Vec<LinearAtom>> {
        let to = IntExpr::Var(binder.clone());
        if let Some(v) = self
            .per_binder
            .get(binder.as_str())
            .or_else(|| self.per_binder.get(binder.base()))
        {
            let key = if self.per_binder.contains_key(binder.as_str()) {
                binder.as_str()
            } else {
                binder.base()
            };
            return Some(v.iter().map(|a| a.rename(&Name::new(key), &to)).collect());
        }
        self.global
            .as_ref()
            .map(|v| v.iter().map(|a| a.rename(&Name::new("_"), &to)).collect())
    }
}

impl fmt::Display for PredicateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = |atoms: &[LinearAtom]| {
            atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
        };
        for (b, atoms) in &self.per_binder {
            writeln!(f, "{}: {}", b, line(atoms))?;
        }
        if let Some(g) = &self.global {
            writeln!(f, "*: {}", line(g))?;
        }
        Ok(())
    }
}

/// Parses lines `y: y > 0, y >= 10` and `*: _ > 0`; `#` starts a comment.
pub fn parse_predicates(text: &str) -> Result<PredicateSet, PredError> {
    let mut set = PredicateSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| PredError { line, msg };
        let (head, rest) = content
            .split_once(':')
            .ok_or_else(|| err("expected `binder: atom, ...`".into()))?;
        let head = head.trim();
        let var = if head == "*" { "_" } else { head };
        let ok_name = var.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && var.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
        if !ok_name {
            return Err(err(format!("invalid binder name `{}`", head)));
        }
        let mut atoms = Vec::new();
        if !rest.trim().is_empty() {
            let mut c = cursor(rest).map_err(|e| err(e.to_string()))?;
            loop {
                let a = linear_atom(&mut c).map_err(|e| err(e.to_string()))?;
                if let Some(v) = a.vars().into_iter().find(|v| v.as_str() != var) {
                    return Err(err(format!(
                        "predicate for `{}` mentions another variable `{}`",
                        head, v
                    )));
                }
                atoms.push(a);
                if c.eat(&Tok::Comma) {
                    continue;
                }
                if c.at_eof() {
                    break;
                }
                return Err(err(format!("expected `,` or end of line, found {}", c.peek())));
            }
        }
        if head == "*" {
            set.set_global(atoms);
        } else {
            set.insert(head, atoms);
        }
    }
    Ok(set)
}
