//! A small continuation-passing language with file-access events, and its
//! translation to fixpoint formulas whose models are the allowed traces.

mod parse;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::{dualize, Arg, FixKind, Formula, IntExpr, LinearAtom, Name, Pos, Type};

pub use parse::parse_program;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: `{name}` expects {expected} arguments, found {found}")]
    Arity { pos: Pos, name: String, expected: usize, found: usize },
    #[error("{pos}: unknown function `{name}`")]
    UnknownFunction { pos: Pos, name: String },
    #[error("{pos}: {msg}")]
    NonLinear { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Kind { pos: Pos, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Int,
    /// A continuation; translated to a `prop` parameter.
    Cont,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: Name,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallArg {
    Int(IntExpr),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Event(Name, Box<Expr>),
    /// A call of a definition or of a continuation parameter (no arguments).
    Call(Name, Vec<CallArg>),
    If(LinearAtom, Box<Expr>, Box<Expr>),
    Unit,
}

impl Expr {
    pub fn event(label: &str, k: Expr) -> Self {
        Expr::Event(Name::new(label), Box::new(k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: Name,
    pub recursive: bool,
    pub params: Vec<Param>,
    pub body: Expr,
}

/// Definitions see earlier definitions and, when recursive, themselves;
/// `main` sees all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub events: BTreeSet<String>,
    pub definitions: Vec<Definition>,
    pub main: Expr,
}

impl Program {
    fn def_index(&self, f: &Name) -> Option<usize> {
        self.definitions.iter().position(|d| &d.name == f)
    }
}

fn def_type(d: &Definition) -> Type {
    Type::predicate(d.params.iter().map(|p| match p.kind {
        ParamKind::Int => Type::Int,
        ParamKind::Cont => Type::Prop,
    }))
}

struct Translator<'a> {
    prog: &'a Program,
    polarity: FixKind,
    terms: Vec<Option<Formula>>,
}

impl Translator<'_> {
    fn term(&mut self, i: usize) -> Formula {
        if let Some(t) = &self.terms[i] {
            return t.clone();
        }
        let d = &self.prog.definitions[i];
        let mut f = self.expr(&d.body, Some(i));
        for p in d.params.iter().rev() {
            let ty = match p.kind {
                ParamKind::Int => Type::Int,
                ParamKind::Cont => Type::Prop,
            };
            f = Formula::lambda(p.name.clone(), ty, f);
        }
        if d.recursive {
            f = Formula::Fix(self.polarity, d.name.clone(), def_type(d), Box::new(f));
        }
        self.terms[i] = Some(f.clone());
        f
    }

    fn expr(&mut self, e: &Expr, current: Option<usize>) -> Formula {
        match e {
            Expr::Unit => Formula::diamond("end", Formula::True),
            Expr::Event(a, k) => Formula::diamond(a.clone(), self.expr(k, current)),
            Expr::If(c, t, f) => Formula::and(
                Formula::or(dualize(&Formula::Atom(c.clone())), self.expr(t, current)),
                Formula::or(Formula::Atom(c.clone()), self.expr(f, current)),
            ),
            Expr::Call(g, args) => {
                let own = current.map(|i| &self.prog.definitions[i]);
                if own.is_some_and(|d| d.params.iter().any(|p| &p.name == g)) {
                    return Formula::Var(g.clone());
                }
                let j = self.prog.def_index(g).expect("validated program");
                let head = if Some(j) == current { Formula::Var(g.clone()) } else { self.term(j) };
                let args: Vec<Arg> = args
                    .iter()
                    .map(|a| match a {
                        CallArg::Int(e) => Arg::Int(e.clone()),
                        CallArg::Expr(x) => Arg::formula(self.expr(x, current)),
                    })
                    .collect();
                Formula::apps(head, args)
            }
        }
    }
}

/// Replaces events by `◇a`, termination by `◇end true`, conditionals by
/// `(¬c ∨ ⟦then⟧) ∧ (c ∨ ⟦else⟧)` and recursive definitions by fixpoints
/// of the given polarity. Calls to earlier definitions inline their
/// (closed) translations.
pub fn translate_program(p: &Program, polarity: FixKind) -> Formula {
    let mut t = Translator { prog: p, polarity, terms: vec![None; p.definitions.len()] };
    t.expr(&p.main, None)
}
