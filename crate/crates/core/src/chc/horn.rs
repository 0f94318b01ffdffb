//! SMT-LIB2 `HORN` rendering and a reader for the same dialect.

use std::fmt::Write as _;

use thiserror::Error;

use super::{ChcError, ChcSystem, Clause, Literal, PredApp};
use crate::smt::{atom_term, int_term, symbol};
use crate::syntax::{CmpOp, IntExpr, LinearAtom, Name};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HornError {
    #[error("offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Chc(#[from] ChcError),
}

fn lit_term(l: &Literal) -> String {
    match l {
        Literal::Constraint(a) => atom_term(a),
        Literal::Pred(p) => app_term(p),
    }
}

fn app_term(p: &PredApp) -> String {
    let name = symbol(&Name::new(p.pred.as_str()));
    if p.args.is_empty() {
        return name;
    }
    let args: Vec<String> = p.args.iter().map(int_term).collect();
    format!("({} {})", name, args.join(" "))
}

/// Deterministic SMT-LIB2 text: sorted declarations, one `forall` assertion
/// per clause (definite clauses first), then `(check-sat)`.
pub fn emit_smtlib_horn(s: &ChcSystem) -> String {
    let mut out = String::from("(set-logic HORN)\n");
    for (p, &k) in &s.predicates {
        let sorts = vec!["Int"; k].join(" ");
        let _ = writeln!(out, "(declare-fun {} ({}) Bool)", symbol(&Name::new(p.as_str())), sorts);
    }
    for c in s.clauses() {
        let body = match c.body.len() {
            0 => "true".to_string(),
            1 => lit_term(&c.body[0]),
            _ => format!("(and {})", c.body.iter().map(lit_term).collect::<Vec<_>>().join(" ")),
        };
        let head = c.head.as_ref().map_or("false".to_string(), app_term);
        let imp = format!("(=> {} {})", body, head);
        let vars = c.vars();
        if vars.is_empty() {
            let _ = writeln!(out, "(assert {})", imp);
        } else {
            let binds: Vec<String> = vars.iter().map(|v| format!("({} Int)", symbol(v))).collect();
            let _ = writeln!(out, "(assert (forall ({}) {}))", binds.join(" "), imp);
        }
    }
    out.push_str("(check-sat)\n");
    out
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            _ => None,
        }
    }
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, HornError> {
    Err(HornError::Syntax { pos, msg: msg.into() })
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, HornError> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), 0)];
    while i < b.len() {
        let c = b[i];
        match c {
            b';' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push((Vec::new(), i));
                i += 1;
            }
            b')' => {
                if stack.len() == 1 {
                    return err(i, "unbalanced `)`");
                }
                let (items, start) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexp::List(items, start));
                i += 1;
            }
            b'|' => {
                let start = i;
                i += 1;
                while i < b.len() && b[i] != b'|' {
                    i += 1;
                }
                if i == b.len() {
                    return err(start, "unterminated quoted symbol");
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(text[start + 1..i].to_string(), start));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < b.len() && !b[i].is_ascii_whitespace() && !b"();|".contains(&b[i]) {
                    i += 1;
                }
                if !text.is_char_boundary(start) || !text.is_char_boundary(i) {
                    return err(start, "non-ASCII symbol must be quoted");
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(text[start..i].to_string(), start));
            }
        }
    }
    if stack.len() != 1 {
        return err(stack.last().unwrap().1, "unclosed `(`");
    }
    Ok(stack.pop().unwrap().0)
}

struct Reader<'a> {
    sys: &'a ChcSystem,
}

impl Reader<'_> {
    fn int(&self, e: &Sexp) -> Result<IntExpr, HornError> {
        match e {
            Sexp::Atom(s, p) => {
                if s.bytes().all(|c| c.is_ascii_digit()) {
                    s.parse().map(IntExpr::Const).or_else(|_| err(*p, "integer literal out of range"))
                } else if self.sys.predicates.contains_key(s.as_str()) || is_reserved(s) {
                    err(*p, format!("`{}` is not an integer term", s))
                } else {
                    Ok(IntExpr::var(s.as_str()))
                }
            }
            Sexp::List(items, p) => {
                let head = items.first().and_then(Sexp::atom);
                match (head, items.len()) {
                    (Some("-"), 2) => match &items[1] {
                        Sexp::Atom(s, _) if s.bytes().all(|c| c.is_ascii_digit()) => {
                            let k: i64 = s.parse().or_else(|_| err(*p, "integer literal out of range"))?;
                            Ok(IntExpr::Const(-k))
                        }
                        a => Ok(IntExpr::neg(self.int(a)?)),
                    },
                    (Some("-"), n) if n >= 3 => {
                        let mut acc = self.int(&items[1])?;
                        for a in &items[2..] {
                            acc = IntExpr::sub(acc, self.int(a)?);
                        }
                        Ok(acc)
                    }
                    (Some("+"), n) if n >= 2 => {
                        let mut acc = self.int(&items[1])?;
                        for a in &items[2..] {
                            acc = IntExpr::add(acc, self.int(a)?);
                        }
                        Ok(acc)
                    }
                    (Some("*"), 3) => {
                        // constant scaling only
                        let (k, t) = match (&items[1], &items[2]) {
                            (Sexp::Atom(s, _), t) if s.parse::<i64>().is_ok() => (s.parse::<i64>().unwrap(), t),
                            (t, Sexp::Atom(s, _)) if s.parse::<i64>().is_ok() => (s.parse::<i64>().unwrap(), t),
                            _ => return err(*p, "only multiplication by a literal is linear"),
                        };
                        if k > 64 {
                            return err(*p, "multiplier too large");
                        }
                        let t = self.int(t)?;
                        let mut acc = IntExpr::Const(0);
                        for i in 0..k {
                            acc = if i == 0 { t.clone() } else { IntExpr::add(acc, t.clone()) };
                        }
                        Ok(acc)
                    }
                    _ => err(*p, "expected an integer term"),
                }
            }
        }
    }

    fn atom(&self, op: &str, items: &[Sexp], pos: usize) -> Result<Option<LinearAtom>, HornError> {
        let op = match op {
            "=" => CmpOp::Eq,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            "distinct" => CmpOp::Ne,
            _ => return Ok(None),
        };
        if items.len() != 3 {
            return err(pos, "comparison takes two arguments");
        }
        Ok(Some(LinearAtom::new(op, self.int(&items[1])?, self.int(&items[2])?)))
    }

    fn app(&self, e: &Sexp) -> Result<Option<PredApp>, HornError> {
        let (name, args) = match e {
            Sexp::Atom(s, _) => (s.as_str(), &[][..]),
            Sexp::List(items, _) => match items.first().and_then(Sexp::atom) {
                Some(s) => (s, &items[1..]),
                None => return Ok(None),
            },
        };
        if !self.sys.predicates.contains_key(name) {
            return Ok(None);
        }
        let args = args.iter().map(|a| self.int(a)).collect::<Result<_, _>>()?;
        Ok(Some(PredApp::new(name, args)))
    }

    fn body(&self, e: &Sexp, out: &mut Vec<Literal>) -> Result<(), HornError> {
        if let Some(p) = self.app(e)? {
            out.push(Literal::Pred(p));
            return Ok(());
        }
        match e {
            Sexp::Atom(s, _) if s == "true" => Ok(()),
            Sexp::List(items, p) => {
                let head = items.first().and_then(Sexp::atom).unwrap_or("");
                match head {
                    "and" => items[1..].iter().try_for_each(|x| self.body(x, out)),
                    "not" if items.len() == 2 => match &items[1] {
                        Sexp::List(inner, q) => {
                            let op = inner.first().and_then(Sexp::atom).unwrap_or("");
                            match self.atom(op, inner, *q)? {
                                Some(a) => {
                                    out.push(Literal::Constraint(a.negate()));
                                    Ok(())
                                }
                                None => err(*q, "only comparisons may be negated"),
                            }
                        }
                        x => err(x.pos(), "only comparisons may be negated"),
                    },
                    op => match self.atom(op, items, *p)? {
                        Some(a) => {
                            out.push(Literal::Constraint(a));
                            Ok(())
                        }
                        None => err(*p, format!("unsupported body term `{}`", op)),
                    },
                }
            }
            x => err(x.pos(), "unsupported body term"),
        }
    }

    fn clause(&self, e: &Sexp) -> Result<Clause, HornError> {
        let mut e = e;
        if let Sexp::List(items, p) = e {
            if items.first().and_then(Sexp::atom) == Some("forall") {
                if items.len() != 3 {
                    return err(*p, "malformed forall");
                }
                let Sexp::List(binds, _) = &items[1] else {
                    return err(items[1].pos(), "expected a binder list");
                };
                for b in binds {
                    match b {
                        Sexp::List(v, _) if v.len() == 2 && v[1].atom() == Some("Int") && v[0].atom().is_some() => {}
                        x => return err(x.pos(), "binders must be `(name Int)`"),
                    }
                }
                e = &items[2];
            }
        }
        match e {
            Sexp::List(items, p) if items.first().and_then(Sexp::atom) == Some("=>") => {
                if items.len() != 3 {
                    return err(*p, "`=>` takes a body and a head");
                }
                let mut body = Vec::new();
                self.body(&items[1], &mut body)?;
                let head = match &items[2] {
                    Sexp::Atom(s, _) if s == "false" => None,
                    h => match self.app(h)? {
                        Some(app) => Some(app),
                        None => return err(h.pos(), "head must be a predicate application or false"),
                    },
                };
                Ok(Clause { body, head })
            }
            Sexp::List(items, _) if items.first().and_then(Sexp::atom) == Some("not") && items.len() == 2 => {
                let mut body = Vec::new();
                self.body(&items[1], &mut body)?;
                Ok(Clause { body, head: None })
            }
            h => match self.app(h)? {
                Some(app) => Ok(Clause { body: vec![], head: Some(app) }),
                None => err(h.pos(), "expected `(=> body head)`"),
            },
        }
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "and" | "or" | "not" | "true" | "false" | "=>" | "forall" | "exists")
}

/// Reads the dialect produced by [`emit_smtlib_horn`]: `declare-fun` with
/// `Int` arguments, and `assert`ed clauses `(forall (...) (=> body head))`.
/// `set-logic`, `set-info`, `check-sat`, `get-model` and `exit` are ignored.
pub fn parse_horn(text: &str) -> Result<ChcSystem, HornError> {
    let mut sys = ChcSystem::new();
    let cmds = read_sexps(text)?;
    let mut asserts = Vec::new();
    for c in &cmds {
        let Sexp::List(items, p) = c else {
            return err(c.pos(), "expected a command");
        };
        match items.first().and_then(Sexp::atom) {
            Some("set-logic" | "set-info" | "set-option" | "check-sat" | "get-model" | "exit") => {}
            Some("declare-fun") => {
                let (Some(name), Some(Sexp::List(sorts, _)), Some("Bool")) =
                    (items.get(1).and_then(Sexp::atom), items.get(2), items.get(3).and_then(Sexp::atom))
                else {
                    return err(*p, "expected `(declare-fun P (Int ...) Bool)`");
                };
                if items.len() != 4 || sorts.iter().any(|s| s.atom() != Some("Int")) {
                    return err(*p, "predicates take Int arguments and return Bool");
                }
                if is_reserved(name) || sys.predicates.contains_key(name) {
                    return err(*p, format!("bad or duplicate predicate `{}`", name));
                }
                sys.declare(name, sorts.len());
            }
            Some("assert") if items.len() == 2 => asserts.push(&items[1]),
            _ => return err(*p, "unsupported command"),
        }
    }
    let mut clauses = Vec::new();
    {
        let r = Reader { sys: &sys };
        for a in asserts {
            clauses.push(r.clause(a)?);
        }
    }
    for c in clauses {
        sys.push(c);
    }
    sys.validate()?;
    Ok(sys)
}
