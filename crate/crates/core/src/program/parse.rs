//! ```text
//! program := ('events' ':' ident*)? item* (('main' '=')? expr)
//! item    := 'let' ident '=' 'open' string 'in'
//!          | 'let' 'rec'? ident ident* '=' expr 'in'?
//! expr    := 'if' atom 'then' expr 'else' expr
//!          | 'event' ident ';' expr
//!          | app (';' expr)?
//! app     := ident arg* | '()' | '(' expr ')'
//! ```
//! Declared events may be written bare (`read x k`, `read(x); rest`).
//! File handles bound by `open` are dropped from every argument list.

use std::collections::BTreeSet;

use super::{CallArg, Definition, Expr, Param, ParamKind, Program, ProgramError};
use crate::syntax::lexer::{Cursor, Tok};
use crate::syntax::parser::{cursor, int_expr, linear_atom};
use crate::syntax::{IntExpr, LinearAtom, Name, ParseError, Pos};

const RESERVED: &[&str] = &["let", "rec", "in", "if", "then", "else", "event", "main", "open"];

fn from_parse(e: ParseError) -> ProgramError {
    match e {
        ParseError::NonLinear { pos, msg } => ProgramError::NonLinear { pos, msg },
        other => ProgramError::Syntax { pos: other.pos(), msg: other.to_string() },
    }
}

fn syntax<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ProgramError> {
    Err(ProgramError::Syntax { pos, msg: msg.into() })
}

#[derive(Debug, Clone)]
enum Raw {
    If(LinearAtom, Pos, Box<Raw>, Box<Raw>),
    Event(Name, Box<Raw>),
    App(Name, Pos, Vec<RawArg>),
    Unit,
}

#[derive(Debug, Clone)]
enum RawArg {
    Ident(Name, Pos),
    Int(IntExpr, Pos),
    Expr(Raw),
}

enum Head {
    Event(Name, Pos, Option<Raw>),
    Other(Raw),
}

struct Parser {
    c: Cursor,
    events: BTreeSet<String>,
    handles: BTreeSet<String>,
    /// Parameters of the definition being parsed; they shadow handles
    /// and events.
    params: Vec<String>,
}

impl Parser {
    fn is_reserved(s: &str) -> bool {
        RESERVED.contains(&s)
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ProgramError> {
        let pos = self.c.pos();
        match self.c.bump() {
            Tok::Ident(s) if !Self::is_reserved(&s) => Ok((s, pos)),
            t => syntax(pos, format!("expected {}, found {}", what, t)),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ProgramError> {
        if self.c.eat(&t) {
            Ok(())
        } else {
            syntax(self.c.pos(), format!("expected {}, found {}", t, self.c.peek()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ProgramError> {
        if self.c.eat_kw(kw) {
            Ok(())
        } else {
            syntax(self.c.pos(), format!("expected `{}`, found {}", kw, self.c.peek()))
        }
    }

    fn is_handle(&self, s: &str) -> bool {
        self.handles.contains(s) && !self.params.iter().any(|p| p == s)
    }

    fn is_event(&self, s: &str) -> bool {
        self.events.contains(s) && !self.params.iter().any(|p| p == s)
    }

    fn expr(&mut self) -> Result<Raw, ProgramError> {
        if self.c.eat_kw("if") {
            let pos = self.c.pos();
            let cond = linear_atom(&mut self.c).map_err(from_parse)?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(Raw::If(cond, pos, Box::new(t), Box::new(e)));
        }
        if self.c.eat_kw("event") {
            let (label, _) = self.ident("an event name")?;
            self.events.insert(label.clone());
            self.expect(Tok::Semi)?;
            let k = self.expr()?;
            return Ok(Raw::Event(Name::new(&label), Box::new(k)));
        }
        let pos = self.c.pos();
        let head = self.app()?;
        if self.c.eat(&Tok::Semi) {
            let rest = self.expr()?;
            return match head {
                Head::Event(a, _, None) => Ok(Raw::Event(a, Box::new(rest))),
                Head::Event(a, p, Some(_)) => {
                    syntax(p, format!("event `{}` already has a continuation", a))
                }
                Head::Other(_) => syntax(pos, "only events may be followed by `;`"),
            };
        }
        Ok(match head {
            Head::Event(a, _, k) => Raw::Event(a, Box::new(k.unwrap_or(Raw::Unit))),
            Head::Other(r) => r,
        })
    }

    fn app(&mut self) -> Result<Head, ProgramError> {
        let pos = self.c.pos();
        if self.c.eat(&Tok::LParen) {
            if self.c.eat(&Tok::RParen) {
                return Ok(Head::Other(Raw::Unit));
            }
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Head::Other(e));
        }
        let (name, _) = self.ident("an expression")?;
        let args: Vec<RawArg> = self
            .args()?
            .into_iter()
            .filter(|a| !matches!(a, RawArg::Ident(n, _) if self.is_handle(n.as_str())))
            .collect();
        if self.is_event(&name) {
            let mut args = args;
            return match args.len() {
                0 => Ok(Head::Event(Name::new(&name), pos, None)),
                1 => {
                    let k = match args.pop().unwrap() {
                        RawArg::Ident(n, p) => Raw::App(n, p, vec![]),
                        RawArg::Expr(r) => r,
                        RawArg::Int(_, p) => return syntax(p, "an event continuation cannot be an integer"),
                    };
                    Ok(Head::Event(Name::new(&name), pos, Some(k)))
                }
                n => syntax(pos, format!("event `{}` takes one continuation, found {} arguments", name, n)),
            };
        }
        Ok(Head::Other(Raw::App(Name::new(&name), pos, args)))
    }

    fn starts_arg(&self) -> bool {
        match self.c.peek() {
            Tok::Ident(s) => !Self::is_reserved(s),
            Tok::Int(_) | Tok::LParen => true,
            _ => false,
        }
    }

    fn args(&mut self) -> Result<Vec<RawArg>, ProgramError> {
        let mut out = Vec::new();
        while self.starts_arg() {
            let pos = self.c.pos();
            match self.c.peek().clone() {
                Tok::Ident(s) => {
                    self.c.bump();
                    out.push(RawArg::Ident(Name::new(&s), pos));
                }
                Tok::Int(k) => {
                    self.c.bump();
                    out.push(RawArg::Int(IntExpr::Const(k), pos));
                }
                _ => {
                    // `(...)`: an integer expression if it parses as one
                    let mut probe = self.c.clone();
                    probe.bump();
                    if probe.eat(&Tok::RParen) {
                        self.c = probe;
                        out.push(RawArg::Expr(Raw::Unit));
                        continue;
                    }
                    if let Ok(e) = int_expr(&mut probe) {
                        if probe.eat(&Tok::RParen) {
                            self.c = probe;
                            out.push(match e {
                                IntExpr::Var(v) => RawArg::Ident(v, pos),
                                e => RawArg::Int(e, pos),
                            });
                            continue;
                        }
                    }
                    self.c.bump();
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    out.push(RawArg::Expr(e));
                }
            }
        }
        Ok(out)
    }
}

struct RawDef {
    name: String,
    recursive: bool,
    params: Vec<(String, Pos)>,
    body: Raw,
}

/// Parses and validates a program; parameter kinds are inferred from use.
pub fn parse_program(text: &str) -> Result<Program, ProgramError> {
    let c = cursor(text).map_err(from_parse)?;
    let mut p = Parser { c, events: BTreeSet::new(), handles: BTreeSet::new(), params: vec![] };

    if p.c.is_kw("events") {
        let line = p.c.pos().line;
        let mut probe = p.c.clone();
        probe.bump();
        if probe.eat(&Tok::Colon) {
            p.c = probe;
            while let Tok::Ident(s) = p.c.peek().clone() {
                if p.c.pos().line != line {
                    break;
                }
                if Parser::is_reserved(&s) {
                    return syntax(p.c.pos(), format!("`{}` cannot be an event name", s));
                }
                p.c.bump();
                p.events.insert(s);
            }
        }
    }

    let mut defs: Vec<RawDef> = Vec::new();
    let main;
    loop {
        if p.c.is_kw("let") {
            let mut probe = p.c.clone();
            probe.bump();
            let is_open = matches!(probe.bump(), Tok::Ident(_)) && probe.eat(&Tok::Eq) && probe.is_kw("open");
            p.c.bump();
            if is_open {
                let (h, _) = p.ident("a handle name")?;
                p.expect(Tok::Eq)?;
                p.expect_kw("open")?;
                let pos = p.c.pos();
                match p.c.bump() {
                    Tok::Str(_) | Tok::Ident(_) => {}
                    t => return syntax(pos, format!("expected a file name, found {}", t)),
                }
                p.expect_kw("in")?;
                p.handles.insert(h);
                continue;
            }
            let recursive = p.c.eat_kw("rec");
            let (name, pos) = p.ident("a function name")?;
            let mut params = Vec::new();
            while let Tok::Ident(_) = p.c.peek() {
                let (x, xp) = p.ident("a parameter")?;
                if x == name || params.iter().any(|(y, _)| y == &x) {
                    return syntax(xp, format!("duplicate name `{}`", x));
                }
                params.push((x, xp));
            }
            p.expect(Tok::Eq)?;
            p.params = params.iter().map(|(x, _)| x.clone()).collect();
            let body = p.expr()?;
            p.params.clear();
            p.c.eat_kw("in");
            if defs.iter().any(|d| d.name == name) || p.events.contains(&name) {
                return syntax(pos, format!("`{}` is already defined", name));
            }
            defs.push(RawDef { name, recursive, params, body });
        } else {
            if p.c.eat_kw("main") {
                p.expect(Tok::Eq)?;
            } else if p.c.at_eof() {
                return syntax(p.c.pos(), "missing `main`");
            }
            main = p.expr()?;
            break;
        }
    }
    if !p.c.at_eof() {
        return syntax(p.c.pos(), format!("unexpected {}", p.c.peek()));
    }
    Elab::run(p.events, defs, main)
}

struct Elab {
    defs: Vec<RawDef>,
    kinds: Vec<Vec<Option<ParamKind>>>,
}

impl Elab {
    fn run(events: BTreeSet<String>, defs: Vec<RawDef>, main: Raw) -> Result<Program, ProgramError> {
        let kinds = defs.iter().map(|d| vec![None; d.params.len()]).collect();
        let mut el = Elab { defs, kinds };
        loop {
            let mut changed = false;
            for i in 0..el.defs.len() {
                let body = el.defs[i].body.clone();
                changed |= el.infer(&body, i)?;
            }
            if !changed {
                break;
            }
        }
        let mut definitions = Vec::new();
        for i in 0..el.defs.len() {
            let d = &el.defs[i];
            let params = d
                .params
                .iter()
                .zip(&el.kinds[i])
                .map(|((x, _), k)| Param { name: Name::new(x), kind: k.unwrap_or(ParamKind::Int) })
                .collect::<Vec<_>>();
            let body = el.elab(&d.body, Some(i), &params)?;
            definitions.push(Definition { name: Name::new(&d.name), recursive: d.recursive, params, body });
        }
        let main = el.elab(&main, None, &[])?;
        Ok(Program { events, definitions, main })
    }

    fn set(&mut self, i: usize, x: &str, k: ParamKind, pos: Pos) -> Result<bool, ProgramError> {
        let Some(j) = self.defs[i].params.iter().position(|(y, _)| y == x) else {
            return Ok(false);
        };
        match self.kinds[i][j] {
            Some(old) if old == k => Ok(false),
            Some(_) => Err(ProgramError::Kind {
                pos,
                msg: format!("parameter `{}` is used both as an integer and as a continuation", x),
            }),
            None => {
                self.kinds[i][j] = Some(k);
                Ok(true)
            }
        }
    }

    fn visible(&self, f: &str, current: Option<usize>) -> Option<usize> {
        let j = self.defs.iter().position(|d| d.name == f)?;
        match current {
            None => Some(j),
            Some(i) if j < i || (j == i && self.defs[i].recursive) => Some(j),
            Some(_) => None,
        }
    }

    fn infer(&mut self, r: &Raw, i: usize) -> Result<bool, ProgramError> {
        let mut changed = false;
        match r {
            Raw::Unit => {}
            Raw::Event(_, k) => changed |= self.infer(k, i)?,
            Raw::If(c, pos, t, e) => {
                for v in c.vars() {
                    changed |= self.set(i, v.as_str(), ParamKind::Int, *pos)?;
                }
                changed |= self.infer(t, i)?;
                changed |= self.infer(e, i)?;
            }
            Raw::App(f, pos, args) => {
                if self.defs[i].params.iter().any(|(x, _)| x == f.as_str()) {
                    changed |= self.set(i, f.as_str(), ParamKind::Cont, *pos)?;
                }
                let callee = self.visible(f.as_str(), Some(i));
                for (n, a) in args.iter().enumerate() {
                    let want = callee.and_then(|j| self.kinds[j].get(n).copied().flatten());
                    match a {
                        RawArg::Ident(v, p) => {
                            if let Some(k) = want {
                                changed |= self.set(i, v.as_str(), k, *p)?;
                            }
                        }
                        RawArg::Int(e, p) => {
                            let mut vs = Vec::new();
                            e.vars(&mut vs);
                            for v in vs {
                                changed |= self.set(i, v.as_str(), ParamKind::Int, *p)?;
                            }
                        }
                        RawArg::Expr(x) => changed |= self.infer(x, i)?,
                    }
                }
            }
        }
        Ok(changed)
    }

    fn int_vars_ok(e: &IntExpr, params: &[Param], pos: Pos) -> Result<(), ProgramError> {
        let mut vs = Vec::new();
        e.vars(&mut vs);
        for v in vs {
            match params.iter().find(|p| p.name == v) {
                Some(p) if p.kind == ParamKind::Int => {}
                Some(_) => {
                    return Err(ProgramError::Kind {
                        pos,
                        msg: format!("continuation `{}` used as an integer", v),
                    })
                }
                None => {
                    return Err(ProgramError::Syntax { pos, msg: format!("unbound variable `{}`", v) })
                }
            }
        }
        Ok(())
    }

    fn elab(&self, r: &Raw, current: Option<usize>, params: &[Param]) -> Result<Expr, ProgramError> {
        Ok(match r {
            Raw::Unit => Expr::Unit,
            Raw::Event(a, k) => Expr::Event(a.clone(), Box::new(self.elab(k, current, params)?)),
            Raw::If(c, pos, t, e) => {
                Self::int_vars_ok(&c.lhs, params, *pos)?;
                Self::int_vars_ok(&c.rhs, params, *pos)?;
                Expr::If(
                    c.clone(),
                    Box::new(self.elab(t, current, params)?),
                    Box::new(self.elab(e, current, params)?),
                )
            }
            Raw::App(f, pos, args) => {
                if let Some(p) = params.iter().find(|p| &p.name == f) {
                    if p.kind == ParamKind::Int {
                        return Err(ProgramError::Kind {
                            pos: *pos,
                            msg: format!("integer `{}` used as a continuation", f),
                        });
                    }
                    if !args.is_empty() {
                        return Err(ProgramError::Arity {
                            pos: *pos,
                            name: f.to_string(),
                            expected: 0,
                            found: args.len(),
                        });
                    }
                    return Ok(Expr::Call(f.clone(), vec![]));
                }
                let j = self.visible(f.as_str(), current).ok_or_else(|| ProgramError::UnknownFunction {
                    pos: *pos,
                    name: f.to_string(),
                })?;
                let kinds: Vec<ParamKind> =
                    self.kinds[j].iter().map(|k| k.unwrap_or(ParamKind::Int)).collect();
                if kinds.len() != args.len() {
                    return Err(ProgramError::Arity {
                        pos: *pos,
                        name: f.to_string(),
                        expected: kinds.len(),
                        found: args.len(),
                    });
                }
                let mut out = Vec::new();
                for (k, a) in kinds.iter().zip(args) {
                    out.push(match (k, a) {
                        (ParamKind::Int, RawArg::Ident(v, p)) => {
                            let e = IntExpr::Var(v.clone());
                            Self::int_vars_ok(&e, params, *p)?;
                            CallArg::Int(e)
                        }
                        (ParamKind::Int, RawArg::Int(e, p)) => {
                            Self::int_vars_ok(e, params, *p)?;
                            CallArg::Int(e.clone())
                        }
                        (ParamKind::Int, RawArg::Expr(_)) => {
                            return Err(ProgramError::Kind {
                                pos: *pos,
                                msg: format!("`{}` expects an integer argument", f),
                            })
                        }
                        (ParamKind::Cont, RawArg::Ident(v, p)) => {
                            CallArg::Expr(self.elab(&Raw::App(v.clone(), *p, vec![]), current, params)?)
                        }
                        (ParamKind::Cont, RawArg::Expr(x)) => CallArg::Expr(self.elab(x, current, params)?),
                        (ParamKind::Cont, RawArg::Int(_, p)) => {
                            return Err(ProgramError::Kind {
                                pos: *p,
                                msg: format!("`{}` expects a continuation argument", f),
                            })
                        }
                    });
                }
                Expr::Call(f.clone(), out)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_event_syntax() {
        let p = parse_program("main = event read; event close; ()").unwrap();
        assert_eq!(p.main, Expr::event("read", Expr::event("close", Expr::Unit)));
        assert!(p.events.contains("read"));
    }

    #[test]
    fn handle_may_be_omitted() {
        let a = parse_program("events: read close\nlet rec f n k = if n <= 0 then close k else read (f (n-1) k)\nmain = f 3 ()").unwrap();
        let b = parse_program("events: read close\nlet x = open \"a\" in\nlet rec f n k = if n <= 0 then close x k else read x (f (n-1) x k)\nmain = f 3 ()").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_program("main ="), Err(ProgramError::Syntax { .. })));
        assert!(matches!(parse_program(""), Err(ProgramError::Syntax { .. })));
        assert!(matches!(
            parse_program("let rec f n k = k\nmain = f 1"),
            Err(ProgramError::Arity { expected: 2, found: 1, .. })
        ));
        assert!(matches!(parse_program("main = g 1 ()"), Err(ProgramError::UnknownFunction { .. })));
        assert!(matches!(
            parse_program("let rec f n m k = if n * m <= 0 then k else k\nmain = f 1 2 ()"),
            Err(ProgramError::NonLinear { .. })
        ));
        assert!(matches!(
            parse_program("let rec f n = if n <= 0 then n else ()\nmain = f 1"),
            Err(ProgramError::Kind { .. })
        ));
        // later definitions are not visible, and non-recursive ones cannot call themselves
        assert!(parse_program("let f k = g k\nlet g k = k\nmain = f ()").is_err());
        assert!(parse_program("let f k = f k\nmain = f ()").is_err());
        assert!(parse_program("events: read\nmain = read 1").is_err());
        assert!(parse_program("main = () ; ()").is_err());
    }

    #[test]
    fn kinds_flow_through_calls() {
        let p = parse_program("let h k = k\nlet rec g n k = if n > 0 then g (n - 1) k else h k\nmain = g 1 ()").unwrap();
        let kinds: Vec<ParamKind> = p.definitions[1].params.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![ParamKind::Int, ParamKind::Cont]);
    }
}
