//! Concrete syntax for formulas.
//!
//! ```text
//! file    := ('let' ident '=' formula ';')* formula
//! formula := binder | or
//! binder  := ('mu'|'nu') ident ':' type '.' formula
//!          | '\' ident ':' type '.' formula | '\' '(' ident ':' type (',' ...)* ')' '.' formula
//!          | ('forall'|'exists') ident (',' ident)* ('>=' bound)? '.' formula
//! or      := and ('\/' and)*
//! and     := cmp ('/\' cmp)*
//! cmp     := sum (CMP sum)?
//! sum     := unary (('+'|'-') unary)*
//! unary   := '-' unary | '<' ident '>' unary | '[' ident ']' unary | binder | app
//! app     := primary primary*
//! primary := 'true' | 'false' | ident | int | '(' formula (',' formula)* ')'
//! ```
//!
//! Parsing produces an untyped tree first; elaboration against the typing
//! environment decides which subtrees are integer expressions.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::lexer::{lex, Cursor, Pos, Tok};
use super::typing::TypeEnv;
use super::{
    CmpOp, FixKind, Formula, IntExpr, LinearAtom, ModalKind, Name, QuantKind, Type,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: unbound variable `{name}`")]
    Unbound { pos: Pos, name: String },
    #[error("{pos}: binder `{name}` needs a type annotation")]
    MissingAnnotation { pos: Pos, name: String },
    #[error("{pos}: type error: {msg}")]
    Type { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    NonLinear { pos: Pos, msg: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Unbound { pos, .. }
            | ParseError::MissingAnnotation { pos, .. }
            | ParseError::Type { pos, .. }
            | ParseError::NonLinear { pos, .. } => *pos,
        }
    }
}

pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, msg: msg.into() }
}

const KEYWORDS: &[&str] = &["true", "false", "mu", "nu", "forall", "exists", "let", "max"];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone)]
struct Node {
    pos: Pos,
    kind: Surface,
}

#[derive(Debug, Clone)]
enum Surface {
    True,
    False,
    Ident(String),
    Int(i64),
    Or(Box<Node>, Box<Node>),
    And(Box<Node>, Box<Node>),
    Modal(ModalKind, String, Box<Node>),
    Fix(FixKind, String, Type, Box<Node>),
    Lambda(Vec<(String, Type)>, Box<Node>),
    Quant(QuantKind, Vec<String>, Vec<Node>, Box<Node>),
    App(Box<Node>, Vec<Node>),
    Tuple(Vec<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Scale(i64, Box<Node>),
    Cmp(CmpOp, Box<Node>, Box<Node>),
}

fn node(pos: Pos, kind: Surface) -> Node {
    Node { pos, kind }
}

fn lex_cursor(text: &str) -> Result<Cursor, ParseError> {
    let toks = lex(text).map_err(|e| syntax(e.pos, e.msg))?;
    Ok(Cursor::new(toks))
}

struct SurfaceParser {
    c: Cursor,
}

impl SurfaceParser {
    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.c.eat(&t) {
            Ok(())
        } else {
            Err(syntax(self.c.pos(), format!("expected {}, found {}", t, self.c.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.c.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.c.bump();
                Ok(s)
            }
            t => Err(syntax(self.c.pos(), format!("expected identifier, found {}", t))),
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let a = self.atype()?;
        if self.c.eat(&Tok::Arrow) {
            Ok(Type::arrow(a, self.ty()?))
        } else {
            Ok(a)
        }
    }

    fn atype(&mut self) -> Result<Type, ParseError> {
        let pos = self.c.pos();
        match self.c.bump() {
            Tok::Ident(s) if s == "prop" => Ok(Type::Prop),
            Tok::Ident(s) if s == "int" => Ok(Type::Int),
            Tok::LParen => {
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            t => Err(syntax(pos, format!("expected a type, found {}", t))),
        }
    }

    /// `ident : type`, reporting a missing annotation.
    fn typed_binder(&mut self) -> Result<(String, Type), ParseError> {
        let pos = self.c.pos();
        let x = self.ident()?;
        if !self.c.eat(&Tok::Colon) {
            return Err(ParseError::MissingAnnotation { pos, name: x });
        }
        Ok((x, self.ty()?))
    }

    fn formula(&mut self) -> Result<Node, ParseError> {
        self.or()
    }

    fn is_binder_start(&self) -> bool {
        matches!(self.c.peek(), Tok::Backslash)
            || self.c.is_kw("mu")
            || self.c.is_kw("nu")
            || self.c.is_kw("forall")
            || self.c.is_kw("exists")
    }

    fn binder(&mut self) -> Result<Node, ParseError> {
        let pos = self.c.pos();
        if self.c.eat(&Tok::Backslash) {
            let mut params = Vec::new();
            if self.c.eat(&Tok::LParen) {
                loop {
                    params.push(self.typed_binder()?);
                    if !self.c.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            } else {
                params.push(self.typed_binder()?);
            }
            self.expect(Tok::Dot)?;
            let body = self.formula()?;
            return Ok(node(pos, Surface::Lambda(params, Box::new(body))));
        }
        if self.c.is_kw("mu") || self.c.is_kw("nu") {
            let kind = if self.c.eat_kw("mu") {
                FixKind::Mu
            } else {
                self.c.bump();
                FixKind::Nu
            };
            let (x, t) = self.typed_binder()?;
            self.expect(Tok::Dot)?;
            let body = self.formula()?;
            return Ok(node(pos, Surface::Fix(kind, x, t, Box::new(body))));
        }
        let kind = if self.c.eat_kw("forall") {
            QuantKind::Forall
        } else if self.c.eat_kw("exists") {
            QuantKind::Exists
        } else {
            return Err(syntax(pos, "expected a binder"));
        };
        let mut vars = vec![self.ident()?];
        while self.c.eat(&Tok::Comma) {
            vars.push(self.ident()?);
        }
        // Integer quantifiers carry no annotation; tolerate `: int`.
        if self.c.eat(&Tok::Colon) {
            let tpos = self.c.pos();
            if self.ty()? != Type::Int {
                return Err(ParseError::Type {
                    pos: tpos,
                    msg: "quantifiers range over integers only".into(),
                });
            }
        }
        let mut lower = Vec::new();
        if self.c.eat(&Tok::Ge) {
            if self.c.eat_kw("max") {
                self.expect(Tok::LParen)?;
                loop {
                    lower.push(self.sum()?);
                    if !self.c.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            } else {
                lower.push(self.sum()?);
            }
        }
        self.expect(Tok::Dot)?;
        let body = self.formula()?;
        Ok(node(pos, Surface::Quant(kind, vars, lower, Box::new(body))))
    }

    fn or(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.and()?;
        while matches!(self.c.peek(), Tok::Or) {
            let pos = self.c.pos();
            self.c.bump();
            let rhs = self.and()?;
            lhs = node(pos, Surface::Or(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.cmp()?;
        while matches!(self.c.peek(), Tok::And) {
            let pos = self.c.pos();
            self.c.bump();
            let rhs = self.cmp()?;
            lhs = node(pos, Surface::And(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.c.peek() {
            Tok::Le => CmpOp::Le,
            Tok::LAngle => CmpOp::Lt,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Ge => CmpOp::Ge,
            Tok::RAngle => CmpOp::Gt,
            _ => return None,
        })
    }

    fn cmp(&mut self) -> Result<Node, ParseError> {
        let lhs = self.sum()?;
        if let Some(op) = self.cmp_op() {
            let pos = self.c.pos();
            self.c.bump();
            let rhs = self.sum()?;
            if self.cmp_op().is_some() {
                return Err(syntax(self.c.pos(), "comparisons do not chain"));
            }
            return Ok(node(pos, Surface::Cmp(op, Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let pos = self.c.pos();
            if self.c.eat(&Tok::Plus) {
                let rhs = self.product()?;
                lhs = node(pos, Surface::Add(Box::new(lhs), Box::new(rhs)));
            } else if self.c.eat(&Tok::Minus) {
                let rhs = self.product()?;
                lhs = node(pos, Surface::Sub(Box::new(lhs), Box::new(rhs)));
            } else {
                return Ok(lhs);
            }
        }
    }

    /// Multiplication is accepted only by an integer literal.
    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while matches!(self.c.peek(), Tok::Star) {
            let pos = self.c.pos();
            self.c.bump();
            let rhs = self.unary()?;
            lhs = match (&lhs.kind, &rhs.kind) {
                (Surface::Int(k), _) => node(pos, Surface::Scale(*k, Box::new(rhs))),
                (_, Surface::Int(k)) => node(pos, Surface::Scale(*k, Box::new(lhs))),
                _ => {
                    return Err(ParseError::NonLinear {
                        pos,
                        msg: "multiplication of two variables is not linear; \
                              encode it with a ternary predicate such as \
                              mult = mu u: int -> int -> int -> prop. ..."
                            .into(),
                    })
                }
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        let pos = self.c.pos();
        if self.c.eat(&Tok::Minus) {
            let e = self.unary()?;
            return Ok(node(pos, Surface::Neg(Box::new(e))));
        }
        if matches!(self.c.peek(), Tok::LAngle) {
            self.c.bump();
            let a = self.ident()?;
            self.expect(Tok::RAngle)?;
            let body = self.unary()?;
            return Ok(node(pos, Surface::Modal(ModalKind::Diamond, a, Box::new(body))));
        }
        if matches!(self.c.peek(), Tok::LBracket) {
            self.c.bump();
            let a = self.ident()?;
            self.expect(Tok::RBracket)?;
            let body = self.unary()?;
            return Ok(node(pos, Surface::Modal(ModalKind::Box, a, Box::new(body))));
        }
        if self.is_binder_start() {
            return self.binder();
        }
        self.app()
    }

    fn starts_primary(&self) -> bool {
        match self.c.peek() {
            Tok::Ident(s) => {
                !matches!(s.as_str(), "mu" | "nu" | "forall" | "exists" | "let" | "max")
            }
            Tok::Int(_) | Tok::LParen => true,
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Node, ParseError> {
        let pos = self.c.pos();
        let head = self.primary()?;
        let mut args = Vec::new();
        while self.starts_primary() {
            args.push(self.primary()?);
        }
        if args.is_empty() {
            Ok(head)
        } else {
            Ok(node(pos, Surface::App(Box::new(head), args)))
        }
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let pos = self.c.pos();
        match self.c.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.c.bump();
                Ok(node(pos, Surface::True))
            }
            Tok::Ident(s) if s == "false" => {
                self.c.bump();
                Ok(node(pos, Surface::False))
            }
            Tok::Ident(_) => Ok(node(pos, Surface::Ident(self.ident()?))),
            Tok::Int(n) => {
                self.c.bump();
                Ok(node(pos, Surface::Int(n)))
            }
            Tok::LParen => {
                self.c.bump();
                let first = self.formula()?;
                if self.c.eat(&Tok::Comma) {
                    let mut items = vec![first];
                    loop {
                        items.push(self.formula()?);
                        if !self.c.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(node(pos, Surface::Tuple(items)))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            t => Err(syntax(pos, format!("expected a formula, found {}", t))),
        }
    }
}

enum Elab {
    F(Formula, Type),
    I(IntExpr),
}

struct Elaborator {
    scope: Vec<(String, Name, Type)>,
    used: HashSet<String>,
    defs: HashMap<String, (Formula, Type)>,
}

fn type_err(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::Type { pos, msg: msg.into() }
}

impl Elaborator {
    fn new(env: &TypeEnv) -> Self {
        let mut scope = Vec::new();
        let mut used = HashSet::new();
        let mut names: Vec<_> = env.iter().collect();
        names.sort_by(|a, b| a.0.cmp(b.0));
        for (n, t) in names {
            scope.push((n.as_str().to_string(), n.clone(), t.clone()));
            used.insert(n.as_str().to_string());
        }
        Elaborator { scope, used, defs: HashMap::new() }
    }

    /// Internal name for a binder: the source name when still unused,
    /// a fresh one otherwise.
    fn bind(&mut self, src: &str) -> Name {
        if self.used.insert(src.to_string()) {
            Name::new(src)
        } else {
            Name::fresh(src)
        }
    }

    fn lookup(&self, src: &str) -> Option<&(String, Name, Type)> {
        self.scope.iter().rev().find(|(s, _, _)| s == src)
    }

    fn formula(&mut self, n: &Node) -> Result<(Formula, Type), ParseError> {
        match self.elab(n)? {
            Elab::F(f, t) => Ok((f, t)),
            Elab::I(_) => Err(type_err(n.pos, "integer expression where a formula is expected")),
        }
    }

    fn prop(&mut self, n: &Node) -> Result<Formula, ParseError> {
        let (f, t) = self.formula(n)?;
        if t != Type::Prop {
            return Err(type_err(n.pos, format!("expected type prop, found {}", t)));
        }
        Ok(f)
    }

    fn int(&mut self, n: &Node) -> Result<IntExpr, ParseError> {
        match self.elab(n)? {
            Elab::I(e) => Ok(e),
            Elab::F(_, t) => Err(type_err(
                n.pos,
                format!("expected an integer expression, found a formula of type {}", t),
            )),
        }
    }

    fn elab(&mut self, n: &Node) -> Result<Elab, ParseError> {
        Ok(match &n.kind {
            Surface::True => Elab::F(Formula::True, Type::Prop),
            Surface::False => Elab::F(Formula::False, Type::Prop),
            Surface::Int(k) => Elab::I(IntExpr::Const(*k)),
            Surface::Ident(s) => {
                if let Some((_, name, t)) = self.lookup(s) {
                    if *t == Type::Int {
                        Elab::I(IntExpr::Var(name.clone()))
                    } else {
                        Elab::F(Formula::Var(name.clone()), t.clone())
                    }
                } else if let Some((f, t)) = self.defs.get(s) {
                    Elab::F(freshen(f), t.clone())
                } else {
                    return Err(ParseError::Unbound { pos: n.pos, name: s.clone() });
                }
            }
            Surface::Or(a, b) => Elab::F(Formula::or(self.prop(a)?, self.prop(b)?), Type::Prop),
            Surface::And(a, b) => Elab::F(Formula::and(self.prop(a)?, self.prop(b)?), Type::Prop),
            Surface::Modal(k, a, b) => {
                Elab::F(Formula::Modal(*k, Name::new(a), Box::new(self.prop(b)?)), Type::Prop)
            }
            Surface::Fix(k, x, t, body) => {
                if !t.is_predicate() {
                    return Err(type_err(
                        n.pos,
                        format!("fixpoint binder `{}` must have a predicate type, not {}", x, t),
                    ));
                }
                let name = self.bind(x);
                self.scope.push((x.clone(), name.clone(), t.clone()));
                let res = self.formula(body);
                self.scope.pop();
                let (b, bt) = res?;
                if bt != *t {
                    return Err(type_err(
                        body.pos,
                        format!("body of `{}` has type {}, expected {}", x, bt, t),
                    ));
                }
                Elab::F(Formula::Fix(*k, name, t.clone(), Box::new(b)), t.clone())
            }
            Surface::Lambda(params, body) => {
                let mut names = Vec::new();
                for (x, t) in params {
                    if !t.is_well_formed() {
                        return Err(type_err(n.pos, format!("ill-formed type {}", t)));
                    }
                    let name = self.bind(x);
                    self.scope.push((x.clone(), name.clone(), t.clone()));
                    names.push((name, t.clone()));
                }
                let res = self.formula(body);
                self.scope.truncate(self.scope.len() - params.len());
                let (mut f, mut t) = res?;
                for (name, pt) in names.into_iter().rev() {
                    t = Type::arrow(pt.clone(), t);
                    f = Formula::Lambda(name, pt, Box::new(f));
                }
                Elab::F(f, t)
            }
            Surface::Quant(k, vars, lower, body) => {
                // bounds see the earlier variables of the group
                let mut bounds = Vec::new();
                let mut names = Vec::new();
                for (i, x) in vars.iter().enumerate() {
                    if i + 1 == vars.len() {
                        for b in lower {
                            match self.int(b) {
                                Ok(e) => bounds.push(e),
                                Err(e) => {
                                    self.scope.truncate(self.scope.len() - i);
                                    return Err(e);
                                }
                            }
                        }
                    }
                    let name = self.bind(x);
                    self.scope.push((x.clone(), name.clone(), Type::Int));
                    names.push(name);
                }
                let res = self.prop(body);
                self.scope.truncate(self.scope.len() - vars.len());
                let mut f = res?;
                // Bounds attach to the last variable of `forall x, y >= b.`
                let last = names.len() - 1;
                for (i, name) in names.into_iter().enumerate().rev() {
                    let lb = if i == last { std::mem::take(&mut bounds) } else { Vec::new() };
                    f = Formula::Quant(*k, name, lb, Box::new(f));
                }
                Elab::F(f, Type::Prop)
            }
            Surface::App(head, args) => {
                let (mut f, mut t) = self.formula(head)?;
                for a in args {
                    let items: Vec<&Node> = match &a.kind {
                        Surface::Tuple(items) => items.iter().collect(),
                        _ => vec![a],
                    };
                    for item in items {
                        let (param, result) = match t {
                            Type::Arrow(p, r) => (*p, *r),
                            other => {
                                return Err(type_err(
                                    item.pos,
                                    format!("cannot apply a formula of type {}", other),
                                ))
                            }
                        };
                        f = if param == Type::Int {
                            Formula::app(f, self.int(item)?)
                        } else {
                            let (g, gt) = self.formula(item)?;
                            if gt != param {
                                return Err(type_err(
                                    item.pos,
                                    format!("argument has type {}, expected {}", gt, param),
                                ));
                            }
                            Formula::app(f, g)
                        };
                        t = result;
                    }
                }
                Elab::F(f, t)
            }
            Surface::Tuple(_) => {
                return Err(syntax(n.pos, "tuples are only allowed as application arguments"))
            }
            Surface::Add(a, b) => Elab::I(IntExpr::add(self.int(a)?, self.int(b)?)),
            Surface::Sub(a, b) => Elab::I(IntExpr::sub(self.int(a)?, self.int(b)?)),
            Surface::Neg(a) => Elab::I(IntExpr::neg(self.int(a)?)),
            Surface::Scale(k, a) => Elab::I(scale(n.pos, *k, self.int(a)?)?),
            Surface::Cmp(op, a, b) => {
                Elab::F(Formula::Atom(LinearAtom::new(*op, self.int(a)?, self.int(b)?)), Type::Prop)
            }
        })
    }
}

const MAX_SCALE: i64 = 1024;
const MAX_SCALED_SIZE: usize = 1 << 14;

fn size(e: &IntExpr) -> usize {
    match e {
        IntExpr::Const(_) | IntExpr::Var(_) => 1,
        IntExpr::Neg(a) => 1 + size(a),
        IntExpr::Add(a, b) | IntExpr::Sub(a, b) => 1 + size(a) + size(b),
    }
}

fn scale(pos: Pos, k: i64, e: IntExpr) -> Result<IntExpr, ParseError> {
    if k.unsigned_abs() > MAX_SCALE as u64 {
        return Err(ParseError::NonLinear {
            pos,
            msg: format!("scaling constant {} exceeds {}", k, MAX_SCALE),
        });
    }
    if k == 0 {
        return Ok(IntExpr::Const(0));
    }
    if let IntExpr::Const(c) = e {
        return c.checked_mul(k).map(IntExpr::Const).ok_or_else(|| ParseError::NonLinear {
            pos,
            msg: format!("{} * {} overflows", k, c),
        });
    }
    // k * e is spelled as a sum, so nested scalings multiply in size
    if size(&e).saturating_mul(k.unsigned_abs() as usize) > MAX_SCALED_SIZE {
        return Err(ParseError::NonLinear { pos, msg: "scaled expression is too large".into() });
    }
    let mut acc = e.clone();
    for _ in 1..k.abs() {
        acc = IntExpr::add(acc, e.clone());
    }
    Ok(if k < 0 { IntExpr::neg(acc) } else { acc })
}

/// Renames every binder of `f` to a fresh name.
fn freshen(f: &Formula) -> Formula {
    super::subst::freshen_binders(f)
}

/// Parses a closed formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_in(text, &TypeEnv::new())
}

/// Parses a formula whose free variables are typed by `env`.
pub fn parse_formula_in(text: &str, env: &TypeEnv) -> Result<Formula, ParseError> {
    let c = lex_cursor(text)?;
    let mut p = SurfaceParser { c };
    let mut el = Elaborator::new(env);
    while p.c.eat_kw("let") {
        let pos = p.c.pos();
        let name = p.ident()?;
        p.expect(Tok::Eq)?;
        let body = p.formula()?;
        p.expect(Tok::Semi)?;
        let (f, t) = el.formula(&body)?;
        if el.defs.insert(name.clone(), (f, t)).is_some() {
            return Err(syntax(pos, format!("`{}` is defined twice", name)));
        }
    }
    let top = p.formula()?;
    if !p.c.at_eof() {
        return Err(syntax(p.c.pos(), format!("unexpected {}", p.c.peek())));
    }
    let (f, _) = el.formula(&top)?;
    Ok(f)
}

/// Parses a standalone integer expression; every identifier is an integer
/// variable.
pub fn parse_int_expr(text: &str) -> Result<IntExpr, ParseError> {
    let mut c = lex_cursor(text)?;
    let e = int_expr(&mut c)?;
    if !c.at_eof() {
        return Err(syntax(c.pos(), format!("unexpected {}", c.peek())));
    }
    Ok(e)
}

/// Untyped integer expression over a shared cursor (used by the bound,
/// predicate and program parsers).
pub(crate) fn int_expr(c: &mut Cursor) -> Result<IntExpr, ParseError> {
    let mut lhs = int_term(c)?;
    loop {
        if c.eat(&Tok::Plus) {
            lhs = IntExpr::add(lhs, int_term(c)?);
        } else if c.eat(&Tok::Minus) {
            lhs = IntExpr::sub(lhs, int_term(c)?);
        } else {
            return Ok(lhs);
        }
    }
}

fn int_term(c: &mut Cursor) -> Result<IntExpr, ParseError> {
    let lhs = int_unary(c)?;
    if matches!(c.peek(), Tok::Star) {
        let pos = c.pos();
        c.bump();
        let rhs = int_unary(c)?;
        return match (&lhs, &rhs) {
            (IntExpr::Const(k), _) => scale(pos, *k, rhs),
            (_, IntExpr::Const(k)) => scale(pos, *k, lhs),
            _ => Err(ParseError::NonLinear {
                pos,
                msg: "multiplication of two variables is not linear".into(),
            }),
        };
    }
    Ok(lhs)
}

fn int_unary(c: &mut Cursor) -> Result<IntExpr, ParseError> {
    let pos = c.pos();
    match c.bump() {
        Tok::Minus => Ok(IntExpr::neg(int_unary(c)?)),
        Tok::Int(k) => Ok(IntExpr::Const(k)),
        Tok::Ident(s) if !is_keyword(&s) => Ok(IntExpr::Var(Name::new(&s))),
        Tok::LParen => {
            let e = int_expr(c)?;
            if !c.eat(&Tok::RParen) {
                return Err(syntax(c.pos(), format!("expected `)`, found {}", c.peek())));
            }
            Ok(e)
        }
        t => Err(syntax(pos, format!("expected an integer expression, found {}", t))),
    }
}

pub(crate) fn cmp_op(c: &mut Cursor) -> Result<CmpOp, ParseError> {
    let pos = c.pos();
    Ok(match c.bump() {
        Tok::Le => CmpOp::Le,
        Tok::LAngle => CmpOp::Lt,
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        Tok::Ge => CmpOp::Ge,
        Tok::RAngle => CmpOp::Gt,
        t => return Err(syntax(pos, format!("expected a comparison, found {}", t))),
    })
}

/// Untyped linear atom `e CMP e`.
pub(crate) fn linear_atom(c: &mut Cursor) -> Result<LinearAtom, ParseError> {
    let lhs = int_expr(c)?;
    let op = cmp_op(c)?;
    let rhs = int_expr(c)?;
    Ok(LinearAtom::new(op, lhs, rhs))
}

pub(crate) fn cursor(text: &str) -> Result<Cursor, ParseError> {
    lex_cursor(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(parse_formula("true").unwrap(), Formula::True);
        assert_eq!(parse_formula(" false # comment").unwrap(), Formula::False);
    }

    #[test]
    fn nu_with_lambda_body() {
        let f = parse_formula("nu x: (int -> prop). \\y:int. y <= 0 \\/ x (y+1)").unwrap();
        let Formula::Fix(FixKind::Nu, x, t, body) = f else { panic!("not a nu") };
        assert_eq!(x.as_str(), "x");
        assert_eq!(t, Type::arrow(Type::Int, Type::Prop));
        assert!(matches!(*body, Formula::Lambda(..)));
    }

    #[test]
    fn tuples_are_curried() {
        let f = parse_formula(
            "mu u: int -> int -> prop. \\(x:int, y:int). y = 0 \\/ u (x, y - 1)",
        )
        .unwrap();
        let Formula::Fix(_, _, _, body) = &f else { panic!() };
        let (params, inner) = body.lambdas();
        assert_eq!(params.len(), 2);
        let Formula::Or(_, rhs) = inner else { panic!() };
        assert_eq!(rhs.spine().1.len(), 2);
    }

    #[test]
    fn application_binds_tighter_than_modalities() {
        let f = parse_formula("(\\k: prop -> prop. <a> k (<b> true)) (\\z: prop. z)").unwrap();
        let (head, args) = f.spine();
        assert_eq!(args.len(), 1);
        let (_, body) = head.lambdas();
        let Formula::Modal(ModalKind::Diamond, a, inner) = body else { panic!() };
        assert_eq!(a.as_str(), "a");
        assert!(matches!(**inner, Formula::App(..)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("true \\/\n  (").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { .. }));
        assert_eq!(e.pos().line, 2);

        let e = parse_formula("x \\/ true").unwrap_err();
        assert_eq!(e, ParseError::Unbound { pos: Pos { line: 1, col: 1 }, name: "x".into() });

        let e = parse_formula("mu x. x").unwrap_err();
        assert!(matches!(e, ParseError::MissingAnnotation { .. }));

        let e = parse_formula("\\x:int. \\y:int. x * y = 0").unwrap_err();
        assert!(matches!(e, ParseError::NonLinear { .. }));
        assert!(e.to_string().contains("mult"));
    }

    #[test]
    fn type_errors() {
        assert!(matches!(parse_formula("true 3"), Err(ParseError::Type { .. })));
        assert!(matches!(parse_formula("1 \\/ true"), Err(ParseError::Type { .. })));
        assert!(matches!(parse_formula("mu x: int. true"), Err(ParseError::Type { .. })));
    }

    #[test]
    fn nested_scaling_is_bounded() {
        assert_eq!(parse_formula("2 * 3 * x = 0").ok(), parse_formula("6 * x = 0").ok());
        let t = std::time::Instant::now();
        let deep = "3*1*035* 0*0*3*1*035* 0*0*11*05*03*111*05*03*10*03*5";
        assert!(parse_formula(deep).is_err());
        assert!(matches!(parse_formula("100 * 100 * x = 0"), Err(ParseError::NonLinear { .. })));
        assert!(t.elapsed().as_secs() < 2);
    }

    #[test]
    fn repeated_binder_names_are_renamed() {
        let f = parse_formula("(nu x: prop. x) /\\ (mu x: prop. x)").unwrap();
        let Formula::And(a, b) = f else { panic!() };
        let (Formula::Fix(_, x1, ..), Formula::Fix(_, x2, ..)) = (*a, *b) else { panic!() };
        assert_ne!(x1, x2);
        assert_eq!(x2.base(), "x");
    }

    #[test]
    fn bounded_quantifiers() {
        let f = parse_formula("forall i. forall u >= max(i+1, 1). u > i").unwrap();
        let Formula::Quant(QuantKind::Forall, _, lb, body) = f.clone() else { panic!() };
        assert!(lb.is_empty());
        let Formula::Quant(QuantKind::Forall, _, lb, _) = *body else { panic!() };
        assert_eq!(lb.len(), 2);
        let g = parse_formula("forall i, u >= max(i + 1, 1). u > i").unwrap();
        assert!(crate::syntax::alpha_eq(&f, &g));
        assert!(matches!(parse_formula("forall u >= u. true"), Err(ParseError::Unbound { .. })));
    }

    #[test]
    fn let_definitions_are_inlined() {
        let f = parse_formula(
            "let Even = mu x: int -> prop. \\y:int. y = 0 \\/ x (y - 2);\n Even 4 /\\ Even 2",
        )
        .unwrap();
        let Formula::And(a, b) = f else { panic!() };
        let (Formula::Fix(_, x1, ..), Formula::Fix(_, x2, ..)) = (a.spine().0, b.spine().0) else {
            panic!()
        };
        assert_ne!(x1, x2);
    }

    #[test]
    fn literal_scaling_is_linear() {
        let e = parse_int_expr("2 * x - 1").unwrap();
        assert_eq!(e.eval(&|_| Some(5)), Some(9));
    }
}
