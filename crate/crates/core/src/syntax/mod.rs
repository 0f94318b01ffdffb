//! Abstract syntax of HFL(Z) formulas, simple types and linear integer
//! expressions, together with parsing, printing, typing and the basic
//! rewriting steps (substitution, unfolding, β-reduction, dualization).

mod dual;
pub(crate) mod lexer;
pub(crate) mod linear;
pub(crate) mod parser;
mod printer;
pub(crate) mod subst;
mod typing;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

pub use dual::dualize;
pub use lexer::Pos;
pub use linear::LinearForm;
pub use parser::{parse_formula, parse_formula_in, parse_int_expr, ParseError};
pub use printer::{print_formula, print_int_expr};
pub use subst::{
    alpha_eq, beta_normalize, beta_step, beta_step_anywhere, free_vars, substitute,
    substitute_typed, unfold_fixpoint, unfold_head, unfold_leftmost, RewriteError,
};
pub use typing::{order_of, typecheck, typecheck_closed, TypeEnv, TypeError};

/// An identifier. Binders introduced by renaming carry a `#n` suffix that
/// the printer strips again.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

static FRESH: AtomicUsize = AtomicUsize::new(0);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    /// A globally unique name derived from `base`.
    pub fn fresh(base: &str) -> Self {
        let n = FRESH.fetch_add(1, Ordering::Relaxed);
        Name(Arc::from(format!("{}#{}", strip_suffix(base), n)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The user-facing part of the name.
    pub fn base(&self) -> &str {
        strip_suffix(&self.0)
    }
}

fn strip_suffix(s: &str) -> &str {
    match s.find('#') {
        Some(i) => &s[..i],
        None => s,
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// Simple types: `prop`, `int` and arrows. Arrow chains end in `prop`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Type {
    Prop,
    Int,
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn arrow(arg: Type, result: Type) -> Type {
        Type::Arrow(Box::new(arg), Box::new(result))
    }

    /// `a1 -> a2 -> ... -> prop`
    pub fn predicate(args: impl IntoIterator<Item = Type>) -> Type {
        let args: Vec<Type> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(Type::Prop, |acc, a| Type::arrow(a, acc))
    }

    /// Predicate types are `prop` and arrows whose result chain ends in `prop`.
    pub fn is_predicate(&self) -> bool {
        match self {
            Type::Prop => true,
            Type::Int => false,
            Type::Arrow(a, r) => a.is_well_formed() && r.is_predicate(),
        }
    }

    pub fn is_well_formed(&self) -> bool {
        matches!(self, Type::Int) || self.is_predicate()
    }

    /// Argument types of a predicate type, outermost first.
    pub fn params(&self) -> Vec<&Type> {
        let mut out = Vec::new();
        let mut t = self;
        while let Type::Arrow(a, r) = t {
            out.push(a.as_ref());
            t = r;
        }
        out
    }

    pub fn order(&self) -> usize {
        order_of(self)
    }

    /// True when every parameter is `int` (the CHC-compatible shape).
    pub fn is_int_predicate(&self) -> bool {
        self.params().iter().all(|t| **t == Type::Int)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Prop => f.write_str("prop"),
            Type::Int => f.write_str("int"),
            Type::Arrow(a, r) => {
                if matches!(**a, Type::Arrow(..)) {
                    write!(f, "({}) -> {}", a, r)
                } else {
                    write!(f, "{} -> {}", a, r)
                }
            }
        }
    }
}

/// Linear integer expressions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum IntExpr {
    Const(i64),
    Var(Name),
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Neg(Box<IntExpr>),
}

impl IntExpr {
    pub fn var(n: impl Into<Name>) -> Self {
        IntExpr::Var(n.into())
    }

    pub fn add(a: IntExpr, b: IntExpr) -> Self {
        IntExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: IntExpr, b: IntExpr) -> Self {
        IntExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn neg(a: IntExpr) -> Self {
        IntExpr::Neg(Box::new(a))
    }

    /// `self + k`, printed as a subtraction when `k` is negative.
    pub fn offset(self, k: i64) -> Self {
        match k {
            0 => self,
            k if k > 0 => IntExpr::add(self, IntExpr::Const(k)),
            k => IntExpr::sub(self, IntExpr::Const(-k)),
        }
    }

    pub fn vars(&self, out: &mut Vec<Name>) {
        match self {
            IntExpr::Const(_) => {}
            IntExpr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            IntExpr::Neg(a) => a.vars(out),
        }
    }

    /// Evaluates under `lookup`; `None` if a variable is unbound.
    pub fn eval(&self, lookup: &dyn Fn(&Name) -> Option<i64>) -> Option<i64> {
        Some(match self {
            IntExpr::Const(c) => *c,
            IntExpr::Var(v) => lookup(v)?,
            IntExpr::Add(a, b) => a.eval(lookup)?.checked_add(b.eval(lookup)?)?,
            IntExpr::Sub(a, b) => a.eval(lookup)?.checked_sub(b.eval(lookup)?)?,
            IntExpr::Neg(a) => a.eval(lookup)?.checked_neg()?,
        })
    }

    pub fn rename(&self, from: &Name, to: &IntExpr) -> IntExpr {
        match self {
            IntExpr::Var(v) if v == from => to.clone(),
            IntExpr::Const(_) | IntExpr::Var(_) => self.clone(),
            IntExpr::Add(a, b) => IntExpr::add(a.rename(from, to), b.rename(from, to)),
            IntExpr::Sub(a, b) => IntExpr::sub(a.rename(from, to), b.rename(from, to)),
            IntExpr::Neg(a) => IntExpr::neg(a.rename(from, to)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CmpOp {
    Le,
    Lt,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];

    /// The complementary comparison: `a op b` fails iff `a op.negate() b` holds.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// A single comparison between linear expressions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LinearAtom {
    pub op: CmpOp,
    pub lhs: IntExpr,
    pub rhs: IntExpr,
}

impl LinearAtom {
    pub fn new(op: CmpOp, lhs: IntExpr, rhs: IntExpr) -> Self {
        LinearAtom { op, lhs, rhs }
    }

    pub fn negate(&self) -> LinearAtom {
        LinearAtom::new(self.op.negate(), self.lhs.clone(), self.rhs.clone())
    }

    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.lhs.vars(&mut out);
        self.rhs.vars(&mut out);
        out
    }

    pub fn eval(&self, lookup: &dyn Fn(&Name) -> Option<i64>) -> Option<bool> {
        Some(self.op.holds(self.lhs.eval(lookup)?, self.rhs.eval(lookup)?))
    }

    pub fn rename(&self, from: &Name, to: &IntExpr) -> LinearAtom {
        LinearAtom::new(self.op, self.lhs.rename(from, to), self.rhs.rename(from, to))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FixKind {
    Mu,
    Nu,
}

impl FixKind {
    pub fn dual(self) -> Self {
        match self {
            FixKind::Mu => FixKind::Nu,
            FixKind::Nu => FixKind::Mu,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ModalKind {
    Diamond,
    Box,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum QuantKind {
    Exists,
    Forall,
}

/// Formulas in negation normal form.
///
/// `Quant` is surface sugar for integer quantifiers (`forall x >= b. φ`);
/// `lower` holds the lower bounds (all must hold), empty for an unbounded
/// quantifier. `desugar_quantifiers` turns it into fixpoints.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Var(Name),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Modal(ModalKind, Name, Box<Formula>),
    Fix(FixKind, Name, Type, Box<Formula>),
    Lambda(Name, Type, Box<Formula>),
    App(Box<Formula>, Arg),
    Atom(LinearAtom),
    Quant(QuantKind, Name, Vec<IntExpr>, Box<Formula>),
}

/// Argument of an application: a formula or an integer expression.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Arg {
    Formula(Box<Formula>),
    Int(IntExpr),
}

impl Arg {
    pub fn formula(f: Formula) -> Self {
        Arg::Formula(Box::new(f))
    }
}

impl From<IntExpr> for Arg {
    fn from(e: IntExpr) -> Self {
        Arg::Int(e)
    }
}

impl From<Formula> for Arg {
    fn from(f: Formula) -> Self {
        Arg::formula(f)
    }
}

impl Formula {
    pub fn var(n: impl Into<Name>) -> Self {
        Formula::Var(n.into())
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Self {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    pub fn diamond(label: impl Into<Name>, body: Formula) -> Self {
        Formula::Modal(ModalKind::Diamond, label.into(), Box::new(body))
    }

    pub fn boxed(label: impl Into<Name>, body: Formula) -> Self {
        Formula::Modal(ModalKind::Box, label.into(), Box::new(body))
    }

    pub fn mu(x: impl Into<Name>, ty: Type, body: Formula) -> Self {
        Formula::Fix(FixKind::Mu, x.into(), ty, Box::new(body))
    }

    pub fn nu(x: impl Into<Name>, ty: Type, body: Formula) -> Self {
        Formula::Fix(FixKind::Nu, x.into(), ty, Box::new(body))
    }

    pub fn lambda(x: impl Into<Name>, ty: Type, body: Formula) -> Self {
        Formula::Lambda(x.into(), ty, Box::new(body))
    }

    pub fn app(f: Formula, arg: impl Into<Arg>) -> Self {
        Formula::App(Box::new(f), arg.into())
    }

    pub fn apps(f: Formula, args: impl IntoIterator<Item = Arg>) -> Self {
        args.into_iter()
            .fold(f, |acc, a| Formula::App(Box::new(acc), a))
    }

    pub fn atom(op: CmpOp, lhs: IntExpr, rhs: IntExpr) -> Self {
        Formula::Atom(LinearAtom::new(op, lhs, rhs))
    }

    pub fn forall(x: impl Into<Name>, body: Formula) -> Self {
        Formula::Quant(QuantKind::Forall, x.into(), Vec::new(), Box::new(body))
    }

    pub fn exists(x: impl Into<Name>, body: Formula) -> Self {
        Formula::Quant(QuantKind::Exists, x.into(), Vec::new(), Box::new(body))
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Formula, Vec<&Arg>) {
        let mut args = Vec::new();
        let mut f = self;
        while let Formula::App(h, a) = f {
            args.push(a);
            f = h;
        }
        args.reverse();
        (f, args)
    }

    /// Strips a λ chain, returning binders and the innermost body.
    pub fn lambdas(&self) -> (Vec<(&Name, &Type)>, &Formula) {
        let mut params = Vec::new();
        let mut f = self;
        while let Formula::Lambda(x, t, b) = f {
            params.push((x, t));
            f = b;
        }
        (params, f)
    }

    /// Pre-order visit of every subformula.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => {}
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Modal(_, _, b)
            | Formula::Fix(_, _, _, b)
            | Formula::Lambda(_, _, b)
            | Formula::Quant(_, _, _, b) => b.visit(f),
            Formula::App(h, a) => {
                h.visit(f);
                if let Arg::Formula(a) = a {
                    a.visit(f);
                }
            }
        }
    }

    pub fn any(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        let mut found = false;
        self.visit(&mut |g| found |= pred(g));
        found
    }

    /// No integer expressions, atoms or integer quantifiers.
    pub fn is_pure(&self) -> bool {
        !self.any(&|g| match g {
            Formula::Atom(_) | Formula::Quant(..) => true,
            Formula::App(_, Arg::Int(_)) => true,
            Formula::Fix(_, _, t, _) | Formula::Lambda(_, t, _) => type_mentions_int(t),
            _ => false,
        })
    }

    pub fn has_modalities(&self) -> bool {
        self.any(&|g| matches!(g, Formula::Modal(..)))
    }

    pub fn has_mu(&self) -> bool {
        self.any(&|g| matches!(g, Formula::Fix(FixKind::Mu, ..)))
    }

    pub fn has_quantifiers(&self) -> bool {
        self.any(&|g| matches!(g, Formula::Quant(..)))
    }

    pub fn has_forall(&self) -> bool {
        self.any(&|g| matches!(g, Formula::Quant(QuantKind::Forall, ..)))
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

pub(crate) fn type_mentions_int(t: &Type) -> bool {
    match t {
        Type::Int => true,
        Type::Prop => false,
        Type::Arrow(a, r) => type_mentions_int(a) || type_mentions_int(r),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_int_expr(self))
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}
