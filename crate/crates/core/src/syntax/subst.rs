use std::collections::BTreeSet;

use thiserror::Error;

use super::linear::{canonical_atom, LinearForm};
use super::typing::{typecheck, TypeEnv, TypeError};
use super::{Arg, Formula, IntExpr, LinearAtom, Name};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("not a fixpoint")]
    NotAFixpoint,
    #[error("no redex")]
    NoRedex,
    #[error("type mismatch substituting for `{var}`: {msg}")]
    TypeMismatch { var: String, msg: String },
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Free formula and integer variables.
pub fn free_vars(f: &Formula) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(f, &mut Vec::new(), &mut out);
    out
}

fn collect_int(e: &IntExpr, bound: &[Name], out: &mut BTreeSet<Name>) {
    let mut vs = Vec::new();
    e.vars(&mut vs);
    for v in vs {
        if !bound.contains(&v) {
            out.insert(v);
        }
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Formula::Atom(a) => {
            collect_int(&a.lhs, bound, out);
            collect_int(&a.rhs, bound, out);
        }
        Formula::Or(a, b) | Formula::And(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::Modal(_, _, b) => collect_free(b, bound, out),
        Formula::App(h, a) => {
            collect_free(h, bound, out);
            match a {
                Arg::Int(e) => collect_int(e, bound, out),
                Arg::Formula(g) => collect_free(g, bound, out),
            }
        }
        Formula::Fix(_, x, _, b) | Formula::Lambda(x, _, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        Formula::Quant(_, x, lb, b) => {
            for e in lb {
                collect_int(e, bound, out);
            }
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
    }
}

fn arg_free_vars(a: &Arg) -> BTreeSet<Name> {
    match a {
        Arg::Int(e) => {
            let mut out = BTreeSet::new();
            collect_int(e, &[], &mut out);
            out
        }
        Arg::Formula(g) => free_vars(g),
    }
}

/// Checks that `x` is never used at a kind (integer vs formula) other than
/// that of `psi`.
fn kind_conflict(f: &Formula, x: &Name, psi_is_int: bool) -> bool {
    let mut bad = false;
    f.visit(&mut |g| match g {
        Formula::Var(y) if y == x && psi_is_int => bad = true,
        Formula::Atom(a) if !psi_is_int => {
            if a.vars().contains(x) {
                bad = true
            }
        }
        Formula::App(_, Arg::Int(e)) if !psi_is_int => {
            let mut vs = Vec::new();
            e.vars(&mut vs);
            if vs.contains(x) {
                bad = true
            }
        }
        Formula::Quant(_, _, lb, _) if !psi_is_int => {
            for e in lb {
                let mut vs = Vec::new();
                e.vars(&mut vs);
                if vs.contains(x) {
                    bad = true
                }
            }
        }
        _ => {}
    });
    bad
}

/// Capture-avoiding substitution `phi[x := psi]`.
///
/// Fails when `x` occurs at a kind different from `psi` (integer position
/// vs formula position). Use [`substitute_typed`] to also compare simple
/// types.
pub fn substitute(phi: &Formula, x: &Name, psi: &Arg) -> Result<Formula, RewriteError> {
    let is_int = matches!(psi, Arg::Int(_));
    if kind_conflict(phi, x, is_int) {
        return Err(RewriteError::TypeMismatch {
            var: x.to_string(),
            msg: if is_int {
                "an integer replaces a formula variable".into()
            } else {
                "a formula replaces an integer variable".into()
            },
        });
    }
    Ok(subst(phi, x, psi))
}

/// `substitute` that also checks `psi`'s type against `env[x]`.
pub fn substitute_typed(
    phi: &Formula,
    x: &Name,
    psi: &Arg,
    env: &TypeEnv,
) -> Result<Formula, RewriteError> {
    let expected = env.get(x).ok_or_else(|| RewriteError::TypeMismatch {
        var: x.to_string(),
        msg: "variable has no type in the environment".into(),
    })?;
    let actual = match psi {
        Arg::Int(_) => super::Type::Int,
        Arg::Formula(g) => typecheck(g, env)?,
    };
    if *expected != actual {
        return Err(RewriteError::TypeMismatch {
            var: x.to_string(),
            msg: format!("expected {}, found {}", expected, actual),
        });
    }
    substitute(phi, x, psi)
}

/// Unchecked capture-avoiding substitution.
pub(crate) fn subst(phi: &Formula, x: &Name, psi: &Arg) -> Formula {
    let fv = arg_free_vars(psi);
    Subst { x, psi, fv: &fv }.go(phi)
}

struct Subst<'a> {
    x: &'a Name,
    psi: &'a Arg,
    fv: &'a BTreeSet<Name>,
}

impl Subst<'_> {
    fn int(&self, e: &IntExpr) -> IntExpr {
        match self.psi {
            Arg::Int(v) => e.rename(self.x, v),
            Arg::Formula(_) => e.clone(),
        }
    }

    /// Renames binder `y` away from the free variables of `psi`.
    fn avoid(&self, y: &Name, body: &Formula, y_is_int: bool) -> (Name, Formula) {
        if self.fv.contains(y) {
            let y2 = Name::fresh(y.base());
            let repl = if y_is_int {
                Arg::Int(IntExpr::Var(y2.clone()))
            } else {
                Arg::formula(Formula::Var(y2.clone()))
            };
            (y2, subst(body, y, &repl))
        } else {
            (y.clone(), body.clone())
        }
    }

    fn go(&self, f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Var(y) => match self.psi {
                Arg::Formula(g) if y == self.x => (**g).clone(),
                _ => f.clone(),
            },
            Formula::Atom(a) => {
                Formula::Atom(LinearAtom::new(a.op, self.int(&a.lhs), self.int(&a.rhs)))
            }
            Formula::Or(a, b) => Formula::or(self.go(a), self.go(b)),
            Formula::And(a, b) => Formula::and(self.go(a), self.go(b)),
            Formula::Modal(k, l, b) => Formula::Modal(*k, l.clone(), Box::new(self.go(b))),
            Formula::App(h, a) => {
                let a2 = match a {
                    Arg::Int(e) => Arg::Int(self.int(e)),
                    Arg::Formula(g) => Arg::formula(self.go(g)),
                };
                Formula::App(Box::new(self.go(h)), a2)
            }
            Formula::Fix(k, y, t, b) => {
                if y == self.x {
                    return f.clone();
                }
                let (y2, b2) = self.avoid(y, b, false);
                Formula::Fix(*k, y2, t.clone(), Box::new(self.go(&b2)))
            }
            Formula::Lambda(y, t, b) => {
                if y == self.x {
                    return f.clone();
                }
                let (y2, b2) = self.avoid(y, b, *t == super::Type::Int);
                Formula::Lambda(y2, t.clone(), Box::new(self.go(&b2)))
            }
            Formula::Quant(k, y, lb, b) => {
                let lb2: Vec<IntExpr> = lb.iter().map(|e| self.int(e)).collect();
                if y == self.x {
                    return Formula::Quant(*k, y.clone(), lb2, b.clone());
                }
                let (y2, b2) = self.avoid(y, b, true);
                Formula::Quant(*k, y2, lb2, Box::new(self.go(&b2)))
            }
        }
    }
}

/// Renames every binder in `f` to a fresh name.
pub(crate) fn freshen_binders(f: &Formula) -> Formula {
    let rebind = |y: &Name, body: &Formula, is_int: bool| {
        let y2 = Name::fresh(y.base());
        let repl = if is_int {
            Arg::Int(IntExpr::Var(y2.clone()))
        } else {
            Arg::formula(Formula::Var(y2.clone()))
        };
        (y2.clone(), freshen_binders(&subst(body, y, &repl)))
    };
    match f {
        Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => f.clone(),
        Formula::Or(a, b) => Formula::or(freshen_binders(a), freshen_binders(b)),
        Formula::And(a, b) => Formula::and(freshen_binders(a), freshen_binders(b)),
        Formula::Modal(k, l, b) => Formula::Modal(*k, l.clone(), Box::new(freshen_binders(b))),
        Formula::App(h, a) => {
            let a2 = match a {
                Arg::Int(e) => Arg::Int(e.clone()),
                Arg::Formula(g) => Arg::formula(freshen_binders(g)),
            };
            Formula::App(Box::new(freshen_binders(h)), a2)
        }
        Formula::Fix(k, y, t, b) => {
            let (y2, b2) = rebind(y, b, false);
            Formula::Fix(*k, y2, t.clone(), Box::new(b2))
        }
        Formula::Lambda(y, t, b) => {
            let (y2, b2) = rebind(y, b, *t == super::Type::Int);
            Formula::Lambda(y2, t.clone(), Box::new(b2))
        }
        Formula::Quant(k, y, lb, b) => {
            let (y2, b2) = rebind(y, b, true);
            Formula::Quant(*k, y2, lb.clone(), Box::new(b2))
        }
    }
}

/// `σx.φ  ↦  φ[x := σx.φ]`
pub fn unfold_fixpoint(f: &Formula) -> Result<Formula, RewriteError> {
    match f {
        Formula::Fix(_, x, _, body) => Ok(subst(body, x, &Arg::formula(f.clone()))),
        _ => Err(RewriteError::NotAFixpoint),
    }
}

/// Unfolds the fixpoint at the head of an application spine (or at the root).
pub fn unfold_head(f: &Formula) -> Result<Formula, RewriteError> {
    match f {
        Formula::App(h, a) => Ok(Formula::App(Box::new(unfold_head(h)?), a.clone())),
        _ => unfold_fixpoint(f),
    }
}

/// Unfolds the leftmost-outermost fixpoint that heads an application.
pub fn unfold_leftmost(f: &Formula) -> Result<Formula, RewriteError> {
    rewrite_leftmost(f, &|g| match g {
        Formula::App(..) if matches!(g.spine().0, Formula::Fix(..)) => unfold_head(g).ok(),
        _ => None,
    })
    .ok_or(RewriteError::NotAFixpoint)
}

/// One β-contraction at the root: `(λx.φ) ψ ↦ φ[x := ψ]`.
pub fn beta_step(f: &Formula) -> Result<Formula, RewriteError> {
    match f {
        Formula::App(h, a) => match h.as_ref() {
            Formula::Lambda(x, _, body) => Ok(subst(body, x, a)),
            _ => Err(RewriteError::NoRedex),
        },
        _ => Err(RewriteError::NoRedex),
    }
}

/// Contracts the leftmost-outermost β-redex anywhere in `f`.
pub fn beta_step_anywhere(f: &Formula) -> Result<Formula, RewriteError> {
    rewrite_leftmost(f, &|g| beta_step(g).ok()).ok_or(RewriteError::NoRedex)
}

/// Repeats `beta_step_anywhere` until no redex remains.
pub fn beta_normalize(f: &Formula) -> Formula {
    let mut cur = f.clone();
    while let Ok(next) = beta_step_anywhere(&cur) {
        cur = next;
    }
    cur
}

fn rewrite_leftmost(f: &Formula, step: &dyn Fn(&Formula) -> Option<Formula>) -> Option<Formula> {
    if let Some(g) = step(f) {
        return Some(g);
    }
    match f {
        Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => None,
        Formula::Or(a, b) => rewrite_leftmost(a, step)
            .map(|a2| Formula::or(a2, (**b).clone()))
            .or_else(|| rewrite_leftmost(b, step).map(|b2| Formula::or((**a).clone(), b2))),
        Formula::And(a, b) => rewrite_leftmost(a, step)
            .map(|a2| Formula::and(a2, (**b).clone()))
            .or_else(|| rewrite_leftmost(b, step).map(|b2| Formula::and((**a).clone(), b2))),
        Formula::Modal(k, l, b) => {
            rewrite_leftmost(b, step).map(|b2| Formula::Modal(*k, l.clone(), Box::new(b2)))
        }
        Formula::Fix(k, x, t, b) => rewrite_leftmost(b, step)
            .map(|b2| Formula::Fix(*k, x.clone(), t.clone(), Box::new(b2))),
        Formula::Lambda(x, t, b) => rewrite_leftmost(b, step)
            .map(|b2| Formula::Lambda(x.clone(), t.clone(), Box::new(b2))),
        Formula::Quant(k, x, lb, b) => rewrite_leftmost(b, step)
            .map(|b2| Formula::Quant(*k, x.clone(), lb.clone(), Box::new(b2))),
        Formula::App(h, a) => rewrite_leftmost(h, step)
            .map(|h2| Formula::App(Box::new(h2), a.clone()))
            .or_else(|| match a {
                Arg::Formula(g) => rewrite_leftmost(g, step)
                    .map(|g2| Formula::App(h.clone(), Arg::formula(g2))),
                Arg::Int(_) => None,
            }),
    }
}

/// α-equivalence, treating integer expressions and atoms up to linear
/// arithmetic normalization (`y+1-2` equals `y-1`, `y > 0` equals `y >= 1`).
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    Alpha { left: Vec::new(), right: Vec::new() }.eq(a, b)
}

struct Alpha {
    left: Vec<Name>,
    right: Vec<Name>,
}

fn canon(stack: &[Name], n: &Name) -> Name {
    match stack.iter().rposition(|m| m == n) {
        Some(i) => Name::new(&format!("${}", i)),
        None => n.clone(),
    }
}

impl Alpha {
    fn var(&self, x: &Name, y: &Name) -> bool {
        canon(&self.left, x) == canon(&self.right, y)
    }

    fn int(&self, x: &IntExpr, y: &IntExpr) -> bool {
        LinearForm::from_expr_with(x, &|n| canon(&self.left, n))
            == LinearForm::from_expr_with(y, &|n| canon(&self.right, n))
    }

    fn atom(&self, x: &LinearAtom, y: &LinearAtom) -> bool {
        canonical_atom(x, &|n| canon(&self.left, n)) == canonical_atom(y, &|n| canon(&self.right, n))
    }

    fn under(&mut self, x: &Name, y: &Name, a: &Formula, b: &Formula) -> bool {
        self.left.push(x.clone());
        self.right.push(y.clone());
        let r = self.eq(a, b);
        self.left.pop();
        self.right.pop();
        r
    }

    fn eq(&mut self, a: &Formula, b: &Formula) -> bool {
        match (a, b) {
            (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
            (Formula::Var(x), Formula::Var(y)) => self.var(x, y),
            (Formula::Atom(x), Formula::Atom(y)) => self.atom(x, y),
            (Formula::Or(a1, a2), Formula::Or(b1, b2))
            | (Formula::And(a1, a2), Formula::And(b1, b2)) => self.eq(a1, b1) && self.eq(a2, b2),
            (Formula::Modal(k1, l1, a1), Formula::Modal(k2, l2, b1)) => {
                k1 == k2 && l1 == l2 && self.eq(a1, b1)
            }
            (Formula::App(h1, x1), Formula::App(h2, x2)) => {
                self.eq(h1, h2)
                    && match (x1, x2) {
                        (Arg::Int(e1), Arg::Int(e2)) => self.int(e1, e2),
                        (Arg::Formula(g1), Arg::Formula(g2)) => self.eq(g1, g2),
                        _ => false,
                    }
            }
            (Formula::Fix(k1, x, t1, a1), Formula::Fix(k2, y, t2, b1)) => {
                k1 == k2 && t1 == t2 && self.under(x, y, a1, b1)
            }
            (Formula::Lambda(x, t1, a1), Formula::Lambda(y, t2, b1)) => {
                t1 == t2 && self.under(x, y, a1, b1)
            }
            (Formula::Quant(k1, x, l1, a1), Formula::Quant(k2, y, l2, b1)) => {
                k1 == k2
                    && l1.len() == l2.len()
                    && l1.iter().zip(l2).all(|(e1, e2)| self.int(e1, e2))
                    && self.under(x, y, a1, b1)
            }
            _ => false,
        }
    }
}
