use thiserror::Error;

use super::bound::BoundExpr;
use crate::syntax::LinearForm;
use crate::syntax::subst::subst;
use crate::syntax::{
    Arg, CmpOp, FixKind, Formula, IntExpr, LinearAtom, Name, QuantKind, Type,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElimError {
    #[error("μ-binder `{name}` has type {ty}; only int and prop parameters can be eliminated")]
    HigherOrder { name: String, ty: Type },
    #[error("bound mentions `{0}`, which is not an integer variable in scope of the μ-binder")]
    UnboundBoundVar(String),
}

/// Replaces every least fixpoint by a counter-indexed greatest fixpoint
/// under a universal bound:
///
/// `μx.λȳ.ψ  ↦  λȳ. ∀u ≥ n. (νx'.λz.λȳ. z > 0 ∧ ψ[x := x'(z−1)]) u ȳ`
///
/// When the μ heads an application to all of its arguments the `λȳ` is
/// β-reduced away. Inner μ's are eliminated first. The result is valid only
/// if the input is.
pub fn eliminate_mu(f: &Formula, bound: &BoundExpr) -> Result<Formula, ElimError> {
    Elim { bound: Spec::Fixed(bound), scope: Vec::new() }.go(f)
}

/// [`eliminate_mu`] with the bound `max(k, v + k, -v + k, ...)` over every
/// integer variable `v` in scope of each μ (its own parameters included),
/// i.e. `k + max |v|`. Used by the bound schedule.
pub fn eliminate_mu_scaled(f: &Formula, k: i64) -> Result<Formula, ElimError> {
    Elim { bound: Spec::Scaled(k), scope: Vec::new() }.go(f)
}

enum Spec<'b> {
    Fixed(&'b BoundExpr),
    Scaled(i64),
}

struct Elim<'b> {
    bound: Spec<'b>,
    /// Integer binders in scope, innermost last.
    scope: Vec<Name>,
}

impl Elim<'_> {
    fn go(&mut self, f: &Formula) -> Result<Formula, ElimError> {
        Ok(match f {
            Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => f.clone(),
            Formula::Or(a, b) => Formula::or(self.go(a)?, self.go(b)?),
            Formula::And(a, b) => Formula::and(self.go(a)?, self.go(b)?),
            Formula::Modal(k, l, b) => Formula::Modal(*k, l.clone(), Box::new(self.go(b)?)),
            Formula::Fix(FixKind::Nu, x, t, b) => {
                Formula::Fix(FixKind::Nu, x.clone(), t.clone(), Box::new(self.go(b)?))
            }
            Formula::Fix(FixKind::Mu, ..) => self.mu(f, None)?,
            Formula::Lambda(x, t, b) => {
                let int = *t == Type::Int;
                if int {
                    self.scope.push(x.clone());
                }
                let b2 = self.go(b);
                if int {
                    self.scope.pop();
                }
                Formula::Lambda(x.clone(), t.clone(), Box::new(b2?))
            }
            Formula::Quant(k, x, lbs, b) => {
                self.scope.push(x.clone());
                let b2 = self.go(b);
                self.scope.pop();
                Formula::Quant(*k, x.clone(), lbs.clone(), Box::new(b2?))
            }
            Formula::App(..) => {
                let (head, args) = f.spine();
                if let Formula::Fix(FixKind::Mu, _, t, _) = head {
                    if args.len() == t.params().len() {
                        let args2 = args.iter().map(|a| self.arg(a)).collect::<Result<Vec<_>, _>>()?;
                        return self.mu(head, Some(args2));
                    }
                }
                let Formula::App(h, a) = f else { unreachable!() };
                Formula::App(Box::new(self.go(h)?), self.arg(a)?)
            }
        })
    }

    fn arg(&mut self, a: &Arg) -> Result<Arg, ElimError> {
        Ok(match a {
            Arg::Int(e) => Arg::Int(e.clone()),
            Arg::Formula(g) => Arg::formula(self.go(g)?),
        })
    }

    /// Resolves a bound variable: a μ parameter first, then the innermost
    /// integer binder with that name or display name.
    fn resolve(&self, v: &Name, params: &[(Name, Type)]) -> Option<Name> {
        let hit = |n: &Name| n == v || n.base() == v.as_str();
        params
            .iter()
            .rev()
            .filter(|(_, t)| *t == Type::Int)
            .map(|p| &p.0)
            .find(|n| hit(n))
            .or_else(|| self.scope.iter().rev().find(|n| hit(n)))
            .cloned()
    }

    fn mu(&mut self, fix: &Formula, applied: Option<Vec<Arg>>) -> Result<Formula, ElimError> {
        let Formula::Fix(_, x, t, body) = fix else { unreachable!() };
        let param_tys: Vec<Type> = t.params().into_iter().cloned().collect();
        if param_tys.iter().any(|p| !matches!(p, Type::Int | Type::Prop)) {
            return Err(ElimError::HigherOrder { name: x.base().to_string(), ty: t.clone() });
        }

        // Parameters: taken from the λ-chain, η-expanded when it is short.
        let (lams, inner) = body.lambdas();
        let take = lams.len().min(param_tys.len());
        let mut params: Vec<(Name, Type)> =
            lams[..take].iter().map(|(n, t)| ((*n).clone(), (*t).clone())).collect();
        let mut psi = if take == lams.len() {
            inner.clone()
        } else {
            let mut g = (**body).clone();
            for _ in 0..take {
                let Formula::Lambda(_, _, b) = g else { unreachable!() };
                g = *b;
            }
            g
        };
        for ty in &param_tys[take..] {
            let y = Name::fresh("y");
            let a = if *ty == Type::Int {
                Arg::Int(IntExpr::Var(y.clone()))
            } else {
                Arg::formula(Formula::Var(y.clone()))
            };
            psi = Formula::App(Box::new(psi), a);
            params.push((y, ty.clone()));
        }

        // Eliminate inner μ's with the parameters in scope.
        let depth = self.scope.len();
        self.scope.extend(params.iter().filter(|p| p.1 == Type::Int).map(|p| p.0.clone()));
        let psi = self.go(&psi);
        self.scope.truncate(depth);
        let psi = psi?;

        let scaled;
        let bound = match self.bound {
            Spec::Fixed(b) => b,
            Spec::Scaled(k) => {
                let k = k as i128;
                let mut pieces = vec![LinearForm::constant(k)];
                let vars = self.scope.iter().chain(params.iter().filter(|p| p.1 == Type::Int).map(|p| &p.0));
                for v in vars {
                    let x = LinearForm::var(v.clone());
                    pieces.push(LinearForm::constant(k).plus(&x, 1));
                    pieces.push(LinearForm::constant(k).plus(&x, -1));
                }
                scaled = BoundExpr::max_of(pieces).expect("non-empty");
                &scaled
            }
        };
        let mut resolved = Vec::new();
        for v in bound.vars() {
            match self.resolve(&v, &params) {
                Some(n) => resolved.push((v, n)),
                None => return Err(ElimError::UnboundBoundVar(v.to_string())),
            }
        }

        let x2 = Name::fresh(&format!("{}'", x.base()));
        let z = Name::fresh("z");
        let u = Name::fresh("u");
        let dec = IntExpr::Var(z.clone()).offset(-1);
        let psi2 = subst(&psi, x, &Arg::formula(Formula::app(Formula::Var(x2.clone()), dec)));
        let guard = Formula::Atom(LinearAtom::new(CmpOp::Gt, IntExpr::Var(z.clone()), IntExpr::Const(0)));
        let mut nu_body = Formula::and(guard, psi2);
        for (y, ty) in params.iter().rev() {
            nu_body = Formula::lambda(y.clone(), ty.clone(), nu_body);
        }
        nu_body = Formula::lambda(z, Type::Int, nu_body);
        let nu = Formula::nu(x2, Type::arrow(Type::Int, t.clone()), nu_body);

        let args: Vec<Arg> = match &applied {
            Some(a) => a.clone(),
            None => params
                .iter()
                .map(|(y, ty)| {
                    if *ty == Type::Int {
                        Arg::Int(IntExpr::Var(y.clone()))
                    } else {
                        Arg::formula(Formula::Var(y.clone()))
                    }
                })
                .collect(),
        };
        let lower = bound.instantiate(&|v| {
            let n = resolved.iter().find(|(w, _)| w == v).map(|p| p.1.clone()).unwrap_or_else(|| v.clone());
            match (&applied, params.iter().position(|p| p.0 == n)) {
                (Some(a), Some(i)) => match &a[i] {
                    Arg::Int(e) => e.clone(),
                    Arg::Formula(_) => IntExpr::Var(n),
                },
                _ => IntExpr::Var(n),
            }
        });
        let call = Formula::apps(
            Formula::app(nu, IntExpr::Var(u.clone())),
            args,
        );
        let quant = Formula::Quant(QuantKind::Forall, u, lower, Box::new(call));
        Ok(match applied {
            Some(_) => quant,
            None => {
                let mut g = quant;
                for (y, ty) in params.iter().rev() {
                    g = Formula::lambda(y.clone(), ty.clone(), g);
                }
                g
            }
        })
    }
}
