use crate::syntax::subst::subst;
use crate::syntax::{Arg, CmpOp, Formula, IntExpr, LinearAtom, Name, QuantKind, Type};

/// Replaces `∀`/`∃` sugar by integer-indexed fixpoints.
///
/// Unbounded quantifiers walk both directions from 0:
/// `∀x.φ ↦ (νq.λn. φ[x:=n] ∧ q(n−1) ∧ q(n+1)) 0`. A lower bound `e` gives the
/// one-sided form `(νq.λn. φ[x:=n] ∧ q(n+1)) e`; further bounds become
/// guards on `n`.
pub fn desugar_quantifiers(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => f.clone(),
        Formula::Or(a, b) => Formula::or(desugar_quantifiers(a), desugar_quantifiers(b)),
        Formula::And(a, b) => Formula::and(desugar_quantifiers(a), desugar_quantifiers(b)),
        Formula::Modal(k, l, b) => Formula::Modal(*k, l.clone(), Box::new(desugar_quantifiers(b))),
        Formula::Fix(k, x, t, b) => {
            Formula::Fix(*k, x.clone(), t.clone(), Box::new(desugar_quantifiers(b)))
        }
        Formula::Lambda(x, t, b) => {
            Formula::Lambda(x.clone(), t.clone(), Box::new(desugar_quantifiers(b)))
        }
        Formula::App(h, a) => {
            let a2 = match a {
                Arg::Int(e) => Arg::Int(e.clone()),
                Arg::Formula(g) => Arg::formula(desugar_quantifiers(g)),
            };
            Formula::App(Box::new(desugar_quantifiers(h)), a2)
        }
        Formula::Quant(k, x, lbs, b) => encode(*k, x, lbs, &desugar_quantifiers(b)),
    }
}

fn encode(k: QuantKind, x: &Name, lbs: &[IntExpr], body: &Formula) -> Formula {
    let q = Name::fresh("q");
    let n = Name::fresh("n");
    let nv = || IntExpr::Var(n.clone());
    let inst = subst(body, x, &Arg::Int(nv()));
    let step = |d: i64| Formula::app(Formula::Var(q.clone()), nv().offset(d));
    let forall = k == QuantKind::Forall;
    let join = |a: Formula, b: Formula| if forall { Formula::and(a, b) } else { Formula::or(a, b) };
    let ty = Type::arrow(Type::Int, Type::Prop);
    let (inner, start) = match lbs.split_first() {
        None => (join(join(inst, step(-1)), step(1)), IntExpr::Const(0)),
        Some((first, rest)) => {
            let mut guarded = inst;
            for e in rest.iter().rev() {
                guarded = if forall {
                    Formula::or(Formula::Atom(LinearAtom::new(CmpOp::Lt, nv(), e.clone())), guarded)
                } else {
                    Formula::and(Formula::Atom(LinearAtom::new(CmpOp::Ge, nv(), e.clone())), guarded)
                };
            }
            (join(guarded, step(1)), first.clone())
        }
    };
    let lam = Formula::lambda(n.clone(), Type::Int, inner);
    let fix = if forall { Formula::nu(q, ty, lam) } else { Formula::mu(q, ty, lam) };
    Formula::app(fix, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval_bounded;
    use crate::syntax::{alpha_eq, parse_formula, typecheck_closed};

    #[test]
    fn two_sided_forall() {
        let f = parse_formula("forall x. x <= 3").unwrap();
        let want = parse_formula(
            "(nu q: int -> prop. \\n: int. n <= 3 /\\ q (n - 1) /\\ q (n + 1)) 0",
        )
        .unwrap();
        assert!(alpha_eq(&desugar_quantifiers(&f), &want));
    }

    #[test]
    fn one_sided_exists() {
        let f = parse_formula("exists x >= 0. x = 5").unwrap();
        let want = parse_formula("(mu q: int -> prop. \\n: int. n = 5 \\/ q (n + 1)) 0").unwrap();
        let g = desugar_quantifiers(&f);
        assert!(alpha_eq(&g, &want));
        assert!(!g.has_quantifiers());
        assert!(eval_bounded(&g, 8, None).unwrap());
    }

    #[test]
    fn extra_bounds_are_guards() {
        let f = parse_formula("exists x >= max(0, 2). x <= 2").unwrap();
        let g = desugar_quantifiers(&f);
        assert!(typecheck_closed(&g).is_ok());
        assert!(eval_bounded(&g, 8, None).unwrap());
        let f = parse_formula("exists x >= max(0, 3). x <= 2").unwrap();
        assert!(!eval_bounded(&desugar_quantifiers(&f), 8, None).unwrap());
    }

    #[test]
    fn sugar_free_is_unchanged() {
        let f = parse_formula("(mu x: int -> prop. \\y: int. y = 0 \\/ x (y - 1)) 2").unwrap();
        assert_eq!(desugar_quantifiers(&f), f);
    }
}
