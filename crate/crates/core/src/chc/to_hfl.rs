use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{rename_expr, ChcError, ChcSystem, Clause, Literal};
use crate::syntax::subst::subst;
use crate::syntax::{dualize, Arg, Formula, IntExpr, LinearAtom, Name, Type};

/// Picks readable names that avoid everything in `used`.
struct Names {
    used: BTreeSet<String>,
}

impl Names {
    fn pick(&mut self, base: &str) -> Name {
        let base = if base.is_empty() { "x" } else { base };
        let mut cand = base.to_string();
        let mut i = 1;
        while self.used.contains(&cand) {
            cand = format!("{}{}", base, i);
            i += 1;
        }
        self.used.insert(cand.clone());
        Name::new(&cand)
    }
}

fn rename_atom(a: &LinearAtom, map: &HashMap<Name, Name>) -> LinearAtom {
    LinearAtom::new(a.op, rename_expr(&a.lhs, map), rename_expr(&a.rhs, map))
}

struct Builder<'a> {
    sys: &'a ChcSystem,
    pvar: BTreeMap<&'a str, Name>,
    /// Parameters and the body `∨ ∃locals. ...` of each predicate, with
    /// other predicates referenced through `pvar`.
    defs: BTreeMap<&'a str, (Vec<Name>, Formula)>,
}

fn pred_type(k: usize) -> Type {
    Type::predicate(vec![Type::Int; k])
}

impl<'a> Builder<'a> {
    fn new(sys: &'a ChcSystem) -> Self {
        let mut names = Names { used: BTreeSet::new() };
        for c in sys.clauses() {
            names.used.extend(c.vars().iter().map(|v| v.as_str().to_string()));
        }
        let mut b = Builder { sys, pvar: BTreeMap::new(), defs: BTreeMap::new() };
        for p in sys.predicates.keys() {
            b.pvar.insert(p.as_str(), names.pick(p));
        }
        for (p, &k) in &sys.predicates {
            let def = b.define(p, k, &mut names);
            b.defs.insert(p.as_str(), def);
        }
        b
    }

    fn lit(&self, l: &Literal, map: &HashMap<Name, Name>) -> Formula {
        match l {
            Literal::Constraint(a) => Formula::Atom(rename_atom(a, map)),
            Literal::Pred(p) => Formula::apps(
                Formula::Var(self.pvar[p.pred.as_str()].clone()),
                p.args.iter().map(|e| Arg::Int(rename_expr(e, map))),
            ),
        }
    }

    fn define(&self, p: &str, k: usize, names: &mut Names) -> (Vec<Name>, Formula) {
        let clauses: Vec<&Clause> = self
            .sys
            .definite
            .iter()
            .filter(|c| c.head.as_ref().is_some_and(|h| h.pred == p))
            .collect();
        // parameter names follow the first head that uses plain variables;
        // clause variables that clash with them are renamed below
        let mut local = Names { used: self.pvar.values().map(|n| n.as_str().to_string()).collect() };
        let params: Vec<Name> = (0..k)
            .map(|i| {
                let base = clauses
                    .iter()
                    .find_map(|c| match &c.head.as_ref().unwrap().args[i] {
                        IntExpr::Var(v) => Some(v.base().to_string()),
                        _ => None,
                    })
                    .unwrap_or_else(|| format!("x{}", i + 1));
                let n = local.pick(&base);
                names.used.insert(n.as_str().to_string());
                n
            })
            .collect();
        let mut disjuncts = Vec::new();
        for c in clauses {
            let head = c.head.as_ref().unwrap();
            let mut map: HashMap<Name, Name> = HashMap::new();
            let mut eqs = Vec::new();
            for (i, e) in head.args.iter().enumerate() {
                match e {
                    IntExpr::Var(v) if !map.contains_key(v) => {
                        map.insert(v.clone(), params[i].clone());
                    }
                    _ => eqs.push(i),
                }
            }
            let mut locals = Vec::new();
            for v in c.vars() {
                if !map.contains_key(&v) {
                    let fresh = if params.contains(&v) { names.pick(v.base()) } else { v.clone() };
                    map.insert(v, fresh.clone());
                    locals.push(fresh);
                }
            }
            let mut conj: Vec<Formula> = eqs
                .into_iter()
                .map(|i| {
                    Formula::Atom(LinearAtom::new(
                        crate::syntax::CmpOp::Eq,
                        IntExpr::Var(params[i].clone()),
                        rename_expr(&head.args[i], &map),
                    ))
                })
                .collect();
            conj.extend(c.body.iter().map(|l| self.lit(l, &map)));
            let mut d = Formula::and_all(conj);
            for v in locals.into_iter().rev() {
                d = Formula::exists(v, d);
            }
            disjuncts.push(d);
        }
        (params, Formula::or_all(disjuncts))
    }

    /// The closed least-fixpoint term for `p`, nesting the definitions of
    /// predicates it depends on (Bekić); predicates on `stack` stay free.
    fn term(&self, p: &str, stack: &mut Vec<&'a str>) -> Formula {
        let (params, body) = &self.defs[p];
        let k = params.len();
        stack.push(self.pvar.get_key_value(p).unwrap().0);
        let mut body = body.clone();
        let deps: Vec<&'a str> = self.pvar.keys().copied().filter(|q| !stack.contains(q)).collect();
        for q in deps {
            let qv = &self.pvar[q];
            if body.any(&|f| matches!(f, Formula::Var(x) if x == qv)) {
                let t = self.term(q, stack);
                body = subst(&body, qv, &Arg::formula(t));
            }
        }
        stack.pop();
        let mut lam = body;
        for x in params.iter().rev() {
            lam = Formula::lambda(x.clone(), Type::Int, lam);
        }
        Formula::mu(self.pvar[p].clone(), pred_type(k), lam)
    }
}

/// Builds a closed formula that is valid iff the system is satisfiable.
///
/// Each predicate becomes a least fixpoint over its clauses, with clause
/// variables not in the head quantified existentially; mutual recursion is
/// resolved by nesting. Each goal `body ⟹ false` contributes
/// `∀vars. ∨ dual(literal)`, so after dualization the result uses only
/// greatest fixpoints. Without goals the result is `true`.
pub fn chc_to_hfl(s: &ChcSystem) -> Result<Formula, ChcError> {
    s.validate()?;
    let b = Builder::new(s);
    let mut duals: HashMap<&str, Formula> = HashMap::new();
    let mut goals = Vec::new();
    for g in &s.goals {
        let mut disj = Vec::new();
        for l in &g.body {
            disj.push(match l {
                Literal::Constraint(a) => Formula::Atom(a.negate()),
                Literal::Pred(p) => {
                    let d = match duals.get(p.pred.as_str()) {
                        Some(d) => d.clone(),
                        None => {
                            let d = dualize(&b.term(&p.pred, &mut Vec::new()));
                            duals.insert(p.pred.as_str(), d.clone());
                            d
                        }
                    };
                    Formula::apps(d, p.args.iter().cloned().map(Arg::Int))
                }
            });
        }
        let mut f = Formula::or_all(disj);
        for v in g.vars().into_iter().rev() {
            f = Formula::forall(v, f);
        }
        goals.push(f);
    }
    Ok(Formula::and_all(goals))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::mult;
    use super::super::parse_horn;
    use super::*;
    use crate::lts::trivial_model;
    use crate::semantics::{eval_bounded, eval_bounded_with, Boundary, EvalConfig};
    use crate::syntax::{alpha_eq, parse_formula, typecheck_closed};

    #[test]
    fn mult_matches_the_worked_translation() {
        let f = chc_to_hfl(&mult()).unwrap();
        let want = parse_formula(
            "forall x. forall y. forall r. \
             (nu u: int -> int -> int -> prop. \\x: int. \\y: int. \\r: int. \
                (y != 0 \\/ r != 0) /\\ (forall s. y = 0 \\/ u x (y - 1) s \\/ r != s + x)) x y r \
             \\/ x <= 0 \\/ r >= y",
        )
        .unwrap();
        assert!(alpha_eq(&f, &want), "got {}", f);
        assert!(typecheck_closed(&f).is_ok());
    }

    #[test]
    fn no_goals_is_true() {
        let s = parse_horn("(declare-fun P (Int) Bool)(assert (forall ((x Int)) (=> (= x 0) (P x))))").unwrap();
        assert_eq!(chc_to_hfl(&s).unwrap(), Formula::True);
    }

    #[test]
    fn mutual_recursion_nests() {
        let s = parse_horn(
            "(declare-fun E (Int) Bool)(declare-fun O (Int) Bool)
             (assert (forall ((n Int)) (=> (= n 0) (E n))))
             (assert (forall ((n Int)) (=> (O (- n 1)) (E n))))
             (assert (forall ((n Int)) (=> (E (- n 1)) (O n))))
             (assert (forall ((n Int)) (=> (and (O n) (<= n 0)) false)))",
        )
        .unwrap();
        let f = chc_to_hfl(&s).unwrap();
        assert!(typecheck_closed(&f).is_ok());
        assert!(!f.has_mu() || crate::syntax::dualize(&f).has_mu());
        // O(n) ∧ n ≤ 0 is unreachable; descending chains leave the window,
        // so out-of-window lookups of the ν-tables must read as true
        let cfg = EvalConfig { boundary: Boundary::Polarity, ..EvalConfig::with_window(6) };
        assert!(eval_bounded_with(&f, &trivial_model(), &cfg).unwrap().0);
    }

    #[test]
    fn unsat_system_gives_invalid_formula() {
        let s = parse_horn(
            "(declare-fun P (Int) Bool)
             (assert (forall ((x Int)) (=> (= x 0) (P x))))
             (assert (forall ((x Int)) (=> (P x) (P (+ x 1)))))
             (assert (forall ((x Int)) (=> (and (P x) (>= x 3)) false)))",
        )
        .unwrap();
        let f = chc_to_hfl(&s).unwrap();
        assert!(!eval_bounded(&f, 6, None).unwrap());
    }

    #[test]
    fn non_variable_heads_become_equations() {
        let s = parse_horn(
            "(declare-fun P (Int Int) Bool)
             (assert (forall ((x Int)) (=> true (P x x))))
             (assert (forall ((x Int)) (=> (P 1 x) false)))",
        )
        .unwrap();
        let f = chc_to_hfl(&s).unwrap();
        // P(1, x) holds only for x = 1, so the goal is violated
        assert!(!eval_bounded(&f, 4, None).unwrap());
    }
}
