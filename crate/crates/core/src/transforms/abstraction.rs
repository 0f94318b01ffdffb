use std::collections::HashMap;

use thiserror::Error;

use super::entail::Entailment;
use super::preds::PredicateSet;
use crate::syntax::subst::subst;
use crate::syntax::type_mentions_int;
use crate::syntax::{Arg, Formula, LinearAtom, Name, QuantKind, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbsError {
    #[error("no predicates given for integer binder `{0}`")]
    MissingPredicates(String),
    #[error("existential quantifier over `{0}` cannot be underapproximated by abstraction")]
    Existential(String),
    #[error("integers flow through a higher-order position: {0}")]
    HigherOrderInt(String),
}

/// Largest monomial tried when abstracting an atom.
const MAX_MONOMIAL: usize = 3;

/// Replaces every integer binder by one prop binder per predicate and
/// every atom by the disjunction of the minimal predicate monomials that
/// entail it. The result is pure; it is valid only if the input is (given a
/// sound entailment engine).
pub fn abstract_predicates(
    f: &Formula,
    preds: &PredicateSet,
    engine: &dyn Entailment,
) -> Result<Formula, AbsError> {
    if !f.has_quantifiers() && f.is_pure() {
        return Ok(f.clone());
    }
    let mut a = Abs { preds, engine, ints: Vec::new(), shapes: HashMap::new(), cache: HashMap::new() };
    let g = a.go(f)?;
    debug_assert!(g.is_pure());
    Ok(g)
}

/// One parameter of a predicate after abstraction.
#[derive(Clone)]
enum Shape {
    /// Integer parameter with its predicates, written over the parameter.
    Int(Name, Vec<LinearAtom>),
    Other,
}

struct IntVar {
    name: Name,
    /// Predicate over `name` and the boolean standing for it.
    preds: Vec<(LinearAtom, Name)>,
}

struct Abs<'a> {
    preds: &'a PredicateSet,
    engine: &'a dyn Entailment,
    ints: Vec<IntVar>,
    shapes: HashMap<Name, Vec<Shape>>,
    cache: HashMap<String, bool>,
}

impl Abs<'_> {
    fn preds_for(&self, y: &Name) -> Result<Vec<LinearAtom>, AbsError> {
        self.preds.for_binder(y).ok_or_else(|| AbsError::MissingPredicates(y.base().to_string()))
    }

    fn bind_int(&mut self, y: &Name) -> Result<Vec<Name>, AbsError> {
        let ps = self.preds_for(y)?;
        let bools: Vec<Name> = (0..ps.len()).map(|_| Name::fresh(&format!("b_{}", y.base()))).collect();
        self.ints.push(IntVar { name: y.clone(), preds: ps.into_iter().zip(bools.clone()).collect() });
        Ok(bools)
    }

    fn entails(&mut self, hyps: &[LinearAtom], goal: &LinearAtom) -> bool {
        let key = format!("{:?} |= {:?}", hyps, goal);
        if let Some(r) = self.cache.get(&key) {
            return *r;
        }
        let r = match self.engine.entails(hyps, goal) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("entailment check failed ({}); using false for `{}`", e, goal);
                false
            }
        };
        self.cache.insert(key, r);
        r
    }

    /// Weakest positive combination of in-scope booleans entailing `goal`.
    fn weakest(&mut self, goal: &LinearAtom) -> Formula {
        let mut cands: Vec<(LinearAtom, Name)> = Vec::new();
        for v in goal.vars() {
            if let Some(iv) = self.ints.iter().rev().find(|iv| iv.name == v) {
                cands.extend(iv.preds.iter().cloned());
            }
        }
        if self.entails(&[], goal) {
            return Formula::True;
        }
        let mut found: Vec<Vec<usize>> = Vec::new();
        for size in 1..=cands.len().min(MAX_MONOMIAL) {
            for combo in combinations(cands.len(), size) {
                if found.iter().any(|m| m.iter().all(|i| combo.contains(i))) {
                    continue;
                }
                let hyps: Vec<LinearAtom> = combo.iter().map(|&i| cands[i].0.clone()).collect();
                if self.entails(&hyps, goal) {
                    found.push(combo);
                }
            }
        }
        Formula::or_all(found.into_iter().map(|m| {
            Formula::and_all(m.into_iter().map(|i| Formula::Var(cands[i].1.clone())))
        }))
    }

    fn shapes_of_lambdas(&self, f: &Formula, arity: usize) -> Result<Vec<Shape>, AbsError> {
        let (lams, _) = f.lambdas();
        let mut out = Vec::new();
        for (y, t) in lams.iter().take(arity) {
            out.push(match t {
                Type::Int => Shape::Int((*y).clone(), self.preds_for(y)?),
                t if type_mentions_int(t) => {
                    return Err(AbsError::HigherOrderInt(format!("parameter `{}` : {}", y.base(), t)))
                }
                _ => Shape::Other,
            });
        }
        Ok(out)
    }

    fn head_shapes(&self, head: &Formula, arity: usize) -> Result<Option<Vec<Shape>>, AbsError> {
        Ok(match head {
            Formula::Var(x) => self.shapes.get(x).cloned(),
            Formula::Fix(_, _, _, b) => Some(self.shapes_of_lambdas(b, arity)?),
            Formula::Lambda(..) => Some(self.shapes_of_lambdas(head, arity)?),
            _ => None,
        })
    }

    fn go(&mut self, f: &Formula) -> Result<Formula, AbsError> {
        Ok(match f {
            Formula::True | Formula::False | Formula::Var(_) => f.clone(),
            Formula::Atom(a) => self.weakest(a),
            Formula::Or(a, b) => Formula::or(self.go(a)?, self.go(b)?),
            Formula::And(a, b) => Formula::and(self.go(a)?, self.go(b)?),
            Formula::Modal(k, l, b) => Formula::Modal(*k, l.clone(), Box::new(self.go(b)?)),
            Formula::Quant(QuantKind::Exists, y, _, _) => {
                return Err(AbsError::Existential(y.base().to_string()))
            }
            Formula::Quant(QuantKind::Forall, y, _, b) => {
                let bools = self.bind_int(y)?;
                let body = self.go(b);
                self.ints.pop();
                let body = body?;
                let m = bools.len();
                let mut conj = Vec::with_capacity(1 << m);
                for mask in 0u32..(1 << m) {
                    let mut g = body.clone();
                    for (j, bn) in bools.iter().enumerate() {
                        let v = if mask & (1 << j) != 0 { Formula::True } else { Formula::False };
                        g = subst(&g, bn, &Arg::formula(v));
                    }
                    conj.push(g);
                }
                Formula::and_all(conj)
            }
            Formula::Lambda(y, Type::Int, b) => {
                let bools = self.bind_int(y)?;
                let body = self.go(b);
                self.ints.pop();
                let mut g = body?;
                for bn in bools.iter().rev() {
                    g = Formula::lambda(bn.clone(), Type::Prop, g);
                }
                g
            }
            Formula::Lambda(y, t, b) => {
                if type_mentions_int(t) {
                    return Err(AbsError::HigherOrderInt(format!("parameter `{}` : {}", y.base(), t)));
                }
                Formula::Lambda(y.clone(), t.clone(), Box::new(self.go(b)?))
            }
            Formula::Fix(k, x, t, b) => {
                let params = t.params();
                let shapes = self.shapes_of_lambdas(b, params.len())?;
                if shapes.len() < params.len() && params.iter().any(|p| **p == Type::Int) {
                    return Err(AbsError::HigherOrderInt(format!(
                        "fixpoint `{}` has integer parameters but no matching λ-chain",
                        x.base()
                    )));
                }
                let mut new_params = Vec::new();
                for (i, p) in params.iter().enumerate() {
                    match shapes.get(i) {
                        Some(Shape::Int(_, ps)) => new_params.extend(ps.iter().map(|_| Type::Prop)),
                        _ => new_params.push((*p).clone()),
                    }
                }
                let t2 = Type::predicate(new_params);
                let old = self.shapes.insert(x.clone(), shapes);
                let body = self.go(b);
                match old {
                    Some(s) => self.shapes.insert(x.clone(), s),
                    None => self.shapes.remove(x),
                };
                Formula::Fix(*k, x.clone(), t2, Box::new(body?))
            }
            Formula::App(..) => {
                let (head, args) = f.spine();
                let has_int = args.iter().any(|a| matches!(a, Arg::Int(_)));
                let shapes = self.head_shapes(head, args.len())?;
                if has_int && shapes.is_none() {
                    return Err(AbsError::HigherOrderInt(format!(
                        "integer argument passed to `{}`",
                        head
                    )));
                }
                let shapes = shapes.unwrap_or_default();
                let mut out = self.go(head)?;
                for (i, a) in args.iter().enumerate() {
                    match (a, shapes.get(i)) {
                        (Arg::Int(e), Some(Shape::Int(p, ps))) => {
                            for q in ps.clone() {
                                let goal = q.rename(p, e);
                                let v = self.weakest(&goal);
                                out = Formula::app(out, v);
                            }
                        }
                        (Arg::Int(e), _) => {
                            return Err(AbsError::HigherOrderInt(format!(
                                "integer argument `{}` at a non-integer position",
                                e
                            )))
                        }
                        (Arg::Formula(g), _) => out = Formula::app(out, self.go(g)?),
                    }
                }
                out
            }
        })
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::entail::WindowEntailment;
    use super::super::preds::parse_predicates;
    use super::*;
    use crate::lts::trivial_model;
    use crate::semantics::check_pure;
    use crate::syntax::{alpha_eq, parse_formula, typecheck_closed};

    #[test]
    fn displayed_example() {
        let f = parse_formula("(nu x: int -> prop. \\y: int. y >= 0 /\\ x (y + 1)) 1").unwrap();
        let p = parse_predicates("y: y > 0").unwrap();
        let g = abstract_predicates(&f, &p, &WindowEntailment::new(16)).unwrap();
        let want = parse_formula("(nu x: prop -> prop. \\b: prop. b /\\ x b) true").unwrap();
        assert!(alpha_eq(&g, &want), "{}", g);
        assert!(check_pure(&trivial_model(), &g).unwrap());
    }

    #[test]
    fn integer_free_is_unchanged() {
        let f = parse_formula("nu x: prop. <a>x").unwrap();
        assert_eq!(abstract_predicates(&f, &PredicateSet::new(), &WindowEntailment::new(4)).unwrap(), f);
    }

    #[test]
    fn forall_becomes_conjunction_over_valuations() {
        let f = parse_formula("forall y. y > 0 \\/ y <= 0").unwrap();
        let p = parse_predicates("y: y > 0, y <= 0").unwrap();
        let g = abstract_predicates(&f, &p, &WindowEntailment::new(8)).unwrap();
        assert_eq!(typecheck_closed(&g).unwrap(), Type::Prop);
        // The valuation with both booleans false is not excluded, so the
        // abstraction is incomplete here.
        assert!(!check_pure(&trivial_model(), &g).unwrap());
    }

    #[test]
    fn refusals() {
        let e = WindowEntailment::new(4);
        let f = parse_formula("exists y. y = 0").unwrap();
        assert!(matches!(
            abstract_predicates(&f, &parse_predicates("y: y = 0").unwrap(), &e),
            Err(AbsError::Existential(_))
        ));
        let g = parse_formula("forall y. y = 0").unwrap();
        assert!(matches!(
            abstract_predicates(&g, &PredicateSet::new(), &e),
            Err(AbsError::MissingPredicates(_))
        ));
        let h = parse_formula("(\\p: int -> prop. p 0) (\\y: int. y = 0)").unwrap();
        assert!(matches!(
            abstract_predicates(&h, &parse_predicates("*: _ = 0").unwrap(), &e),
            Err(AbsError::HigherOrderInt(_))
        ));
    }
}
