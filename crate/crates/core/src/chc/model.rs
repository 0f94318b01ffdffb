use std::collections::BTreeMap;

use super::{ChcError, ChcSystem, Clause, Literal, PredApp};
use crate::syntax::subst::subst;
use crate::syntax::{dualize, Arg, CmpOp, Formula, IntExpr, LinearAtom, Name};
use crate::transforms::Entailment;

/// A candidate interpretation: each predicate maps to parameters and a
/// quantifier-free formula over them.
#[derive(Debug, Clone, Default)]
pub struct Model {
    defs: BTreeMap<String, (Vec<Name>, Formula)>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pred: &str, params: &[&str], body: Formula) {
        self.defs.insert(pred.to_string(), (params.iter().map(|p| Name::new(p)).collect(), body));
    }

    fn instantiate(&self, p: &PredApp) -> Result<Formula, ChcError> {
        let (params, body) = self
            .defs
            .get(&p.pred)
            .ok_or_else(|| ChcError::Undeclared(p.pred.clone()))?;
        if params.len() != p.args.len() {
            return Err(ChcError::Arity { name: p.pred.clone(), expected: params.len(), found: p.args.len() });
        }
        // rename first so that arguments mentioning parameter names are safe
        let fresh: Vec<Name> = params.iter().map(|x| Name::fresh(x.base())).collect();
        let mut f = body.clone();
        for (x, y) in params.iter().zip(&fresh) {
            f = subst(&f, x, &Arg::Int(IntExpr::Var(y.clone())));
        }
        for (y, e) in fresh.iter().zip(&p.args) {
            f = subst(&f, y, &Arg::Int(e.clone()));
        }
        Ok(f)
    }
}

fn conjuncts(f: &Formula) -> Result<Vec<Vec<LinearAtom>>, ChcError> {
    Ok(match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Atom(a) => vec![vec![a.clone()]],
        Formula::Or(a, b) => {
            let mut l = conjuncts(a)?;
            l.extend(conjuncts(b)?);
            l
        }
        Formula::And(a, b) => {
            let (l, r) = (conjuncts(a)?, conjuncts(b)?);
            let mut out = Vec::new();
            for x in &l {
                for y in &r {
                    out.push(x.iter().chain(y).cloned().collect());
                }
            }
            out
        }
        _ => return Err(ChcError::Fragment("model bodies must be quantifier-free".into())),
    })
}

fn clause_holds(m: &Model, c: &Clause, engine: &dyn Entailment) -> Result<bool, ChcError> {
    let mut parts = Vec::new();
    for l in &c.body {
        parts.push(match l {
            Literal::Constraint(a) => Formula::Atom(a.clone()),
            Literal::Pred(p) => m.instantiate(p)?,
        });
    }
    if let Some(h) = &c.head {
        parts.push(dualize(&m.instantiate(h)?));
    }
    let falsum = LinearAtom::new(CmpOp::Le, IntExpr::Const(1), IntExpr::Const(0));
    for conj in conjuncts(&Formula::and_all(parts))? {
        if !engine
            .entails(&conj, &falsum)
            .map_err(|e| ChcError::Solver(e.to_string()))?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether each clause (definite first, then goals) holds under `m`,
/// as judged by `engine`.
pub fn check_model(s: &ChcSystem, m: &Model, engine: &dyn Entailment) -> Result<Vec<bool>, ChcError> {
    s.clauses().map(|c| clause_holds(m, c, engine)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::hfl_to_chc;
    use crate::syntax::parse_formula;
    use crate::transforms::WindowEntailment;

    fn body(text: &str, params: &[&str]) -> Formula {
        // parse as the body of a lambda so the parameters are bound
        let mut src = String::new();
        for p in params {
            src.push_str(&format!("\\{}: int. ", p));
        }
        src.push_str(text);
        let mut f = parse_formula(&src).unwrap();
        for _ in params {
            let Formula::Lambda(_, _, b) = f else { unreachable!() };
            f = *b;
        }
        f
    }

    #[test]
    fn worked_example_models() {
        let f = parse_formula(
            "forall i. forall u >= max(i + 1, 1). \
             (nu x: int -> int -> prop. \\z: int. \\y: int. z > 0 /\\ (y <= 0 \\/ x (z - 1) (y - 1))) u i",
        )
        .unwrap();
        let s = hfl_to_chc(&f).unwrap();
        let engine = WindowEntailment::new(6);

        let mut conj = Model::new();
        conj.insert("X", &["z", "y"], body("z <= 0 /\\ z <= y", &["z", "y"]));
        let verdicts = check_model(&s, &conj, &engine).unwrap();
        // z = 0, y = -1 breaks the base clause; z = y = 1 the step clause
        assert_eq!(verdicts, vec![false, false, true]);

        let mut disj = Model::new();
        disj.insert("X", &["z", "y"], body("z <= 0 \\/ z <= y", &["z", "y"]));
        assert_eq!(check_model(&s, &disj, &engine).unwrap(), vec![true, true, true]);
    }

    #[test]
    fn swapped_arguments_are_substituted_simultaneously() {
        let mut m = Model::new();
        m.insert("P", &["a", "b"], body("a < b", &["a", "b"]));
        let f = m
            .instantiate(&PredApp::new("P", vec![IntExpr::var("b"), IntExpr::var("a")]))
            .unwrap();
        assert_eq!(f.to_string(), "b < a");
    }
}
