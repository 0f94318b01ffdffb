use std::collections::{BTreeSet, HashMap};

use super::{ChcError, ChcSystem, Clause, Literal, PredApp};
use crate::syntax::subst::subst;
use crate::syntax::{
    alpha_eq, beta_step, dualize, free_vars, typecheck_closed, Arg, CmpOp, FixKind, Formula, IntExpr,
    LinearAtom, Name, QuantKind, Type,
};

type Dnf = Vec<Vec<Literal>>;

fn collect_names(f: &Formula, out: &mut BTreeSet<String>) {
    let mut ints = Vec::new();
    f.visit(&mut |g| match g {
        Formula::Var(x) | Formula::Fix(_, x, _, _) | Formula::Lambda(x, _, _) => {
            out.insert(x.as_str().to_string());
        }
        Formula::Quant(_, x, lbs, _) => {
            out.insert(x.as_str().to_string());
            lbs.iter().for_each(|e| e.vars(&mut ints));
        }
        Formula::Atom(a) => {
            a.lhs.vars(&mut ints);
            a.rhs.vars(&mut ints);
        }
        Formula::App(_, Arg::Int(e)) => e.vars(&mut ints),
        _ => {}
    });
    out.extend(ints.iter().map(|v| v.as_str().to_string()));
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(h) => h.to_uppercase().chain(c.filter(|&ch| ch != '\'')).collect(),
        None => "P".into(),
    }
}

struct Conv {
    sys: ChcSystem,
    /// Every name in the input plus every name generated so far.
    taken: BTreeSet<String>,
    /// Predicates created so far, keyed by their (closed-up-to-extras) μ-term.
    defined: Vec<(Formula, String, Vec<Name>)>,
    /// In-scope μ binders: predicate name and the extra arguments it carries.
    scope: HashMap<Name, (String, Vec<Name>)>,
}

impl Conv {
    fn pick(&mut self, base: &str) -> String {
        let base = if base.is_empty() { "x" } else { base };
        let mut cand = base.to_string();
        let mut i = 1;
        while self.taken.contains(&cand) {
            cand = format!("{}{}", base, i);
            i += 1;
        }
        self.taken.insert(cand.clone());
        cand
    }

    /// A clause variable for binder `x`, keeping its name when it is not in
    /// use in the clause.
    fn local(&mut self, x: &Name, clause: &BTreeSet<Name>) -> Name {
        if !clause.contains(x) && !self.scope.contains_key(x) {
            x.clone()
        } else {
            Name::new(&self.pick(x.base()))
        }
    }

    fn dnf(&mut self, f: &Formula, clause: &mut BTreeSet<Name>) -> Result<Dnf, ChcError> {
        match f {
            Formula::True => Ok(vec![vec![]]),
            Formula::False => Ok(vec![]),
            Formula::Atom(a) => Ok(vec![vec![Literal::Constraint(a.clone())]]),
            Formula::Or(a, b) => {
                let mut l = self.dnf(a, clause)?;
                l.extend(self.dnf(b, clause)?);
                Ok(l)
            }
            Formula::And(a, b) => {
                let l = self.dnf(a, clause)?;
                let r = self.dnf(b, clause)?;
                let mut out = Vec::with_capacity(l.len() * r.len());
                for x in &l {
                    for y in &r {
                        out.push(x.iter().chain(y).cloned().collect());
                    }
                }
                Ok(out)
            }
            Formula::Quant(QuantKind::Exists, x, lbs, b) => {
                let v = self.local(x, clause);
                clause.insert(v.clone());
                let b = subst(b, x, &Arg::Int(IntExpr::Var(v.clone())));
                let guards: Vec<Literal> = lbs
                    .iter()
                    .map(|e| Literal::Constraint(LinearAtom::new(CmpOp::Ge, IntExpr::Var(v.clone()), e.clone())))
                    .collect();
                Ok(self
                    .dnf(&b, clause)?
                    .into_iter()
                    .map(|d| guards.iter().cloned().chain(d).collect())
                    .collect())
            }
            Formula::Quant(QuantKind::Forall, x, _, _) => Err(ChcError::NotHorn(format!(
                "universal quantifier over `{}` inside a fixpoint body",
                x
            ))),
            Formula::Modal(..) => Err(ChcError::Fragment("modal operators".into())),
            Formula::Fix(FixKind::Nu, x, _, _) => Err(ChcError::Fragment(format!(
                "least fixpoint `{}` in the input",
                x
            ))),
            Formula::Lambda(..) => Err(ChcError::Fragment("unapplied abstraction".into())),
            Formula::Var(_) | Formula::App(..) | Formula::Fix(..) => {
                let (head, args) = f.spine();
                if matches!(head, Formula::Lambda(..)) {
                    let g = beta_step(f).map_err(|e| ChcError::Fragment(e.to_string()))?;
                    return self.dnf(&g, clause);
                }
                let mut ints = Vec::with_capacity(args.len());
                for a in args {
                    match a {
                        Arg::Int(e) => ints.push(e.clone()),
                        Arg::Formula(_) => {
                            return Err(ChcError::Fragment("predicate-valued argument".into()))
                        }
                    }
                }
                let (name, extras, arity) = match head {
                    Formula::Var(x) => match self.scope.get(x) {
                        Some((n, ex)) => (n.clone(), ex.clone(), self.sys.predicates[n] - ex.len()),
                        None => return Err(ChcError::Fragment(format!("free variable `{}`", x))),
                    },
                    Formula::Fix(FixKind::Mu, _, t, _) => {
                        let (n, ex) = self.define(head)?;
                        (n, ex, t.params().len())
                    }
                    _ => return Err(ChcError::Fragment("unsupported application head".into())),
                };
                if ints.len() != arity {
                    return Err(ChcError::Fragment(format!("partial application of `{}`", name)));
                }
                ints.extend(extras.into_iter().map(IntExpr::Var));
                Ok(vec![vec![Literal::Pred(PredApp::new(name, ints))]])
            }
        }
    }

    /// Introduces a predicate for the μ-term `fix` and its defining clauses.
    fn define(&mut self, fix: &Formula) -> Result<(String, Vec<Name>), ChcError> {
        let Formula::Fix(_, x, t, body) = fix else { unreachable!() };
        if let Some((_, n, ex)) = self.defined.iter().find(|(g, _, _)| alpha_eq(g, fix)) {
            return Ok((n.clone(), ex.clone()));
        }
        if !t.is_int_predicate() {
            return Err(ChcError::Fragment(format!("`{}` has non-integer parameters ({})", x, t)));
        }
        let mut extras: Vec<Name> = Vec::new();
        for v in free_vars(fix) {
            match self.scope.get(&v) {
                Some((_, ex)) => extras.extend(ex.iter().cloned()),
                None => extras.push(v),
            }
        }
        let mut seen = BTreeSet::new();
        extras.retain(|v| seen.insert(v.clone()));

        let k = t.params().len();
        let name = self.pick(&capitalize(x.base()));
        self.sys.declare(name.clone(), k + extras.len());
        self.defined.push((fix.clone(), name.clone(), extras.clone()));
        let saved = self.scope.insert(x.clone(), (name.clone(), extras.clone()));

        let mut clause: BTreeSet<Name> = extras.iter().cloned().collect();
        let mut params = Vec::with_capacity(k);
        let mut inner = (**body).clone();
        for _ in 0..k {
            match inner {
                Formula::Lambda(p, _, b) => {
                    let v = self.local(&p, &clause);
                    clause.insert(v.clone());
                    inner = subst(&b, &p, &Arg::Int(IntExpr::Var(v.clone())));
                    params.push(v);
                }
                other => {
                    let v = Name::new(&self.pick("x"));
                    clause.insert(v.clone());
                    inner = Formula::app(other, IntExpr::Var(v.clone()));
                    params.push(v);
                }
            }
        }
        let head_args: Vec<IntExpr> =
            params.iter().chain(&extras).cloned().map(IntExpr::Var).collect();
        let result = self.dnf(&inner, &mut clause);
        match saved {
            Some(s) => self.scope.insert(x.clone(), s),
            None => self.scope.remove(x),
        };
        for body in result? {
            self.sys.push(Clause { body, head: Some(PredApp::new(name.clone(), head_args.clone())) });
        }
        Ok((name, extras))
    }
}

/// Builds a Horn system that is satisfiable iff the closed, first-order,
/// modality-free ν-formula `f` is valid.
///
/// Leading `∀` binders become clause variables (their lower bounds become
/// constraints); the rest is dualized, each least fixpoint becomes a
/// predicate named after its binder, free integer variables are passed as
/// extra arguments, and bodies are split into disjunctive normal form.
pub fn hfl_to_chc(f: &Formula) -> Result<ChcSystem, ChcError> {
    let ty = typecheck_closed(f).map_err(|e| ChcError::Fragment(e.to_string()))?;
    if ty != Type::Prop {
        return Err(ChcError::Fragment(format!("formula has type {}", ty)));
    }
    if f.has_modalities() {
        return Err(ChcError::Fragment("modal operators".into()));
    }
    if f.has_mu() {
        return Err(ChcError::Fragment("least fixpoints in the input".into()));
    }
    let mut conv = Conv {
        sys: ChcSystem::new(),
        taken: BTreeSet::new(),
        defined: Vec::new(),
        scope: HashMap::new(),
    };
    collect_names(f, &mut conv.taken);

    let mut clause = BTreeSet::new();
    let mut bounds = Vec::new();
    let mut m = f.clone();
    while let Formula::Quant(QuantKind::Forall, x, lbs, b) = m {
        let v = conv.local(&x, &clause);
        clause.insert(v.clone());
        for e in &lbs {
            bounds.push(Literal::Constraint(LinearAtom::new(CmpOp::Ge, IntExpr::Var(v.clone()), e.clone())));
        }
        m = subst(&b, &x, &Arg::Int(IntExpr::Var(v)));
    }
    let d = dualize(&m);
    for body in conv.dnf(&d, &mut clause)? {
        conv.sys.push(Clause { body: bounds.iter().cloned().chain(body).collect(), head: None });
    }
    let mut sys = conv.sys;
    let preds = sys.predicates.clone();
    for c in sys.definite.iter_mut().chain(sys.goals.iter_mut()) {
        *c = c.tidy(&preds);
    }
    sys.validate()?;
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::mult;
    use super::super::{chc_to_hfl, parse_horn};
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn worked_example_clauses() {
        let f = parse_formula(
            "forall i. forall u >= max(i + 1, 1). \
             (nu x: int -> int -> prop. \\z: int. \\y: int. z > 0 /\\ (y <= 0 \\/ x (z - 1) (y - 1))) u i",
        )
        .unwrap();
        let s = hfl_to_chc(&f).unwrap();
        let lines: Vec<String> = s.clauses().map(|c| c.to_string()).collect();
        assert_eq!(
            lines,
            vec![
                "z <= 0 => X(z, y)",
                "y > 0 /\\ X(z - 1, y - 1) => X(z, y)",
                "u >= i + 1 /\\ u >= 1 /\\ X(u, i) => false",
            ]
        );
    }

    #[test]
    fn round_trip_preserves_shape() {
        let s = mult();
        let back = hfl_to_chc(&chc_to_hfl(&s).unwrap()).unwrap();
        assert_eq!(back.predicates.len(), s.predicates.len());
        assert_eq!(back.definite.len(), s.definite.len());
        assert_eq!(back.goals.len(), s.goals.len());
    }

    #[test]
    fn free_ints_become_arguments() {
        let f = parse_formula(
            "forall k. (nu x: int -> prop. \\n: int. n <= k \\/ x (n - 1)) 0",
        )
        .unwrap();
        let s = hfl_to_chc(&f).unwrap();
        assert_eq!(s.predicates.get("X"), Some(&2));
        assert_eq!(s.goals[0].to_string(), "X(0, k) => false");
    }

    #[test]
    fn refusals() {
        let modal = parse_formula("nu x: prop. <a>x").unwrap();
        assert!(matches!(hfl_to_chc(&modal), Err(ChcError::Fragment(_))));
        let mu = parse_formula("(mu x: int -> prop. \\n: int. n = 0 \\/ x (n - 1)) 3").unwrap();
        assert!(matches!(hfl_to_chc(&mu), Err(ChcError::Fragment(_))));
        // an ∃ in a ν-body dualizes to a ∀ in the clause body
        let ex = parse_formula("(nu x: int -> prop. \\n: int. exists m. m > n /\\ x m) 0").unwrap();
        assert!(matches!(hfl_to_chc(&ex), Err(ChcError::NotHorn(_))));
        let ho = parse_formula("(nu x: prop -> prop. \\b: prop. b /\\ x b) true").unwrap();
        assert!(matches!(hfl_to_chc(&ho), Err(ChcError::Fragment(_))));
    }

    #[test]
    fn shared_fixpoints_get_one_predicate() {
        let s = parse_horn(
            "(declare-fun P (Int) Bool)
             (assert (forall ((x Int)) (=> (= x 0) (P x))))
             (assert (forall ((x Int) (y Int)) (=> (and (P x) (P y) (> (+ x y) 0)) false)))",
        )
        .unwrap();
        let back = hfl_to_chc(&chc_to_hfl(&s).unwrap()).unwrap();
        assert_eq!(back.predicates.len(), 1);
    }
}
