//! Seeded generators shared by the property suites.

#![allow(dead_code)]

use hflz::lts::Lts;
use hflz::syntax::{CmpOp, FixKind, Formula, IntExpr, LinearAtom, Name, Type};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const LABELS: [&str; 2] = ["a", "b"];

/// A system with one to four states over labels `a` and `b`.
pub fn lts(r: &mut impl Rng) -> Lts {
    let n = r.gen_range(1..=4);
    let names: Vec<String> = (0..n).map(|i| format!("s{}", i)).collect();
    let mut trans = Vec::new();
    for s in &names {
        for l in LABELS {
            for t in &names {
                if r.gen_bool(0.3) {
                    trans.push((s.as_str(), l, t.as_str()));
                }
            }
        }
    }
    let states: Vec<&str> = names.iter().map(String::as_str).collect();
    Lts::new(&states, states[0], &trans).expect("generated system is well formed")
}

/// Variables in scope: `prop` ones can be used directly, `prop -> prop`
/// ones only applied.
#[derive(Clone, Default)]
struct Scope {
    props: Vec<Name>,
    funs: Vec<Name>,
}

/// A closed pure formula of type prop, with fixpoints of type prop and
/// prop -> prop.
pub fn pure_formula(r: &mut impl Rng, depth: u32) -> Formula {
    pure(r, depth, &Scope::default())
}

fn pure(r: &mut impl Rng, depth: u32, sc: &Scope) -> Formula {
    if depth == 0 || r.gen_bool(0.1) {
        return leaf(r, sc);
    }
    let a = LABELS[r.gen_range(0..2)];
    match r.gen_range(0..8) {
        0 => Formula::and(pure(r, depth - 1, sc), pure(r, depth - 1, sc)),
        1 => Formula::or(pure(r, depth - 1, sc), pure(r, depth - 1, sc)),
        2 => Formula::diamond(a, pure(r, depth - 1, sc)),
        3 => Formula::boxed(a, pure(r, depth - 1, sc)),
        4 => {
            let x = Name::fresh("x");
            let mut inner = sc.clone();
            inner.props.push(x.clone());
            let k = if r.gen_bool(0.5) { FixKind::Mu } else { FixKind::Nu };
            Formula::Fix(k, x, Type::Prop, Box::new(pure(r, depth - 1, &inner)))
        }
        5 => {
            // (σf. λy. body) arg with f : prop -> prop
            let (f, y) = (Name::fresh("f"), Name::fresh("y"));
            let mut inner = sc.clone();
            inner.props.push(y.clone());
            inner.funs.push(f.clone());
            let k = if r.gen_bool(0.5) { FixKind::Mu } else { FixKind::Nu };
            let ty = Type::arrow(Type::Prop, Type::Prop);
            let body = Formula::lambda(y, Type::Prop, pure(r, depth - 1, &inner));
            Formula::app(Formula::Fix(k, f, ty, Box::new(body)), pure(r, depth - 1, sc))
        }
        6 if !sc.funs.is_empty() => {
            let f = sc.funs[r.gen_range(0..sc.funs.len())].clone();
            Formula::app(Formula::Var(f), pure(r, depth - 1, sc))
        }
        _ => {
            // the usual recursion shape: a local test or a step
            let step = if r.gen_bool(0.5) { Formula::diamond(a, leaf(r, sc)) } else { Formula::boxed(a, leaf(r, sc)) };
            if r.gen_bool(0.5) {
                Formula::or(pure(r, depth - 1, sc), step)
            } else {
                Formula::and(pure(r, depth - 1, sc), step)
            }
        }
    }
}

fn leaf(r: &mut impl Rng, sc: &Scope) -> Formula {
    if !sc.props.is_empty() && r.gen_bool(0.6) {
        return Formula::Var(sc.props[r.gen_range(0..sc.props.len())].clone());
    }
    match r.gen_range(0..4) {
        0 => Formula::True,
        1 => Formula::False,
        _ => Formula::diamond(LABELS[r.gen_range(0..2)], Formula::True),
    }
}

fn int_atom(r: &mut impl Rng, vars: &[Name]) -> Formula {
    let ops = [CmpOp::Le, CmpOp::Lt, CmpOp::Ge, CmpOp::Gt, CmpOp::Eq, CmpOp::Ne];
    let op = ops[r.gen_range(0..ops.len())];
    let lhs = IntExpr::Var(vars[r.gen_range(0..vars.len())].clone());
    let rhs = if vars.len() > 1 && r.gen_bool(0.3) {
        IntExpr::Var(vars[r.gen_range(0..vars.len())].clone()).offset(r.gen_range(-2..=2))
    } else {
        IntExpr::Const(r.gen_range(-3..=3))
    };
    Formula::Atom(LinearAtom::new(op, lhs, rhs))
}

/// A closed first-order formula without modalities: one recursive integer
/// predicate (μ or ν) applied to a constant or a quantified variable.
pub fn first_order(r: &mut impl Rng, kind: FixKind) -> Formula {
    let x = Name::fresh("x");
    let y = Name::fresh("y");
    let ys = [y.clone()];
    let step = r.gen_range(1..=2) * if r.gen_bool(0.5) { 1 } else { -1 };
    let call = Formula::app(Formula::Var(x.clone()), IntExpr::Var(y.clone()).offset(step));
    let guard = int_atom(r, &ys);
    let body = match r.gen_range(0..4) {
        0 => Formula::or(guard, call),
        1 => Formula::and(guard, call),
        2 => Formula::or(guard, Formula::and(int_atom(r, &ys), call)),
        _ => Formula::and(guard, Formula::or(int_atom(r, &ys), call)),
    };
    let ty = Type::arrow(Type::Int, Type::Prop);
    let pred = Formula::Fix(kind, x, ty, Box::new(Formula::lambda(y, Type::Int, body)));
    if r.gen_bool(0.5) {
        Formula::app(pred, IntExpr::Const(r.gen_range(-4..=4)))
    } else {
        let i = Name::fresh("i");
        let app = Formula::app(pred, IntExpr::Var(i.clone()));
        let range = Formula::Atom(LinearAtom::new(CmpOp::Gt, IntExpr::Var(i.clone()), IntExpr::Const(6)));
        let f = Formula::or(Formula::or(Formula::Atom(LinearAtom::new(
            CmpOp::Lt,
            IntExpr::Var(i.clone()),
            IntExpr::Const(-6),
        )), range), app);
        Formula::forall(i, f)
    }
}
