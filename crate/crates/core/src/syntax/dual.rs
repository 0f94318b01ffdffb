use super::{Arg, Formula, LinearAtom, ModalKind, QuantKind};

/// De Morgan dual. For closed `φ` of type prop, `dual(φ)` denotes the
/// complement of `φ`. Bound variables keep their names; free predicate
/// variables stand for their own duals.
pub fn dualize(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Var(_) => f.clone(),
        Formula::Atom(a) => Formula::Atom(LinearAtom::negate(a)),
        Formula::Or(a, b) => Formula::and(dualize(a), dualize(b)),
        Formula::And(a, b) => Formula::or(dualize(a), dualize(b)),
        Formula::Modal(k, l, b) => {
            let k2 = match k {
                ModalKind::Diamond => ModalKind::Box,
                ModalKind::Box => ModalKind::Diamond,
            };
            Formula::Modal(k2, l.clone(), Box::new(dualize(b)))
        }
        Formula::Fix(k, x, t, b) => Formula::Fix(k.dual(), x.clone(), t.clone(), Box::new(dualize(b))),
        Formula::Lambda(x, t, b) => Formula::Lambda(x.clone(), t.clone(), Box::new(dualize(b))),
        Formula::App(h, a) => {
            let a2 = match a {
                Arg::Int(e) => Arg::Int(e.clone()),
                Arg::Formula(g) => Arg::formula(dualize(g)),
            };
            Formula::App(Box::new(dualize(h)), a2)
        }
        Formula::Quant(k, x, lb, b) => {
            let k2 = match k {
                QuantKind::Forall => QuantKind::Exists,
                QuantKind::Exists => QuantKind::Forall,
            };
            Formula::Quant(k2, x.clone(), lb.clone(), Box::new(dualize(b)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{alpha_eq, parse_formula};
    use super::*;

    #[test]
    fn dual_swaps_connectives() {
        let f = parse_formula("mu x: int -> prop. \\y: int. y <= 0 \\/ <a>x (y - 1)").unwrap();
        let g = parse_formula("nu x: int -> prop. \\y: int. y > 0 /\\ [a]x (y - 1)").unwrap();
        assert!(alpha_eq(&dualize(&f), &g));
    }

    #[test]
    fn dual_is_involutive_on_samples() {
        for src in [
            "forall n >= 0. exists m. n = m \\/ n != m + 1",
            "(nu x: prop -> prop. \\p: prop. p /\\ x p) true",
        ] {
            let f = parse_formula(src).unwrap();
            assert!(alpha_eq(&dualize(&dualize(&f)), &f));
        }
    }
}
