//! Displayed artifacts reproduced through the public API, compared up to
//! α-equivalence.

use hflz::chc::{chc_to_hfl, hfl_to_chc, parse_horn};
use hflz::lts::{parse_lts, trivial_model};
use hflz::program::{parse_program, translate_program};
use hflz::semantics::{check_pure, eval_bounded};
use hflz::syntax::{
    alpha_eq, beta_step, beta_step_anywhere, order_of, parse_formula, typecheck_closed, unfold_head,
    unfold_leftmost, FixKind, Formula, Type,
};
use hflz::transforms::{
    abstract_predicates, desugar_quantifiers, eliminate_mu, parse_bound, parse_predicates, WindowEntailment,
};

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap_or_else(|e| panic!("{}: {}", s, e))
}

fn assert_alpha(got: &Formula, want: &str) {
    assert!(alpha_eq(got, &f(want)), "got  {}\nwant {}", got, want);
}

#[test]
fn quantifier_encodings() {
    let phi = "(\\v: int. v = 2)";
    let g = desugar_quantifiers(&f(&format!("exists x >= 0. {} x", phi)));
    assert_alpha(&g, &format!("(mu x: int -> prop. \\n: int. {} n \\/ x (n + 1)) 0", phi));
    let g = desugar_quantifiers(&f(&format!("forall x >= 0. {} x", phi)));
    assert_alpha(&g, &format!("(nu x: int -> prop. \\n: int. {} n /\\ x (n + 1)) 0", phi));
    let g = desugar_quantifiers(&f(&format!("forall x. {} x", phi)));
    assert_alpha(&g, &format!("(nu x: int -> prop. \\n: int. {} n /\\ x (n - 1) /\\ x (n + 1)) 0", phi));
}

const MULT: &str = "mu u: int -> int -> int -> prop. \\(x: int, y: int, z: int). \
    (y = 0 /\\ z = 0) \\/ (1 <= y /\\ u (x, y - 1, z - x)) \\/ (y + 1 <= 0 /\\ u (x, y + 1, z + x))";

#[test]
fn multiplication_predicate() {
    let m = f(MULT);
    assert_eq!(typecheck_closed(&m).unwrap(), Type::predicate(vec![Type::Int; 3]));
    for (x, y, z, want) in [(2, 3, 6, true), (2, 3, 5, false), (-1, -2, 2, true), (3, 0, 0, true)] {
        let g = f(&format!("({}) ({}, {}, {})", MULT, x, y, z));
        assert_eq!(eval_bounded(&g, 8, None).unwrap(), want, "mult {} {} {}", x, y, z);
    }
}

const ANBN: &str = "(nu x: prop -> prop. \\y: prop. y \\/ <a>(x (<b>y)))";

#[test]
fn anbn_expansion() {
    let phi = format!("{} (<c>true)", ANBN);
    // unfold, then β
    let s1 = unfold_head(&f(&phi)).unwrap();
    assert_alpha(&s1, &format!("(\\y: prop. y \\/ <a>({} (<b>y))) (<c>true)", ANBN));
    let s2 = beta_step(&s1).unwrap();
    assert_alpha(&s2, &format!("<c>true \\/ <a>({} (<b><c>true))", ANBN));
    // unfolding followed by β
    let s3 = beta_step_anywhere(&unfold_leftmost(&s2).unwrap()).unwrap();
    assert_alpha(&s3, &format!("<c>true \\/ <a>(<b><c>true \\/ <a>({} (<b><b><c>true)))", ANBN));
    let t = typecheck_closed(&f(ANBN)).unwrap();
    assert_eq!(order_of(&t), 1);
}

#[test]
fn mult_dual_formula() {
    let s = parse_horn(include_str!("../../../corpus/mult.smt2")).unwrap();
    let g = chc_to_hfl(&s).unwrap();
    assert_alpha(
        &g,
        "forall x, y, r. \
         (nu u: int -> int -> int -> prop. \\(x: int, y: int, r: int). \
            (y != 0 \\/ r != 0) /\\ (forall s. y = 0 \\/ u (x, y - 1, s) \\/ r != s + x)) (x, y, r) \
         \\/ x <= 0 \\/ r >= y",
    );
}

#[test]
fn program_translations() {
    let p = parse_program(include_str!("../../../corpus/file.prog")).unwrap();
    assert_alpha(&translate_program(&p, FixKind::Mu), "<read><read><close><end>true");
    let p = parse_program(include_str!("../../../corpus/file_rec.prog")).unwrap();
    assert_alpha(
        &translate_program(&p, FixKind::Mu),
        "(mu f: int -> prop -> prop. \\n: int. \\k: prop. \
           (n > 0 \\/ <close>k) /\\ (n <= 0 \\/ <read>(f (n - 1) k))) 10 (<end>true)",
    );
}

#[test]
fn eliminated_formula_and_clauses() {
    let phi = f(include_str!("../../../corpus/countdown.hfl"));
    let g = eliminate_mu(&phi, &parse_bound("max(i + 1, 1)").unwrap()).unwrap();
    assert_alpha(&g, include_str!("../../../corpus/worked.hfl"));
    let s = hfl_to_chc(&g).unwrap();
    let clauses: Vec<String> = s.clauses().map(|c| c.to_string()).collect();
    assert_eq!(
        clauses,
        ["z <= 0 => X(z, y)", "y > 0 /\\ X(z - 1, y - 1) => X(z, y)", "u >= i + 1 /\\ u >= 1 /\\ X(u, i) => false"]
    );
}

#[test]
fn abstracted_formula() {
    let phi = f("(nu x: int -> prop. \\y: int. y >= 0 /\\ x (y + 1)) 1");
    let p = parse_predicates("y: y > 0").unwrap();
    let g = abstract_predicates(&phi, &p, &WindowEntailment::new(8)).unwrap();
    assert_alpha(&g, "(nu x: prop -> prop. \\b: prop. b /\\ x b) true");
    assert!(check_pure(&trivial_model(), &g).unwrap());
}

#[test]
fn file_protocol_model() {
    let m = parse_lts(include_str!("../../../corpus/m_file.lts")).unwrap();
    assert!(check_pure(&m, &f("<read><read><close><end>true")).unwrap());
    assert!(!check_pure(&m, &f("<read><close><read><end>true")).unwrap());
}
