mod common;

use hflz::chc::{emit_smtlib_horn, hfl_to_chc, parse_horn};
use hflz::lts::{parse_lts, print_lts};
use hflz::semantics::{check_pure, eval_bounded};
use hflz::syntax::{
    alpha_eq, beta_step_anywhere, dualize, parse_formula, typecheck_closed, unfold_leftmost, FixKind,
};
use hflz::transforms::eliminate_mu_scaled;
use proptest::prelude::*;
use rand::Rng as _;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dualize_is_an_involution(seed in any::<u64>()) {
        let f = common::pure_formula(&mut common::rng(seed), 4);
        prop_assert!(alpha_eq(&dualize(&dualize(&f)), &f));
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        for f in [common::pure_formula(&mut r, 4), common::first_order(&mut r, FixKind::Mu)] {
            let g = parse_formula(&f.to_string()).unwrap();
            prop_assert!(alpha_eq(&f, &g), "{} vs {}", f, g);
        }
    }

    #[test]
    fn rewriting_preserves_types_and_meaning(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::lts(&mut r);
        let f = common::pure_formula(&mut r, 4);
        let t = typecheck_closed(&f).unwrap();
        let want = check_pure(&m, &f).unwrap();
        prop_assert_eq!(typecheck_closed(&dualize(&f)).unwrap(), t.clone());
        let mut g = f.clone();
        for _ in 0..3 {
            if let Ok(h) = unfold_leftmost(&g) {
                g = h;
            }
            if let Ok(h) = beta_step_anywhere(&g) {
                g = h;
            }
            prop_assert_eq!(typecheck_closed(&g).unwrap(), t.clone());
            prop_assert_eq!(check_pure(&m, &g).unwrap(), want);
        }
    }

    #[test]
    fn lts_round_trip(seed in any::<u64>()) {
        let m = common::lts(&mut common::rng(seed));
        prop_assert_eq!(parse_lts(&print_lts(&m)).unwrap(), m);
    }

    #[test]
    fn horn_round_trip(seed in any::<u64>()) {
        let f = common::first_order(&mut common::rng(seed), FixKind::Nu);
        let s = hfl_to_chc(&f).unwrap();
        prop_assert_eq!(parse_horn(&emit_smtlib_horn(&s)).unwrap(), s);
    }

    #[test]
    fn bounded_truth_grows_with_the_window(seed in any::<u64>()) {
        // ∀-free formulas only; windowed ∀ is not monotone
        let mut r = common::rng(seed);
        let f = loop {
            let kind = if r.gen_bool(0.5) { FixKind::Mu } else { FixKind::Nu };
            let f = common::first_order(&mut r, kind);
            if !f.has_quantifiers() {
                break f;
            }
        };
        let mut prev = false;
        for b in [4, 8, 16] {
            let now = eval_bounded(&f, b, None).unwrap();
            prop_assert!(!prev || now, "{} true at a smaller window, false at {}", f, b);
            prev = now;
        }
    }

    #[test]
    fn scaled_elimination_removes_mu(seed in any::<u64>(), k in 1i64..6) {
        let f = common::first_order(&mut common::rng(seed), FixKind::Mu);
        let g = eliminate_mu_scaled(&f, k).unwrap();
        prop_assert!(!g.has_mu());
        prop_assert_eq!(typecheck_closed(&g).unwrap(), typecheck_closed(&f).unwrap());
    }
}
