mod common;

use hflz::semantics::check_pure;
use hflz::syntax::{dualize, typecheck_closed, Type};

const CASES: u64 = 256;

#[test]
fn formula_xor_dual_on_small_systems() {
    let mut valid = 0;
    for seed in 0..CASES {
        let mut r = common::rng(seed);
        let m = common::lts(&mut r);
        let f = common::pure_formula(&mut r, 6);
        assert_eq!(typecheck_closed(&f), Ok(Type::Prop), "seed {}: {}", seed, f);
        let d = dualize(&f);
        let a = check_pure(&m, &f).unwrap();
        let b = check_pure(&m, &d).unwrap();
        assert!(a ^ b, "seed {}: {} and its dual {} agree ({})", seed, f, d, a);
        valid += a as u32;
    }
    // both outcomes must be exercised
    assert!(valid > 20 && valid < CASES as u32 - 20, "{} valid of {}", valid, CASES);
}
