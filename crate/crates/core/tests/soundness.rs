//! One-sided checks against the bounded oracle: a transformed formula that
//! is valid must have a valid original. The converse is never asserted.

mod common;

use hflz::lts::trivial_model;
use hflz::semantics::{check_pure, eval_bounded_with, Boundary, EvalConfig};
use hflz::syntax::{FixKind, Formula};
use hflz::transforms::{abstract_predicates, eliminate_mu, parse_predicates, BoundExpr, SmtEntailment};

const INSTANCES: u64 = 120;

fn oracle(f: &Formula, window: i64) -> bool {
    // quantified instances guard their variable to [-6, 6], so the oracle
    // windows stay wide enough to cover every unfolding
    let cfg = EvalConfig { boundary: Boundary::Bottom, ..EvalConfig::with_window(window) };
    eval_bounded_with(f, &trivial_model(), &cfg).unwrap().0
}

#[test]
fn eliminated_valid_implies_original_valid() {
    let mut proved = 0;
    for seed in 0..INSTANCES {
        let f = common::first_order(&mut common::rng(seed), FixKind::Mu);
        for n in [1, 2, 4, 8] {
            let g = eliminate_mu(&f, &BoundExpr::constant(n)).unwrap();
            if oracle(&g, 16) {
                proved += 1;
                for b in [16, 24, 32] {
                    assert!(oracle(&f, b), "seed {} bound {} window {}: {} | {}", seed, n, b, f, g);
                }
            }
        }
    }
    assert!(proved >= 100, "only {} eliminated instances were valid", proved);
}

#[test]
fn elimination_is_monotone_in_the_bound() {
    for seed in 0..INSTANCES {
        let f = common::first_order(&mut common::rng(seed), FixKind::Mu);
        let mut prev = false;
        for n in [1, 2, 3, 4, 6, 8] {
            let now = oracle(&eliminate_mu(&f, &BoundExpr::constant(n)).unwrap(), 16);
            assert!(!prev || now, "seed {}: valid below bound {} but not at it: {}", seed, n, f);
            prev = now;
        }
    }
}

#[test]
fn abstracted_valid_implies_original_valid() {
    let sets = ["*: _ > 0", "*: _ >= 0, _ <= 0", "*: _ > 2, _ < -2, _ = 0", "*: _ >= 1, _ <= -1"];
    let sets: Vec<_> = sets.iter().map(|s| parse_predicates(s).unwrap()).collect();
    let engine = SmtEntailment::z3();
    let (mut tried, mut proved) = (0, 0);
    for seed in 0..INSTANCES {
        let f = common::first_order(&mut common::rng(seed), FixKind::Nu);
        for p in &sets {
            let Ok(g) = abstract_predicates(&f, p, &engine) else { continue };
            tried += 1;
            assert!(g.is_pure(), "{}", g);
            if check_pure(&trivial_model(), &g).unwrap() {
                proved += 1;
                for b in [16, 32] {
                    let cfg = EvalConfig { boundary: Boundary::Polarity, ..EvalConfig::with_window(b) };
                    let ok = eval_bounded_with(&f, &trivial_model(), &cfg).unwrap().0;
                    assert!(ok, "seed {} preds {} window {}: {} | {}", seed, p, b, f, g);
                }
            }
        }
    }
    assert!(tried >= 100, "only {} abstractions succeeded", tried);
    assert!(proved >= 20, "only {} abstractions were valid", proved);
}
