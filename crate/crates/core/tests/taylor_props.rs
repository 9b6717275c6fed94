mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rlct::definability::member_by_test_full;
use rlct::model::{elements_by_weight, points_by_weight, Bounds};
use rlct::reduce::{closed_test_outcome, converges, Fuel, Outcome, Reducible};
use rlct::taylor::{simulation_check, taylor_contains, taylor_enumerate, taylor_member, Taylor};
use rlct::{Bag, Sum, Syntax, Term, Test};

use common::gen;

/// Approximants with at most `copies` copies per promoted part, unpruned.
fn approx(t: &Term, copies: usize) -> BTreeSet<Term> {
    match t {
        Term::Var(_) => BTreeSet::from([t.clone()]),
        Term::Lam(h, b) => approx(b, copies).into_iter().map(|b| Term::Lam(h.clone(), Box::new(b))).collect(),
        Term::App(m, p) => {
            let ps = approx_bag(p, copies);
            let mut out = BTreeSet::new();
            for m2 in approx(m, copies) {
                for p2 in &ps {
                    out.insert(Term::app(m2.clone(), p2.clone()));
                }
            }
            out
        }
        Term::TauBar(v) => approx_test(v, copies).into_iter().map(Term::taubar).collect(),
    }
}

fn products(parts: &[BTreeSet<Term>]) -> Vec<Vec<Term>> {
    let mut acc = vec![Vec::new()];
    for p in parts {
        acc = acc.into_iter().flat_map(|v| p.iter().map(move |t| [v.clone(), vec![t.clone()]].concat())).collect();
    }
    acc
}

fn approx_bag(p: &Bag, copies: usize) -> BTreeSet<Bag> {
    let lin: Vec<BTreeSet<Term>> = p.linear_part().iter().map(|l| approx(l, copies)).collect();
    let prom: BTreeSet<Term> = p.promoted_part().iter().flat_map(|n| approx(n, copies)).collect();
    let mut out = BTreeSet::new();
    for n in 0..=if p.promoted_part().is_zero() { 0 } else { copies } {
        let extra = vec![prom.clone(); n];
        for ls in products(&[lin.clone(), extra].concat()) {
            out.insert(Bag::linear(ls));
        }
    }
    out
}

fn approx_test(v: &Test, copies: usize) -> BTreeSet<Test> {
    let els: Vec<BTreeSet<Term>> = v.elements().iter().map(|e| approx(e, copies)).collect();
    products(&els).into_iter().map(Test::new).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn enumeration_is_sound(seed: u64, bound in 4usize..13) {
        let mut g = gen(seed, &["x", "y"], true);
        let a = g.term_sum(10, 2);
        for e in &taylor_enumerate(&a, bound) {
            prop_assert!(e.size() <= bound && e.is_promotion_free());
            prop_assert!(taylor_contains(e, &a));
        }
        let q = Sum::single(g.test(10));
        for e in &taylor_enumerate(&q, bound) {
            prop_assert!(taylor_contains(e, &q));
        }
    }

    #[test]
    fn enumeration_matches_brute_force(seed: u64, bound in 2usize..8) {
        let mut g = gen(seed, &["x", "y"], true);
        g.max_arity = 2;
        let t = g.term(6);
        let brute: Sum<Term> = approx(&t, bound).into_iter().filter(|e| e.size() <= bound).collect();
        prop_assert_eq!(taylor_enumerate(&Sum::single(t.clone()), bound), brute);
    }

    #[test]
    fn promotion_free_terms_expand_to_themselves(seed: u64) {
        let mut g = gen(seed, &["x"], false);
        let t = g.term(14);
        prop_assert_eq!(taylor_enumerate(&Sum::single(t.clone()), t.size()), Sum::single(t.clone()));
        prop_assert_eq!(t.min_size(), t.size());
    }

    #[test]
    fn head_steps_are_simulated(seed: u64) {
        let mut g = gen(seed, &["x", "y"], true);
        let a = g.term(12);
        if !a.head_steps().is_empty() {
            for e in a.expand_upto(12).iter().filter(|e| !e.head_steps().is_empty()).take(5) {
                prop_assert_eq!(simulation_check(&a, e), Ok(true), "{} with {}", a, e);
            }
        }
        let v = g.test(12);
        if !v.head_steps().is_empty() {
            for e in v.expand_upto(12).iter().filter(|e| !e.head_steps().is_empty()).take(5) {
                prop_assert_eq!(simulation_check(&v, e), Ok(true), "{} with {}", v, e);
            }
        }
    }

    #[test]
    fn convergence_transfers_from_approximants(seed: u64) {
        let mut g = gen(seed, &[], true);
        let v = g.test(14);
        let found = taylor_enumerate(&Sum::single(v.clone()), 14)
            .into_iter()
            .any(|e| closed_test_outcome(&e).unwrap() == Outcome::Epsilon);
        if found {
            prop_assert_eq!(converges(&v, Fuel::default()).unwrap(), Outcome::Epsilon);
        }
    }

    #[test]
    fn membership_routes_agree(seed: u64, nvars in 0usize..2) {
        let mut g = gen(seed, &["x"][..nvars], true);
        let m = g.term(9);
        let env = g.free.clone();
        let mut pts = points_by_weight(&env, Bounds::new(2, 2, 2), 12);
        pts.push(g.point(&env, &elements_by_weight(Bounds::new(2, 2, 2), 5), 2));
        for p in &pts {
            match member_by_test_full(&m, p, Fuel::new(2000)).unwrap() {
                Outcome::Unknown(_) => {}
                o => prop_assert_eq!(o == Outcome::Epsilon, taylor_member(&m, p, 16).unwrap(), "{} at {}", m, p),
            }
        }
    }
}
