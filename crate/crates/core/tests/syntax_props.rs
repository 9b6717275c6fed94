mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rlct::syntax::{msize_lt, parse};
use rlct::{Bag, ExprSum, Sum, Syntax, Term};

use common::gen;

/// Multiset order by definition: `a < b` iff `a ≠ b` and every element in
/// excess in `a` is dominated by some element in excess in `b`.
fn dm_lt(a: &[usize], b: &[usize]) -> bool {
    let mut count: BTreeMap<usize, i64> = BTreeMap::new();
    a.iter().for_each(|&x| *count.entry(x).or_default() += 1);
    b.iter().for_each(|&x| *count.entry(x).or_default() -= 1);
    let more_a: Vec<usize> = count.iter().filter(|(_, &c)| c > 0).map(|(&k, _)| k).collect();
    let more_b: Vec<usize> = count.iter().filter(|(_, &c)| c < 0).map(|(&k, _)| k).collect();
    if more_a.is_empty() && more_b.is_empty() {
        return false;
    }
    more_a.iter().all(|y| more_b.iter().any(|x| y < x))
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn inserting_a_summand_is_idempotent(seed: u64, full: bool) {
        let mut g = gen(seed, &["x", "y"], full);
        let s = g.term_sum(12, 4);
        for t in &s {
            let mut s2 = s.clone();
            prop_assert!(!s2.insert(t.clone()));
            prop_assert_eq!(&s2, &s);
        }
        prop_assert_eq!(s.clone().union(s.clone()), s);
    }

    #[test]
    fn print_then_parse_is_identity(seed: u64, full: bool, tests: bool) {
        let mut g = gen(seed, &["x", "y", "z"], full);
        g.tests = tests;
        let t = g.term_sum(16, 3);
        prop_assert_eq!(parse(&t.to_string()).unwrap(), ExprSum::Terms(t.clone()));
        let q = g.test_sum(16, 2);
        prop_assert_eq!(parse(&q.to_string()).unwrap(), ExprSum::Tests(q.clone()));
        let b = g.bag(14);
        prop_assert_eq!(parse(&b.to_string()).unwrap(), ExprSum::Bags(Sum::single(b.clone())));
    }

    #[test]
    fn sizes_are_positive(seed: u64, full: bool) {
        let mut g = gen(seed, &["x"], full);
        prop_assert!(g.term(20).size() >= 1);
        prop_assert!(g.bag(20).size() >= 1);
        prop_assert!(g.test(20).size() >= 1);
    }

    #[test]
    fn multiset_order_matches_definition(a in prop::collection::vec(0usize..6, 0..6), b in prop::collection::vec(0usize..6, 0..6)) {
        let (a, b) = (sorted(a), sorted(b));
        prop_assert_eq!(msize_lt(&a, &b), dm_lt(&a, &b));
        prop_assert!(!msize_lt(&a, &a));
    }

    #[test]
    fn multiset_order_is_transitive(
        a in prop::collection::vec(0usize..5, 0..5),
        b in prop::collection::vec(0usize..5, 0..5),
        c in prop::collection::vec(0usize..5, 0..5),
    ) {
        let (a, b, c) = (sorted(a), sorted(b), sorted(c));
        if msize_lt(&a, &b) && msize_lt(&b, &c) {
            prop_assert!(msize_lt(&a, &c));
        }
        prop_assert!(!(msize_lt(&a, &b) && msize_lt(&b, &a)));
    }

    #[test]
    fn bag_union_laws(seed: u64) {
        let mut g = gen(seed, &["x", "y"], true);
        let (p, q, r) = (g.bag(10), g.bag(10), g.bag(10));
        prop_assert_eq!(p.union(&q), q.union(&p));
        prop_assert_eq!(p.union(&q).union(&r), p.union(&q.union(&r)));
        prop_assert_eq!(p.union(&Bag::empty()), p.clone());
        prop_assert_eq!(Bag::new(vec![], Sum::zero()), Bag::empty());
    }

    #[test]
    fn open_then_close_is_identity(seed: u64) {
        let mut g = gen(seed, &["x"], true);
        let t = g.term(14);
        if let Term::Lam(_, body) = &t {
            let (x, opened) = rlct::syntax::open_fresh(body);
            prop_assert_eq!(&opened.close(&x, 0), &**body);
        }
    }
}
