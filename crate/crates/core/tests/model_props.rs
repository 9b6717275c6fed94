mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rlct::model::{elements_by_weight, interp_member_sum, multisets, Bounds, DElem, Point};
use rlct::reduce::{normalize, step, Strategy};
use rlct::subst::{lsubst_sum, subst_sum};
use rlct::{Sum, Syntax, Term, VarName};

use common::{gen, name, term};

/// Elements the decomposition searches range over.
fn pool() -> Vec<DElem> {
    elements_by_weight(Bounds::new(3, 2, 4), 10)
}

fn small(pool: &[DElem]) -> Vec<DElem> {
    pool.iter().filter(|d| d.weight() <= 4).cloned().collect()
}

fn with_env(p: &Point, x: &VarName, m: Vec<DElem>) -> Point {
    let env = p.env.iter().map(|(y, a)| if y == x { (y.clone(), m.clone()) } else { (y.clone(), a.clone()) }).collect();
    Point::new(env, p.target.clone())
}

fn member(m: &Sum<Term>, p: &Point) -> bool {
    interp_member_sum(m, p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn interpretation_is_invariant_under_steps(seed: u64) {
        let pool = small(&pool());
        let mut g = gen(seed, &["x", "y"], false);
        let vars = [name("x"), name("y")];
        let m = Sum::single(g.term(14));
        let Some(m2) = step(&m, &mut Strategy::seeded(seed)) else { return Ok(()) };
        for _ in 0..10 {
            let p = g.point(&vars, &pool, 2);
            prop_assert_eq!(member(&m, &p), member(&m2, &p));
        }
    }

    #[test]
    fn linear_substitution_interpretation(seed: u64) {
        let pool = pool();
        let sm = small(&pool);
        let (x, y) = (name("x"), name("y"));
        let mut g = gen(seed, &["x", "x", "y"], false);
        let m = Sum::single(g.term(9));
        let mut gn = gen(seed.wrapping_add(3), &[], false);
        let n = Sum::single(gn.term(6));
        let sub = lsubst_sum(&m, &x, &n);
        let in_n: Vec<&DElem> = pool.iter().filter(|b| member(&n, &Point::closed((*b).clone()))).collect();
        for _ in 0..6 {
            let p = g.point(&[x.clone(), y.clone()], &sm, 2);
            let lhs = member(&sub, &p);
            let xs = p.env.iter().find(|(v, _)| *v == x).unwrap().1.clone();
            let rhs = in_n.iter().any(|b| {
                let mut a = xs.clone();
                a.push((*b).clone());
                member(&m, &with_env(&p, &x, a))
            });
            prop_assert_eq!(lhs, rhs, "M = {}, N = {}, p = {}", m, n, p);
        }
    }

    #[test]
    fn regular_substitution_interpretation(seed: u64) {
        let pool = pool();
        let sm = small(&pool);
        let (x, y) = (name("x"), name("y"));
        let mut g = gen(seed, &["x", "y"], false);
        let m = g.term(9);
        let k = m.degree(&x).unwrap();
        if k > 3 {
            return Ok(());
        }
        let m = Sum::single(m);
        let mut gn = gen(seed.wrapping_add(5), &[], false);
        let n = Sum::single(gn.term(6));
        let sub = subst_sum(&m, &x, &n);
        let in_n: Vec<DElem> = pool.iter().filter(|b| member(&n, &Point::closed((*b).clone()))).cloned().collect();
        let choices: Vec<Vec<DElem>> = multisets(&in_n, k).into_iter().filter(|a| a.len() == k).collect();
        for _ in 0..6 {
            let q = g.point(&[y.clone()], &sm, 2);
            let lhs = member(&sub, &q);
            let p = Point::new(vec![(x.clone(), vec![]), q.env[0].clone()], q.target.clone());
            let rhs = choices.iter().any(|a| member(&m, &with_env(&p, &x, a.clone())));
            prop_assert_eq!(lhs, rhs, "M = {}, N = {}, p = {}", m, n, q);
        }
    }

    #[test]
    fn contexts_are_monotone(seed: u64) {
        let slice: Vec<Point> = small(&pool()).into_iter().map(Point::closed).collect();
        let mut g = gen(seed, &[], false);
        let mut gk = gen(seed.wrapping_add(9), &[], false);
        // inclusions that hold in the model, not only on the slice
        let m = Sum::single(g.term(8));
        let n = if seed % 2 == 0 || !normalize(&m).unwrap().is_zero() {
            m.clone().union(Sum::single(gk.term(8)))
        } else {
            Sum::single(gk.term(8))
        };
        prop_assert!(slice.iter().all(|p| !member(&m, p) || member(&n, p)));
        let hole = name("h");
        let mut gc = gen(seed.wrapping_add(11), &["h"], false);
        for _ in 0..4 {
            let c = Sum::single(gc.term(8));
            let (cm, cn) = (subst_sum(&c, &hole, &m), subst_sum(&c, &hole, &n));
            for p in &slice {
                if member(&cm, p) {
                    prop_assert!(member(&cn, p), "C = {}, M = {}, N = {}, p = {}", c, m, n, p);
                }
            }
        }
    }
}

#[test]
fn level_members_have_smaller_rank() {
    for a in elements_by_weight(Bounds::default(), 9) {
        for level in a.levels() {
            assert!(level.iter().all(|b| b.rank() < a.rank()), "{a}");
        }
    }
}

#[test]
fn empty_interpretation_of_d_i() {
    let di = Sum::single(term("D[I]"));
    let mut rng = rlct::gen::Gen::new(3);
    let pool = pool();
    for _ in 0..200 {
        let a = pool.choose(rng.rng()).unwrap().clone();
        assert!(!member(&di, &Point::closed(a)));
    }
}
