//! Seeded random generators of expressions and points, size-bounded.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{DElem, Point};
use crate::syntax::{Bag, Hint, Sum, Syntax, Term, Test, Var, VarName};

pub struct Gen {
    rng: ChaCha8Rng,
    /// Allow τ̄ and tests inside terms.
    pub tests: bool,
    /// Allow promoted parts in bags.
    pub promotion: bool,
    /// Free variables available at the leaves.
    pub free: Vec<VarName>,
    /// Maximum number of resources per bag or elements per test.
    pub max_arity: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), tests: true, promotion: false, free: Vec::new(), max_arity: 3 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn min_term(&self, depth: usize) -> usize {
        if depth + self.free.len() > 0 {
            1
        } else {
            2
        }
    }

    fn var(&mut self, depth: usize) -> Term {
        let n = depth + self.free.len();
        let i = self.rng.gen_range(0..n);
        if i < depth {
            Term::Var(Var::Bound(i))
        } else {
            Term::var(&self.free[i - depth])
        }
    }

    fn combinator(&mut self, budget: usize) -> Option<Term> {
        let mut pool = vec![Term::identity(), Term::true_(), Term::false_(), Term::duplicator()];
        if self.tests {
            pool.push(Term::taubar(Test::epsilon()));
            pool.push(Term::Lam(Hint::new("x"), Box::new(Term::taubar(Test::epsilon()))));
        }
        if self.promotion {
            pool.push(Term::delta());
        }
        let fits: Vec<Term> = pool.into_iter().filter(|t| t.size() <= budget).collect();
        fits.choose(&mut self.rng).cloned()
    }

    /// A random term of size at most `budget` under `depth` binders.
    pub fn term_at(&mut self, budget: usize, depth: usize) -> Term {
        let min = self.min_term(depth);
        assert!(budget >= min, "budget below minimal term size");
        let has_vars = depth + self.free.len() > 0;
        let r = self.rng.gen_range(0..100);
        if has_vars && (budget == 1 || r < 25 || (budget <= 3 && r < 50)) {
            return self.var(depth);
        }
        if r >= 88 {
            if let Some(c) = self.combinator(budget) {
                return c;
            }
        }
        let mut options = vec![0u8];
        if budget >= 1 + min + 1 {
            options.extend([1, 1, 1]);
        }
        if self.tests {
            options.push(2);
        }
        match *options.choose(&mut self.rng).unwrap() {
            0 => {
                let body = self.term_at(budget - 1, depth + 1);
                Term::Lam(Hint::new("x"), Box::new(body))
            }
            1 => {
                let head_max = budget - 2;
                let hb = self.rng.gen_range(min..=head_max);
                let head = self.term_at(hb, depth);
                let bag = self.bag_at(budget - 1 - head.size(), depth);
                Term::app(head, bag)
            }
            _ => Term::taubar(self.test_at(budget - 1, depth)),
        }
    }

    fn elements(&mut self, mut left: usize, depth: usize) -> Vec<Term> {
        let min = self.min_term(depth);
        let most = (left / min).min(self.max_arity);
        let k = if most == 0 { 0 } else { self.rng.gen_range(0..=most) };
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            let reserve = (k - j - 1) * min;
            let hi = left - reserve;
            let b = if hi > min { self.rng.gen_range(min..=hi.min(min + 6)) } else { min };
            let t = self.term_at(b, depth);
            left -= t.size();
            out.push(t);
        }
        out
    }

    pub fn bag_at(&mut self, budget: usize, depth: usize) -> Bag {
        let min = self.min_term(depth);
        let mut left = budget - 1;
        let mut promoted = Sum::zero();
        if self.promotion && left > min && self.rng.gen_bool(0.4) {
            let pb = self.rng.gen_range(min..=(left - 1).min(min + 4));
            left -= 1;
            let n = if pb >= 2 * min && self.rng.gen_bool(0.3) { 2 } else { 1 };
            let mut pleft = pb;
            for j in 0..n {
                let b = if j + 1 == n { pleft } else { pleft / 2 };
                if b < min {
                    break;
                }
                let t = self.term_at(b, depth);
                pleft -= t.size();
                left -= t.size();
                promoted.insert(t);
            }
        }
        Bag::new(self.elements(left, depth), promoted)
    }

    pub fn test_at(&mut self, budget: usize, depth: usize) -> Test {
        Test::new(self.elements(budget - 1, depth))
    }

    pub fn term(&mut self, max_size: usize) -> Term {
        self.term_at(max_size, 0)
    }

    pub fn test(&mut self, max_size: usize) -> Test {
        self.test_at(max_size, 0)
    }

    pub fn bag(&mut self, max_size: usize) -> Bag {
        self.bag_at(max_size, 0)
    }

    /// A sum of up to `n` terms, each of size at most `max_size`.
    pub fn term_sum(&mut self, max_size: usize, n: usize) -> Sum<Term> {
        let k = self.rng.gen_range(1..=n);
        (0..k).map(|_| self.term(max_size)).collect()
    }

    pub fn test_sum(&mut self, max_size: usize, n: usize) -> Sum<Test> {
        let k = self.rng.gen_range(1..=n);
        (0..k).map(|_| self.test(max_size)).collect()
    }

    /// A point over `vars` drawn from `pool`, with multisets of cardinality at most `max_width`.
    pub fn point(&mut self, vars: &[VarName], pool: &[DElem], max_width: usize) -> Point {
        let env = vars
            .iter()
            .map(|x| {
                let k = self.rng.gen_range(0..=max_width.min(2));
                let m = (0..k).map(|_| pool.choose(&mut self.rng).unwrap().clone()).collect();
                (x.clone(), m)
            })
            .collect();
        Point::new(env, pool.choose(&mut self.rng).unwrap().clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_respect_budget() {
        let mut g = Gen::new(1);
        g.free = vec![VarName::new("x").unwrap(), VarName::new("y").unwrap()];
        for b in 1..30 {
            for _ in 0..20 {
                let t = g.term(b);
                assert!(t.size() <= b && t.is_locally_closed() && t.is_promotion_free());
            }
        }
        let mut g = Gen::new(2);
        g.promotion = true;
        for b in 2..30 {
            for _ in 0..20 {
                let v = g.test(b);
                assert!(v.size() <= b && v.is_closed());
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a: Vec<Term> = { let mut g = Gen::new(9); (0..10).map(|_| g.term(12)).collect() };
        let b: Vec<Term> = { let mut g = Gen::new(9); (0..10).map(|_| g.term(12)).collect() };
        assert_eq!(a, b);
    }
}
