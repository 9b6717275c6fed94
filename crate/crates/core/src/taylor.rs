//! Taylor expansion of full-calculus expressions into sets of
//! promotion-free approximants.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::definability::member_by_test;
use crate::model::{ModelError, Point};
use crate::reduce::Reducible;
use crate::syntax::{on_sum, Bag, ExprSum, Sum, Syntax, Term, Test};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaylorError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Sorts with a Taylor expansion.
pub trait Taylor: Reducible {
    /// Whether the promotion-free `cand` belongs to the expansion of `self`.
    fn expands_to(&self, cand: &Self) -> bool;
    /// All elements of the expansion of size at most `budget`.
    fn expand_upto(&self, budget: usize) -> BTreeSet<Self>;
    /// Size of the smallest element of the expansion.
    fn min_size(&self) -> usize;
}

impl Taylor for Term {
    fn expands_to(&self, cand: &Term) -> bool {
        match (self, cand) {
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Lam(_, a), Term::Lam(_, b)) => a.expands_to(b),
            (Term::App(m, p), Term::App(m2, p2)) => m.expands_to(m2) && p.expands_to(p2),
            (Term::TauBar(v), Term::TauBar(w)) => v.expands_to(w),
            _ => false,
        }
    }

    fn expand_upto(&self, budget: usize) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        if self.min_size() > budget {
            return out;
        }
        match self {
            Term::Var(_) => {
                out.insert(self.clone());
            }
            Term::Lam(h, b) => {
                for b2 in b.expand_upto(budget - 1) {
                    out.insert(Term::Lam(h.clone(), Box::new(b2)));
                }
            }
            Term::App(m, p) => {
                for m2 in m.expand_upto(budget - 1 - p.min_size()) {
                    for p2 in p.expand_upto(budget - 1 - m2.size()) {
                        out.insert(Term::app(m2.clone(), p2));
                    }
                }
            }
            Term::TauBar(v) => {
                for v2 in v.expand_upto(budget - 1) {
                    out.insert(Term::taubar(v2));
                }
            }
        }
        out
    }

    fn min_size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Lam(_, b) => 1 + b.min_size(),
            Term::App(m, p) => 1 + m.min_size() + p.min_size(),
            Term::TauBar(v) => 1 + v.min_size(),
        }
    }
}

/// Extend every partial choice (with its accumulated size) by one approximant of `t`.
fn extend_choices(parts: Vec<(usize, Vec<Term>)>, t: &Term, budget: usize, reserve: usize) -> Vec<(usize, Vec<Term>)> {
    let mut next = Vec::new();
    for (used, ls) in parts {
        let Some(room) = budget.checked_sub(used + reserve) else { continue };
        for l in t.expand_upto(room) {
            let mut v = ls.clone();
            let s = l.size();
            v.push(l);
            next.push((used + s, v));
        }
    }
    next
}

impl Taylor for Bag {
    fn expands_to(&self, cand: &Bag) -> bool {
        if !cand.promoted_part().is_zero() {
            return false;
        }
        let lin = self.linear_part();
        if cand.linear_part().len() < lin.len() {
            return false;
        }
        let mut used = vec![false; cand.linear_part().len()];
        match_linear(lin, self.promoted_part(), cand.linear_part(), &mut used)
    }

    fn expand_upto(&self, budget: usize) -> BTreeSet<Bag> {
        let mut out = BTreeSet::new();
        if self.min_size() > budget {
            return out;
        }
        let lin = self.linear_part();
        let mins: Vec<usize> = lin.iter().map(Taylor::min_size).collect();
        // the bag node itself costs 1
        let mut parts: Vec<(usize, Vec<Term>)> = vec![(1, Vec::new())];
        for (i, l) in lin.iter().enumerate() {
            let reserve: usize = mins[i + 1..].iter().sum();
            parts = extend_choices(parts, l, budget, reserve);
        }
        let promoted = self.promoted_part();
        for (used, ls) in parts {
            let room = budget - used;
            if promoted.is_zero() {
                out.insert(Bag::linear(ls));
                continue;
            }
            let mut copies: BTreeSet<Term> = BTreeSet::new();
            for n in promoted {
                copies.extend(n.expand_upto(room));
            }
            let copies: Vec<(usize, Term)> = copies.into_iter().map(|c| (c.size(), c)).collect();
            let mut acc = Vec::new();
            multisets_within(&copies, 0, room, &mut ls.clone(), &mut acc);
            out.extend(acc.into_iter().map(Bag::linear));
        }
        out
    }

    fn min_size(&self) -> usize {
        1 + self.linear_part().iter().map(Taylor::min_size).sum::<usize>()
    }
}

/// Every way of extending `cur` with a multiset of `copies` whose total size is `≤ room`.
fn multisets_within(copies: &[(usize, Term)], start: usize, room: usize, cur: &mut Vec<Term>, out: &mut Vec<Vec<Term>>) {
    out.push(cur.clone());
    for i in start..copies.len() {
        let (s, c) = &copies[i];
        if *s <= room {
            cur.push(c.clone());
            multisets_within(copies, i, room - s, cur, out);
            cur.pop();
        }
    }
}

/// Assign each linear resource of the pattern a distinct candidate element;
/// leftovers must all come from the promoted sum.
fn match_linear(lin: &[Term], promoted: &Sum<Term>, cand: &[Term], used: &mut [bool]) -> bool {
    match lin.split_first() {
        None => cand
            .iter()
            .zip(used.iter())
            .filter(|(_, u)| !**u)
            .all(|(c, _)| promoted.iter().any(|n| n.expands_to(c))),
        Some((l, rest)) => {
            for j in 0..cand.len() {
                if used[j] || (j > 0 && !used[j - 1] && cand[j - 1] == cand[j]) {
                    continue;
                }
                if l.expands_to(&cand[j]) {
                    used[j] = true;
                    let ok = match_linear(rest, promoted, cand, used);
                    used[j] = false;
                    if ok {
                        return true;
                    }
                }
            }
            false
        }
    }
}

impl Taylor for Test {
    fn expands_to(&self, cand: &Test) -> bool {
        if self.elements().len() != cand.elements().len() {
            return false;
        }
        let mut used = vec![false; cand.elements().len()];
        match_linear(self.elements(), &Sum::zero(), cand.elements(), &mut used)
    }

    fn expand_upto(&self, budget: usize) -> BTreeSet<Test> {
        if self.min_size() > budget {
            return BTreeSet::new();
        }
        let els = self.elements();
        let mins: Vec<usize> = els.iter().map(Taylor::min_size).collect();
        let mut parts: Vec<(usize, Vec<Term>)> = vec![(1, Vec::new())];
        for (i, l) in els.iter().enumerate() {
            let reserve: usize = mins[i + 1..].iter().sum();
            parts = extend_choices(parts, l, budget, reserve);
        }
        parts.into_iter().map(|(_, ls)| Test::new(ls)).collect()
    }

    fn min_size(&self) -> usize {
        1 + self.elements().iter().map(Taylor::min_size).sum::<usize>()
    }
}

/// `cand ∈ T(a)` for a summand-wise expansion of the sum `a`.
pub fn taylor_contains<T: Taylor>(cand: &T, a: &Sum<T>) -> bool {
    cand.is_promotion_free() && a.iter().any(|t| t.expands_to(cand))
}

/// `{ e ∈ T(a) : size(e) ≤ size_bound }`.
pub fn taylor_enumerate<T: Taylor>(a: &Sum<T>, size_bound: usize) -> Sum<T> {
    let mut out = Sum::zero();
    for t in a {
        for e in t.expand_upto(size_bound) {
            out.insert(e);
        }
    }
    out
}

pub fn taylor_enumerate_expr(a: &ExprSum, size_bound: usize) -> ExprSum {
    on_sum!(a, s => Syntax::wrap_sum(taylor_enumerate(s, size_bound)))
}

/// Check that one head step of `a_elem` is matched by some head step of `a`.
pub fn simulation_check<T: Taylor>(a: &T, a_elem: &T) -> Result<bool, TaylorError> {
    if !a_elem.is_promotion_free() || !a.expands_to(a_elem) {
        return Err(TaylorError::PreconditionViolated("the element is not in the Taylor expansion".into()));
    }
    let Some((_, b_elem)) = a_elem.head_steps().into_iter().next() else {
        return Err(TaylorError::PreconditionViolated("the element is in head normal form".into()));
    };
    Ok(a
        .head_steps()
        .into_iter()
        .any(|(_, b)| b_elem.iter().all(|e| taylor_contains(e, &b))))
}

/// Membership through the Taylor expansion: sound when true, bounded when false.
pub fn taylor_member(m: &Term, p: &Point, size_bound: usize) -> Result<bool, TaylorError> {
    for e in taylor_enumerate(&Sum::single(m.clone()), size_bound) {
        if member_by_test(&e, p)? {
            return Ok(true);
        }
    }
    Ok(false)
}
