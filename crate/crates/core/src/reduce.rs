//! One-step reduction, normalization, head reduction and convergence.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::subst::{lsubst_bag_sum, subst_sum, Subst};
use crate::syntax::{
    app_sum, on_sum, open_fresh, Bag, ExprSum, Sum, Syntax, Term, Test, Var,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RedexKind {
    Beta,
    TauBarApp,
    TauLam,
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnknownReason {
    FuelExhausted,
    CycleDetected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Epsilon,
    Zero,
    Unknown(UnknownReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    pub max_rounds: usize,
}

impl Fuel {
    pub fn new(max_rounds: usize) -> Self {
        Fuel { max_rounds }
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel { max_rounds: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("expression is not promotion-free")]
    NotPromotionFree,
    #[error("test is not closed")]
    NotClosed,
}

/// Redex selector for [`step`].
#[derive(Clone, Debug)]
pub enum Strategy {
    LeftmostOutermost,
    Seeded(ChaCha8Rng),
}

impl Strategy {
    pub fn seeded(seed: u64) -> Self {
        Strategy::Seeded(ChaCha8Rng::seed_from_u64(seed))
    }
}

fn contract_app(t: &Term) -> Option<(RedexKind, Sum<Term>)> {
    let Term::App(h, p) = t else { return None };
    match &**h {
        Term::Lam(_, body) => Some((RedexKind::Beta, beta(body, p))),
        Term::TauBar(_) => {
            let r = if p.linear_part().is_empty() { Sum::single((**h).clone()) } else { Sum::zero() };
            Some((RedexKind::TauBarApp, r))
        }
        _ => None,
    }
}

/// `M⟨L̄/x⟩[ℕ/x]` for `λx.M` applied to `[L̄; ℕ!]`.
fn beta(body: &Term, p: &Bag) -> Sum<Term> {
    let (x, m) = open_fresh(body);
    if p.promoted_part().is_zero() {
        if let Ok(d) = m.degree(&x) {
            if d != p.linear_part().len() {
                return Sum::zero();
            }
        }
    }
    let r = lsubst_bag_sum(&Sum::single(m), &x, p.linear_part());
    subst_sum(&r, &x, p.promoted_part())
}

fn contract_test_elem(v: &Test, i: usize) -> Option<(RedexKind, Sum<Test>)> {
    let els = v.elements();
    let rest = || {
        let mut r = els.to_vec();
        r.remove(i);
        r
    };
    match &els[i] {
        Term::Lam(_, body) => {
            let (x, m) = open_fresh(body);
            let out = m
                .subst(&x, &Sum::zero())
                .map(|m2| {
                    let mut r = rest();
                    r.push(m2.clone());
                    Test::new(r)
                });
            Some((RedexKind::TauLam, out))
        }
        Term::TauBar(w) => {
            let mut r = rest();
            r.extend(w.elements().iter().cloned());
            Some((RedexKind::Gamma, Sum::single(Test::new(r))))
        }
        _ => None,
    }
}

fn is_app_redex(t: &Term) -> bool {
    matches!(t, Term::App(h, _) if h.is_lam() || h.is_taubar())
}

/// Sorts on which the contextual one-step relation is defined.
pub trait Reducible: Subst {
    fn count_redexes(&self) -> usize;
    /// Contract the redex with pre-order index `*n` (which must be `< count_redexes()`).
    fn step_nth(&self, n: &mut usize) -> Option<(RedexKind, Sum<Self>)>;
    fn head_steps(&self) -> Vec<(RedexKind, Sum<Self>)>;
}

impl Reducible for Term {
    fn count_redexes(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Lam(_, b) => b.count_redexes(),
            Term::App(m, p) => is_app_redex(self) as usize + m.count_redexes() + p.count_redexes(),
            Term::TauBar(v) => v.count_redexes(),
        }
    }

    fn step_nth(&self, n: &mut usize) -> Option<(RedexKind, Sum<Term>)> {
        match self {
            Term::Var(_) => None,
            Term::Lam(h, b) => {
                let (x, o) = open_fresh(b);
                let (k, s) = o.step_nth(n)?;
                Some((k, s.map(|r| Term::Lam(h.clone(), Box::new(r.close(&x, 0))))))
            }
            Term::App(m, p) => {
                if is_app_redex(self) {
                    if *n == 0 {
                        return contract_app(self);
                    }
                    *n -= 1;
                }
                let cm = m.count_redexes();
                if *n < cm {
                    let (k, s) = m.step_nth(n)?;
                    Some((k, s.map(|m2| Term::App(Box::new(m2.clone()), p.clone()))))
                } else {
                    *n -= cm;
                    let (k, s) = p.step_nth(n)?;
                    Some((k, s.map(|p2| Term::App(m.clone(), Box::new(p2.clone())))))
                }
            }
            Term::TauBar(v) => {
                let (k, s) = v.step_nth(n)?;
                Some((k, s.map(|w| Term::taubar(w.clone()))))
            }
        }
    }

    fn head_steps(&self) -> Vec<(RedexKind, Sum<Term>)> {
        head_step_term(self).into_iter().collect()
    }
}

impl Reducible for Bag {
    fn count_redexes(&self) -> usize {
        self.linear_part().iter().map(Reducible::count_redexes).sum::<usize>()
            + self.promoted_part().iter().map(Reducible::count_redexes).sum::<usize>()
    }

    fn step_nth(&self, n: &mut usize) -> Option<(RedexKind, Sum<Bag>)> {
        let lin = self.linear_part();
        for (i, l) in lin.iter().enumerate() {
            let c = l.count_redexes();
            if *n < c {
                let (k, s) = l.step_nth(n)?;
                let out = s.map(|l2| {
                    let mut v = lin.to_vec();
                    v[i] = l2.clone();
                    Bag::new(v, self.promoted_part().clone())
                });
                return Some((k, out));
            }
            *n -= c;
        }
        for p in self.promoted_part() {
            let c = p.count_redexes();
            if *n < c {
                let (k, s) = p.step_nth(n)?;
                let mut promoted = self.promoted_part().clone();
                promoted.remove(p);
                promoted.extend(s);
                return Some((k, Sum::single(Bag::new(lin.to_vec(), promoted))));
            }
            *n -= c;
        }
        None
    }

    fn head_steps(&self) -> Vec<(RedexKind, Sum<Bag>)> {
        Vec::new()
    }
}

impl Reducible for Test {
    fn count_redexes(&self) -> usize {
        self.elements()
            .iter()
            .map(|e| (e.is_lam() || e.is_taubar()) as usize + e.count_redexes())
            .sum()
    }

    fn step_nth(&self, n: &mut usize) -> Option<(RedexKind, Sum<Test>)> {
        let els = self.elements();
        for (i, e) in els.iter().enumerate() {
            if e.is_lam() || e.is_taubar() {
                if *n == 0 {
                    return contract_test_elem(self, i);
                }
                *n -= 1;
            }
            let c = e.count_redexes();
            if *n < c {
                let (k, s) = e.step_nth(n)?;
                let out = s.map(|e2| {
                    let mut v = els.to_vec();
                    v[i] = e2.clone();
                    Test::new(v)
                });
                return Some((k, out));
            }
            *n -= c;
        }
        None
    }

    fn head_steps(&self) -> Vec<(RedexKind, Sum<Test>)> {
        let els = self.elements();
        let mut out = Vec::new();
        for (i, e) in els.iter().enumerate() {
            if e.is_lam() || e.is_taubar() {
                out.extend(contract_test_elem(self, i));
                continue;
            }
            let (h, bags) = e.spine();
            if !bags.is_empty() && (h.is_lam() || h.is_taubar()) {
                if let Some((k, s)) = head_step_spine(e) {
                    let r = s.map(|e2| {
                        let mut v = els.to_vec();
                        v[i] = e2.clone();
                        Test::new(v)
                    });
                    out.push((k, r));
                }
            }
        }
        out
    }
}

/// Contract the innermost application of a spine `H P1 … Pn` whose head is a λ or τ̄.
fn head_step_spine(t: &Term) -> Option<(RedexKind, Sum<Term>)> {
    let Term::App(f, p) = t else { return None };
    if f.is_lam() || f.is_taubar() {
        return contract_app(t);
    }
    let (k, s) = head_step_spine(f)?;
    Some((k, app_sum(&s, &Sum::single((**p).clone()))))
}

fn head_step_term(t: &Term) -> Option<(RedexKind, Sum<Term>)> {
    match t {
        Term::Lam(h, b) => {
            let (x, o) = open_fresh(b);
            let (k, s) = head_step_term(&o)?;
            Some((k, s.map(|r| Term::Lam(h.clone(), Box::new(r.close(&x, 0))))))
        }
        Term::App(..) => head_step_spine(t),
        _ => None,
    }
}

fn replace_summand<T: Ord + Clone>(s: &Sum<T>, old: &T, new: Sum<T>) -> Sum<T> {
    let mut out = s.clone();
    out.remove(old);
    out.extend(new);
    out
}

/// Contract one redex chosen by `strategy`; `None` iff `s` is normal.
pub fn step_traced<T: Reducible>(s: &Sum<T>, strategy: &mut Strategy) -> Option<(RedexKind, Sum<T>)> {
    let counts: Vec<(usize, &T)> = s.iter().map(|t| (t.count_redexes(), t)).filter(|(c, _)| *c > 0).collect();
    if counts.is_empty() {
        return None;
    }
    let (mut n, t) = match strategy {
        Strategy::LeftmostOutermost => (0, counts[0].1),
        Strategy::Seeded(rng) => {
            let total: usize = counts.iter().map(|(c, _)| c).sum();
            let mut r = rng.gen_range(0..total);
            let mut pick = None;
            for (c, t) in &counts {
                if r < *c {
                    pick = Some((r, *t));
                    break;
                }
                r -= c;
            }
            pick.expect("index within total")
        }
    };
    let (k, c) = t.step_nth(&mut n)?;
    Some((k, replace_summand(s, t, c)))
}

pub fn step<T: Reducible>(s: &Sum<T>, strategy: &mut Strategy) -> Option<Sum<T>> {
    step_traced(s, strategy).map(|(_, r)| r)
}

pub fn step_expr(s: &ExprSum, strategy: &mut Strategy) -> Option<ExprSum> {
    on_sum!(s, s => step(s, strategy).map(Syntax::wrap_sum))
}

/// Normal form by iterating [`step`] with the given strategy.
pub fn normalize_with<T: Reducible>(s: &Sum<T>, strategy: &mut Strategy) -> Result<Sum<T>, ReduceError> {
    if !s.is_promotion_free() {
        return Err(ReduceError::NotPromotionFree);
    }
    let mut cur = s.clone();
    while let Some(next) = step(&cur, strategy) {
        cur = next;
    }
    Ok(cur)
}

/// Sorts with a direct normalizer for the promotion-free fragment.
pub trait Normalize: Reducible {
    fn nf(&self) -> Sum<Self>;
}

impl Normalize for Term {
    fn nf(&self) -> Sum<Term> {
        match self {
            Term::Var(_) => Sum::single(self.clone()),
            Term::Lam(h, b) => {
                let (x, o) = open_fresh(b);
                o.nf().map(|r| Term::Lam(h.clone(), Box::new(r.close(&x, 0))))
            }
            Term::TauBar(v) => v.nf().map(|w| Term::taubar(w.clone())),
            Term::App(m, p) => {
                let heads = m.nf();
                if heads.is_zero() {
                    return Sum::zero();
                }
                let bags = p.nf();
                let mut out = Sum::zero();
                for h in &heads {
                    for b in &bags {
                        out.extend(apply_normal(h, b));
                    }
                }
                out
            }
        }
    }
}

fn apply_normal(h: &Term, b: &Bag) -> Sum<Term> {
    match h {
        Term::Lam(_, body) => beta(body, b).flat_map(|r| r.nf()),
        Term::TauBar(_) => {
            if b.linear_part().is_empty() {
                Sum::single(h.clone())
            } else {
                Sum::zero()
            }
        }
        _ => Sum::single(Term::app(h.clone(), b.clone())),
    }
}

impl Normalize for Bag {
    fn nf(&self) -> Sum<Bag> {
        let choices: Vec<Vec<Term>> = self
            .linear_part()
            .iter()
            .map(|l| l.nf().into_iter().collect())
            .collect();
        crate::syntax::product(&choices)
            .into_iter()
            .map(|ls| Bag::new(ls, self.promoted_part().clone()))
            .collect()
    }
}

fn uses_outer_binder(body: &Term) -> bool {
    let mut found = false;
    body.visit_vars(0, false, &mut |v, d, _| {
        if matches!(v, Var::Bound(i) if *i == d) {
            found = true;
        }
    });
    found
}

/// Resolve the test-redexes of a test whose elements are all normal.
fn finish_test(elems: Vec<Term>) -> Option<Test> {
    let mut work = elems;
    let mut done = Vec::new();
    while let Some(e) = work.pop() {
        match e {
            Term::Lam(_, body) => {
                if uses_outer_binder(&body) {
                    return None;
                }
                work.push(*body);
            }
            Term::TauBar(w) => work.extend(w.elements().iter().cloned()),
            e => done.push(e),
        }
    }
    Some(Test::new(done))
}

impl Normalize for Test {
    fn nf(&self) -> Sum<Test> {
        let choices: Vec<Vec<Term>> = self
            .elements()
            .iter()
            .map(|l| l.nf().into_iter().collect())
            .collect();
        crate::syntax::product(&choices)
            .into_iter()
            .filter_map(finish_test)
            .collect()
    }
}

/// The unique normal form of a promotion-free sum.
pub fn normalize<T: Normalize>(s: &Sum<T>) -> Result<Sum<T>, ReduceError> {
    if !s.is_promotion_free() {
        return Err(ReduceError::NotPromotionFree);
    }
    Ok(s.flat_map(|t| t.nf()))
}

pub fn normalize_expr(s: &ExprSum) -> Result<ExprSum, ReduceError> {
    on_sum!(s, s => normalize(s).map(Syntax::wrap_sum))
}

/// Contract the leftmost-outermost head redex of the first reducible summand.
pub fn head_step<T: Reducible>(s: &Sum<T>) -> Option<Sum<T>> {
    for t in s {
        if let Some((_, c)) = t.head_steps().into_iter().next() {
            return Some(replace_summand(s, t, c));
        }
    }
    None
}

pub fn head_step_expr(s: &ExprSum) -> Option<ExprSum> {
    on_sum!(s, s => head_step(s).map(Syntax::wrap_sum))
}

pub fn is_head_normal<T: Reducible>(t: &T) -> bool {
    t.head_steps().is_empty()
}

/// One fair round: every head-reducible summand takes one head step.
fn head_round(s: &Sum<Test>) -> (bool, Sum<Test>) {
    let mut progressed = false;
    let mut out = Sum::zero();
    for t in s {
        match t.head_steps().into_iter().next() {
            Some((_, c)) => {
                progressed = true;
                out.extend(c);
            }
            None => {
                out.insert(t.clone());
            }
        }
    }
    (progressed, out)
}

fn decided(s: &Sum<Test>) -> Option<Outcome> {
    if s.contains(&Test::epsilon()) {
        Some(Outcome::Epsilon)
    } else if s.is_zero() {
        Some(Outcome::Zero)
    } else {
        None
    }
}

/// Outcome of a closed promotion-free test, by head reduction.
pub fn closed_test_outcome(v: &Test) -> Result<Outcome, ReduceError> {
    closed_sum_outcome(&Sum::single(v.clone()))
}

pub fn closed_sum_outcome(v: &Sum<Test>) -> Result<Outcome, ReduceError> {
    if !v.is_promotion_free() {
        return Err(ReduceError::NotPromotionFree);
    }
    if !v.is_closed() {
        return Err(ReduceError::NotClosed);
    }
    let mut cur = v.clone();
    loop {
        if let Some(o) = decided(&cur) {
            return Ok(o);
        }
        let (progressed, next) = head_round(&cur);
        if !progressed {
            return Ok(Outcome::Zero);
        }
        cur = next;
    }
}

const VISITED_CAP: usize = 4096;

/// Fair head reduction of a closed test of either calculus, within `fuel` rounds.
pub fn converges(v: &Test, fuel: Fuel) -> Result<Outcome, ReduceError> {
    converges_sum(&Sum::single(v.clone()), fuel)
}

pub fn converges_sum(v: &Sum<Test>, fuel: Fuel) -> Result<Outcome, ReduceError> {
    if !v.is_closed() {
        return Err(ReduceError::NotClosed);
    }
    let mut seen: HashSet<Sum<Test>> = HashSet::new();
    let mut order: VecDeque<Sum<Test>> = VecDeque::new();
    let mut cur = v.clone();
    let mut rounds = 0;
    loop {
        if let Some(o) = decided(&cur) {
            return Ok(o);
        }
        if !seen.insert(cur.clone()) {
            return Ok(Outcome::Unknown(UnknownReason::CycleDetected));
        }
        order.push_back(cur.clone());
        if order.len() > VISITED_CAP {
            if let Some(old) = order.pop_front() {
                seen.remove(&old);
            }
        }
        if rounds >= fuel.max_rounds {
            return Ok(Outcome::Unknown(UnknownReason::FuelExhausted));
        }
        let (progressed, next) = head_round(&cur);
        if !progressed {
            return Ok(Outcome::Zero);
        }
        cur = next;
        rounds += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_test};

    fn t(s: &str) -> Sum<Term> {
        parse_term(s).unwrap()
    }
    fn q(s: &str) -> Test {
        parse_test(s).unwrap().into_iter().next().unwrap()
    }

    #[test]
    fn step_examples() {
        let mut lo = Strategy::LeftmostOutermost;
        assert_eq!(step(&t("D[I, F]"), &mut lo), Some(t("I[F] + F[I]")));
        assert_eq!(step(&t("tbar(eps)[I]"), &mut lo), Some(Sum::zero()));
        assert_eq!(step(&t("(\\x.tbar(eps)[; x!])[; I!]"), &mut lo), Some(t("tbar(eps)[; I!]")));
        assert_eq!(step(&t("x"), &mut lo), None);
    }

    #[test]
    fn step_kinds() {
        let mut lo = Strategy::LeftmostOutermost;
        let k = |s: &str, lo: &mut Strategy| step_traced(&parse_test(s).unwrap(), lo).map(|(k, _)| k);
        assert_eq!(k("tau[I]", &mut lo), Some(RedexKind::TauLam));
        assert_eq!(k("tau[tbar(eps)]", &mut lo), Some(RedexKind::Gamma));
        assert_eq!(k("tau[tbar(eps)[]]", &mut lo), Some(RedexKind::TauBarApp));
        assert_eq!(k("tau[I[x]]", &mut lo), Some(RedexKind::Beta));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&t("D[I, F]")).unwrap(), t("F"));
        assert!(normalize(&parse_test("tau[D[D, D]]").unwrap()).unwrap().is_zero());
        assert_eq!(normalize(&t("Xi(2,1)[I, I][I]")).unwrap(), t("I"));
        assert_eq!(normalize(&t("x[; y!]")), Err(ReduceError::NotPromotionFree));
    }

    #[test]
    fn step_iteration_matches_direct_normalizer() {
        for s in ["D[I, F]", "Xi(2,1)[I, I][I]", "\\y.(\\x.x[x])[y, \\z.z]", "I[tbar(tau[F[I][y]])[]]"] {
            let a = t(s);
            let mut lo = Strategy::LeftmostOutermost;
            assert_eq!(normalize_with(&a, &mut lo).unwrap(), normalize(&a).unwrap(), "{s}");
            let mut r = Strategy::seeded(7);
            assert_eq!(normalize_with(&a, &mut r).unwrap(), normalize(&a).unwrap(), "{s}");
        }
    }

    #[test]
    fn head_step_examples() {
        let v = parse_test("tau[I[tbar(eps)]]").unwrap();
        assert_eq!(head_step(&v), Some(parse_test("tau[tbar(eps)]").unwrap()));
        assert_eq!(head_step(&t("\\x y.y[x][]")), None);
        assert_eq!(head_step(&t("\\x.x[I[]]")), None);
        assert_eq!(head_step(&t("\\x.I[x][]")), Some(t("\\x.x[]")));
    }

    #[test]
    fn closed_test_examples() {
        assert_eq!(closed_test_outcome(&q("tau[I[tbar(eps)], T[tbar(eps)]]")), Ok(Outcome::Epsilon));
        assert_eq!(closed_test_outcome(&q("tau[I]")), Ok(Outcome::Zero));
        assert_eq!(closed_test_outcome(&Test::epsilon()), Ok(Outcome::Epsilon));
        assert_eq!(closed_test_outcome(&q("tau[x]")), Err(ReduceError::NotClosed));
        assert_eq!(closed_test_outcome(&q("tau[D[; I!]]")), Err(ReduceError::NotPromotionFree));
    }

    #[test]
    fn converges_examples() {
        let v = q("tau[(\\x.tbar(eps)[; x!])[; I!]]");
        assert_eq!(converges(&v, Fuel::new(3)), Ok(Outcome::Epsilon));
        assert_eq!(converges(&q("tau[D[; Delta!]]"), Fuel::new(100)), Ok(Outcome::Zero));
        assert_eq!(
            converges(&q("tau[Omega]"), Fuel::new(100)),
            Ok(Outcome::Unknown(UnknownReason::CycleDetected))
        );
        assert_eq!(
            converges(&q("tau[Omega]"), Fuel::new(0)),
            Ok(Outcome::Unknown(UnknownReason::FuelExhausted))
        );
        assert_eq!(converges(&q("tau[x]"), Fuel::new(3)), Err(ReduceError::NotClosed));
    }

    #[test]
    fn omega_head_steps_to_itself() {
        let o = t("Omega");
        assert_eq!(head_step(&o), Some(o.clone()));
    }
}
