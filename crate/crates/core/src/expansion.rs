//! Labelled expressions and the translation of tests into test-free terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::reduce::{closed_test_outcome, normalize, Outcome, ReduceError};
use crate::syntax::{Bag, Expr, Hint, Sum, Syntax, Term, Test, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpansionError {
    #[error("expression is not promotion-free")]
    NotPromotionFree,
    #[error("term contains tests")]
    NotTestFree,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("malformed map: {0}")]
    BadMap(String),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LTerm {
    Var(Var),
    Lam(Hint, Box<LTerm>),
    App(Box<LTerm>, Vec<LTerm>),
    TauBar(usize, LTest),
}

/// Test whose elements carry indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LTest {
    pub elements: Vec<(usize, LTerm)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelledExpr {
    T(LTerm),
    B(Vec<LTerm>),
    Q(LTest),
}

struct Labeller {
    next: usize,
}

impl Labeller {
    fn fresh(&mut self) -> usize {
        let i = self.next;
        self.next += 1;
        i
    }

    fn term(&mut self, t: &Term) -> LTerm {
        match t {
            Term::Var(v) => LTerm::Var(v.clone()),
            Term::Lam(h, b) => LTerm::Lam(h.clone(), Box::new(self.term(b))),
            Term::App(m, p) => {
                let m = self.term(m);
                LTerm::App(Box::new(m), self.bag(p))
            }
            Term::TauBar(v) => {
                let i = self.fresh();
                LTerm::TauBar(i, self.test(v))
            }
        }
    }

    fn bag(&mut self, p: &Bag) -> Vec<LTerm> {
        p.linear_part().iter().map(|l| self.term(l)).collect()
    }

    fn test(&mut self, v: &Test) -> LTest {
        let elements = v
            .elements()
            .iter()
            .map(|e| {
                let i = self.fresh();
                (i, self.term(e))
            })
            .collect();
        LTest { elements }
    }
}

/// Index every τ̄ occurrence and test element in pre-order, starting at 1.
pub fn label(e: &Expr) -> Result<LabelledExpr, ExpansionError> {
    if !crate::syntax::is_promotion_free(e) {
        return Err(ExpansionError::NotPromotionFree);
    }
    let mut l = Labeller { next: 1 };
    Ok(match e {
        Expr::T(t) => LabelledExpr::T(l.term(t)),
        Expr::B(b) => LabelledExpr::B(l.bag(b)),
        Expr::Q(q) => LabelledExpr::Q(l.test(q)),
    })
}

fn strip_term(t: &LTerm) -> Term {
    match t {
        LTerm::Var(v) => Term::Var(v.clone()),
        LTerm::Lam(h, b) => Term::Lam(h.clone(), Box::new(strip_term(b))),
        LTerm::App(m, p) => Term::app(strip_term(m), Bag::linear(p.iter().map(strip_term).collect())),
        LTerm::TauBar(_, v) => Term::taubar(strip_test(v)),
    }
}

fn strip_test(v: &LTest) -> Test {
    Test::new(v.elements.iter().map(|(_, e)| strip_term(e)).collect())
}

pub fn strip(le: &LabelledExpr) -> Expr {
    match le {
        LabelledExpr::T(t) => Expr::T(strip_term(t)),
        LabelledExpr::B(b) => Expr::B(Bag::linear(b.iter().map(strip_term).collect())),
        LabelledExpr::Q(q) => Expr::Q(strip_test(q)),
    }
}

fn indices_term(t: &LTerm, out: &mut Vec<usize>) {
    match t {
        LTerm::Var(_) => {}
        LTerm::Lam(_, b) => indices_term(b, out),
        LTerm::App(m, p) => {
            indices_term(m, out);
            p.iter().for_each(|l| indices_term(l, out));
        }
        LTerm::TauBar(i, v) => {
            out.push(*i);
            indices_test(v, out);
        }
    }
}

fn indices_test(v: &LTest, out: &mut Vec<usize>) {
    for (i, e) in &v.elements {
        out.push(*i);
        indices_term(e, out);
    }
}

fn indices(le: &LabelledExpr) -> Vec<usize> {
    let mut out = Vec::new();
    match le {
        LabelledExpr::T(t) => indices_term(t, &mut out),
        LabelledExpr::B(b) => b.iter().for_each(|l| indices_term(l, &mut out)),
        LabelledExpr::Q(q) => indices_test(q, &mut out),
    }
    out
}

pub fn dom(le: &LabelledExpr) -> BTreeSet<usize> {
    indices(le).into_iter().collect()
}

/// Whether all indices are pairwise distinct.
pub fn is_well_labelled(le: &LabelledExpr) -> bool {
    let v = indices(le);
    v.len() == dom(le).len()
}

/// A map from indices to naturals, constant outside a finite support.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EllMap {
    pub default: usize,
    pub values: BTreeMap<usize, usize>,
}

impl EllMap {
    pub fn constant(default: usize) -> Self {
        EllMap { default, values: BTreeMap::new() }
    }

    pub fn get(&self, i: usize) -> usize {
        self.values.get(&i).copied().unwrap_or(self.default)
    }

    pub fn with(mut self, i: usize, v: usize) -> Self {
        self.values.insert(i, v);
        self
    }

    /// `ℓ + k`.
    pub fn shift(&self, k: usize) -> EllMap {
        EllMap {
            default: self.default + k,
            values: self.values.iter().map(|(i, v)| (*i, v + k)).collect(),
        }
    }

    /// `{1:0, 2:3, default:0}`; a missing default means 0.
    pub fn parse(s: &str) -> Result<EllMap, ExpansionError> {
        let bad = || ExpansionError::BadMap(s.to_string());
        let inner = s.trim().strip_prefix('{').and_then(|r| r.strip_suffix('}')).ok_or_else(bad)?;
        let mut m = EllMap::default();
        for entry in inner.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (k, v) = entry.split_once(':').ok_or_else(bad)?;
            let v: usize = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "default" => m.default = v,
                k => {
                    let k: usize = k.parse().map_err(|_| bad())?;
                    if m.values.insert(k, v).is_some() {
                        return Err(bad());
                    }
                }
            }
        }
        Ok(m)
    }
}

impl fmt::Display for EllMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in &self.values {
            write!(f, "{i}:{v}, ")?;
        }
        write!(f, "default:{}}}", self.default)
    }
}

fn lams(n: usize, hint: &str, body: Term) -> Term {
    (0..n).fold(body.shift(0, n), |b, _| Term::Lam(Hint::new(hint), Box::new(b)))
}

fn expand_term(t: &LTerm, ell: &EllMap) -> Term {
    match t {
        LTerm::Var(v) => Term::Var(v.clone()),
        LTerm::Lam(h, b) => Term::Lam(h.clone(), Box::new(expand_term(b, ell))),
        LTerm::App(m, p) => Term::app(expand_term(m, ell), Bag::linear(p.iter().map(|l| expand_term(l, ell)).collect())),
        LTerm::TauBar(i, v) => lams(ell.get(*i), "z", expand_test(v, ell)),
    }
}

/// `τ[(L1)i1, …] ↦ λx.x[L1 []^ℓ(i1), …]`, so in particular `ε ↦ λx.x[]`.
fn expand_test(v: &LTest, ell: &EllMap) -> Term {
    let args = v
        .elements
        .iter()
        .map(|(i, e)| {
            let e = expand_term(e, ell).shift(0, 1);
            Term::apps(e, (0..ell.get(*i)).map(|_| Bag::empty()))
        })
        .collect();
    Term::Lam(Hint::new("x"), Box::new(Term::app(Term::Var(Var::Bound(0)), Bag::linear(args))))
}

/// The ℓ-expansion; always a test-free term, except for bags.
pub fn ell_expand(le: &LabelledExpr, ell: &EllMap) -> Expr {
    match le {
        LabelledExpr::T(t) => Expr::T(expand_term(t, ell)),
        LabelledExpr::B(b) => Expr::B(Bag::linear(b.iter().map(|l| expand_term(l, ell)).collect())),
        LabelledExpr::Q(q) => Expr::T(expand_test(q, ell)),
    }
}

pub fn ell_expand_test(v: &LTest, ell: &EllMap) -> Term {
    expand_test(v, ell)
}

pub fn is_test_free(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Lam(_, b) => is_test_free(b),
        Term::App(m, p) => {
            is_test_free(m) && p.linear_part().iter().chain(p.promoted_part()).all(is_test_free)
        }
        Term::TauBar(_) => false,
    }
}

/// A test-free promotion-free term is solvable iff its normal form is not 0.
pub fn solvable(m: &Term) -> Result<bool, ExpansionError> {
    if !m.is_promotion_free() {
        return Err(ExpansionError::NotPromotionFree);
    }
    if !is_test_free(m) {
        return Err(ExpansionError::NotTestFree);
    }
    Ok(!normalize(&Sum::single(m.clone()))?.is_zero())
}

/// Limits for the searches over maps and shifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest value a candidate map may take on an index.
    pub max_value: usize,
    /// Number of candidate maps examined before giving up.
    pub max_candidates: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_value: 3, max_candidates: 5000 }
    }
}

/// Vectors of length `n` with entries `≤ max` summing to exactly `total`.
fn compositions(n: usize, total: usize, max: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, limit: usize) {
    if out.len() >= limit {
        return;
    }
    if cur.len() == n {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let left = n - cur.len() - 1;
    for v in 0..=max.min(total) {
        if total - v > left * max {
            continue;
        }
        cur.push(v);
        compositions(n, total - v, max, out, cur, limit);
        cur.pop();
    }
}

fn closed_labelled(v: &Test) -> Result<LTest, ExpansionError> {
    match label(&Expr::Q(v.clone()))? {
        LabelledExpr::Q(q) => Ok(q),
        _ => unreachable!(),
    }
}

/// Search for `ℓ` such that the expansion of `v` under `ℓ + k` is solvable for every sampled `k`.
pub fn find_ell_for_convergent(v: &Test, k_samples: &[usize], budget: SearchBudget) -> Result<Option<EllMap>, ExpansionError> {
    if closed_test_outcome(v)? != Outcome::Epsilon {
        return Err(ExpansionError::PreconditionViolated("the test does not converge".into()));
    }
    let lv = closed_labelled(v)?;
    let idx: Vec<usize> = dom(&LabelledExpr::Q(lv.clone())).into_iter().collect();
    let mut examined = 0;
    for total in 0..=idx.len() * budget.max_value {
        let mut cands = Vec::new();
        compositions(idx.len(), total, budget.max_value, &mut cands, &mut Vec::new(), budget.max_candidates - examined);
        for c in cands {
            examined += 1;
            let ell = EllMap { default: 0, values: idx.iter().copied().zip(c).collect() };
            let mut ok = true;
            for &k in k_samples {
                if !solvable(&expand_test(&lv, &ell.shift(k)))? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Some(ell));
            }
            if examined >= budget.max_candidates {
                return Ok(None);
            }
        }
    }
    Ok(None)
}

/// Smallest `k ≤ max_k` such that the expansion of `v` under `ℓ + k` reduces to 0 for every sampled `ℓ`.
pub fn find_k_for_divergent(v: &Test, ell_samples: &[EllMap], max_k: usize) -> Result<Option<usize>, ExpansionError> {
    if closed_test_outcome(v)? != Outcome::Zero {
        return Err(ExpansionError::PreconditionViolated("the test converges".into()));
    }
    let lv = closed_labelled(v)?;
    for k in 0..=max_k {
        let mut all = true;
        for ell in ell_samples {
            if !normalize(&Sum::single(expand_test(&lv, &ell.shift(k))))?.is_zero() {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
