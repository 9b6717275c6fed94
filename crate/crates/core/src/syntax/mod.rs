//! Abstract syntax of the resource calculus with tests.
//!
//! Binding is locally nameless: bound occurrences are de Bruijn indices and
//! free occurrences carry a [`VarName`]. Binder names survive only as printing
//! hints, so structural equality is α-equivalence and the derived order is a
//! canonical total order on α-classes.

mod parse;
mod print;

pub use parse::{parse, parse_term, parse_test, ParseError};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use thiserror::Error;

const RESERVED: &[&str] = &[
    "tau", "tbar", "eps", "I", "T", "F", "D", "Delta", "Omega", "Xi",
];

/// Identifier of a free variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid variable name {0:?}")]
pub struct InvalidName(pub String);

static FRESH: AtomicU64 = AtomicU64::new(0);

pub(crate) const HOLE: &str = "<hole>";

impl VarName {
    /// A user-level name; must be an identifier that is not a keyword or prelude constant.
    pub fn new(s: &str) -> Result<Self, InvalidName> {
        if is_ident(s) && !RESERVED.contains(&s) {
            Ok(VarName(s.to_string()))
        } else {
            Err(InvalidName(s.to_string()))
        }
    }

    /// A name guaranteed distinct from every parsable name and every earlier fresh name.
    pub fn fresh() -> Self {
        let n = FRESH.fetch_add(1, AtomicOrdering::Relaxed);
        VarName(format!("%{n}"))
    }

    pub fn hole() -> Self {
        VarName(HOLE.to_string())
    }

    pub fn is_hole(&self) -> bool {
        self.0 == HOLE
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

pub(crate) fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

/// Printing hint attached to a binder. Ignored by equality, order and hashing.
#[derive(Clone, Debug)]
pub struct Hint(pub String);

impl Hint {
    pub fn new(s: &str) -> Self {
        Hint(s.to_string())
    }
}

impl PartialEq for Hint {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Hint {}
impl PartialOrd for Hint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Hint {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}
impl std::hash::Hash for Hint {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Bound(usize),
    Free(VarName),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Lam(Hint, Box<Term>),
    App(Box<Term>, Box<Bag>),
    TauBar(Box<Test>),
}

/// Linear resources (a sorted multiset) plus a promoted sum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bag {
    linear: Vec<Term>,
    promoted: Sum<Term>,
}

/// A multiset of terms under τ; the empty test is ε.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Test {
    elements: Vec<Term>,
}

/// Idempotent sum: a finite set of same-sort summands. Empty is 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sum<T: Ord>(BTreeSet<T>);

impl<T: Ord> Default for Sum<T> {
    fn default() -> Self {
        Sum(BTreeSet::new())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    T(Term),
    B(Bag),
    Q(Test),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Term,
    Bag,
    Test,
}

/// A sum whose sort is known.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExprSum {
    Terms(Sum<Term>),
    Bags(Sum<Bag>),
    Tests(Sum<Test>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("degree of {0} is undefined: it occurs under a promoted part")]
pub struct DegreeUndefined(pub VarName);

// ---------------------------------------------------------------------------
// Sums

impl<T: Ord> Sum<T> {
    pub fn zero() -> Self {
        Sum(BTreeSet::new())
    }
    pub fn single(t: T) -> Self {
        let mut s = BTreeSet::new();
        s.insert(t);
        Sum(s)
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn iter(&self) -> std::collections::btree_set::Iter<'_, T> {
        self.0.iter()
    }
    pub fn insert(&mut self, t: T) -> bool {
        self.0.insert(t)
    }
    pub fn contains(&self, t: &T) -> bool {
        self.0.contains(t)
    }
    pub fn remove(&mut self, t: &T) -> bool {
        self.0.remove(t)
    }
    pub fn extend(&mut self, other: Sum<T>) {
        self.0.extend(other.0)
    }
    pub fn union(mut self, other: Sum<T>) -> Self {
        self.extend(other);
        self
    }
    pub fn first(&self) -> Option<&T> {
        self.0.iter().next()
    }
    pub fn map<U: Ord>(&self, f: impl FnMut(&T) -> U) -> Sum<U> {
        Sum(self.0.iter().map(f).collect())
    }
    pub fn flat_map<U: Ord>(&self, mut f: impl FnMut(&T) -> Sum<U>) -> Sum<U> {
        let mut out = BTreeSet::new();
        for t in &self.0 {
            out.extend(f(t).0);
        }
        Sum(out)
    }
    pub fn into_set(self) -> BTreeSet<T> {
        self.0
    }
    pub fn as_set(&self) -> &BTreeSet<T> {
        &self.0
    }
}

impl<T: Ord> FromIterator<T> for Sum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Sum(iter.into_iter().collect())
    }
}

impl<T: Ord> IntoIterator for Sum<T> {
    type Item = T;
    type IntoIter = std::collections::btree_set::IntoIter<T>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a, T: Ord> IntoIterator for &'a Sum<T> {
    type Item = &'a T;
    type IntoIter = std::collections::btree_set::Iter<'a, T>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// All ways of picking one element from each list.
pub(crate) fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for c in choices {
        if c.is_empty() {
            return Vec::new();
        }
        let mut next = Vec::with_capacity(acc.len() * c.len());
        for prefix in &acc {
            for x in c {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

// ---------------------------------------------------------------------------
// Constructors

impl Term {
    pub fn var(name: &VarName) -> Term {
        Term::Var(Var::Free(name.clone()))
    }

    /// Variable by user name; panics on an invalid name.
    pub fn v(name: &str) -> Term {
        Term::var(&VarName::new(name).expect("valid variable name"))
    }

    /// `λname.body`, binding the free occurrences of `name` in `body`.
    pub fn abs(name: &VarName, body: Term) -> Term {
        Term::Lam(Hint(name.as_str().to_string()), Box::new(body.close(name, 0)))
    }

    /// `λx1…xn.body`.
    pub fn abs_many(names: &[VarName], body: Term) -> Term {
        names.iter().rev().fold(body, |b, n| Term::abs(n, b))
    }

    pub fn app(f: Term, b: Bag) -> Term {
        Term::App(Box::new(f), Box::new(b))
    }

    /// `f b1 … bn`.
    pub fn apps(f: Term, bags: impl IntoIterator<Item = Bag>) -> Term {
        bags.into_iter().fold(f, Term::app)
    }

    pub fn taubar(t: Test) -> Term {
        Term::TauBar(Box::new(t))
    }

    pub fn identity() -> Term {
        let x = VarName::new("x").unwrap();
        Term::abs(&x, Term::var(&x))
    }

    pub fn true_() -> Term {
        let x = VarName::new("x").unwrap();
        let y = VarName::new("y").unwrap();
        Term::abs_many(&[x.clone(), y], Term::var(&x))
    }

    pub fn false_() -> Term {
        let x = VarName::new("x").unwrap();
        let y = VarName::new("y").unwrap();
        Term::abs_many(&[x, y.clone()], Term::var(&y))
    }

    /// `λx.x[x]`.
    pub fn duplicator() -> Term {
        let x = VarName::new("x").unwrap();
        Term::abs(&x, Term::app(Term::var(&x), Bag::linear(vec![Term::var(&x)])))
    }

    /// `λx.x[; x!]`.
    pub fn delta() -> Term {
        let x = VarName::new("x").unwrap();
        Term::abs(
            &x,
            Term::app(Term::var(&x), Bag::promoted(Sum::single(Term::var(&x)))),
        )
    }

    /// `Δ[; Δ!]`.
    pub fn omega() -> Term {
        Term::app(Term::delta(), Bag::promoted(Sum::single(Term::delta())))
    }

    /// `λx1…xm. I[x1]^n1 … [xm]^nm`.
    pub fn xi(ns: &[usize]) -> Term {
        let names: Vec<VarName> = (1..=ns.len())
            .map(|i| VarName::new(&format!("x{i}")).unwrap())
            .collect();
        let mut body = Term::identity();
        for (x, &n) in names.iter().zip(ns) {
            for _ in 0..n {
                body = Term::app(body, Bag::linear(vec![Term::var(x)]));
            }
        }
        Term::abs_many(&names, body)
    }

    pub fn is_lam(&self) -> bool {
        matches!(self, Term::Lam(..))
    }

    pub fn is_taubar(&self) -> bool {
        matches!(self, Term::TauBar(..))
    }

    /// Head and argument bags of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Bag>) {
        let mut t = self;
        let mut bags = Vec::new();
        while let Term::App(f, b) = t {
            bags.push(&**b);
            t = f;
        }
        bags.reverse();
        (t, bags)
    }
}

impl Bag {
    pub fn new(mut linear: Vec<Term>, promoted: Sum<Term>) -> Bag {
        linear.sort();
        Bag { linear, promoted }
    }
    pub fn linear(linear: Vec<Term>) -> Bag {
        Bag::new(linear, Sum::zero())
    }
    pub fn promoted(promoted: Sum<Term>) -> Bag {
        Bag::new(Vec::new(), promoted)
    }
    pub fn empty() -> Bag {
        Bag::default()
    }
    pub fn linear_part(&self) -> &[Term] {
        &self.linear
    }
    pub fn promoted_part(&self) -> &Sum<Term> {
        &self.promoted
    }
    pub fn is_promotion_free_shallow(&self) -> bool {
        self.promoted.is_zero()
    }
    /// Bag union: linear multisets add, promoted sums are summed.
    pub fn union(&self, other: &Bag) -> Bag {
        let mut linear = self.linear.clone();
        linear.extend(other.linear.iter().cloned());
        Bag::new(linear, self.promoted.clone().union(other.promoted.clone()))
    }
    /// Copy of the bag with one more linear resource.
    pub fn with(&self, t: Term) -> Bag {
        let mut linear = self.linear.clone();
        linear.push(t);
        Bag::new(linear, self.promoted.clone())
    }
}

impl Test {
    pub fn new(mut elements: Vec<Term>) -> Test {
        elements.sort();
        Test { elements }
    }
    pub fn epsilon() -> Test {
        Test::default()
    }
    pub fn elements(&self) -> &[Term] {
        &self.elements
    }
    pub fn is_epsilon(&self) -> bool {
        self.elements.is_empty()
    }
    /// Parallel composition.
    pub fn par(&self, other: &Test) -> Test {
        let mut elements = self.elements.clone();
        elements.extend(other.elements.iter().cloned());
        Test::new(elements)
    }
    pub fn par_all<'a>(tests: impl IntoIterator<Item = &'a Test>) -> Test {
        let mut elements = Vec::new();
        for t in tests {
            elements.extend(t.elements.iter().cloned());
        }
        Test::new(elements)
    }
}

// Multilinear constructors on sums.

pub fn lam_sum(hint: &Hint, body: &Sum<Term>) -> Sum<Term> {
    body.map(|b| Term::Lam(hint.clone(), Box::new(b.clone())))
}

pub fn app_sum(f: &Sum<Term>, b: &Sum<Bag>) -> Sum<Term> {
    let mut out = Sum::zero();
    for m in f {
        for p in b {
            out.insert(Term::app(m.clone(), p.clone()));
        }
    }
    out
}

pub fn taubar_sum(v: &Sum<Test>) -> Sum<Term> {
    v.map(|t| Term::taubar(t.clone()))
}

/// `[L1, …, Lk; ℙ!]` with each `Li` a sum; the promoted sum is kept whole.
pub fn bag_sum(linear: &[Sum<Term>], promoted: &Sum<Term>) -> Sum<Bag> {
    let choices: Vec<Vec<Term>> = linear.iter().map(|s| s.iter().cloned().collect()).collect();
    product(&choices)
        .into_iter()
        .map(|ls| Bag::new(ls, promoted.clone()))
        .collect()
}

pub fn test_sum(elements: &[Sum<Term>]) -> Sum<Test> {
    let choices: Vec<Vec<Term>> = elements.iter().map(|s| s.iter().cloned().collect()).collect();
    product(&choices).into_iter().map(Test::new).collect()
}

pub fn par_sum(a: &Sum<Test>, b: &Sum<Test>) -> Sum<Test> {
    let mut out = Sum::zero();
    for v in a {
        for w in b {
            out.insert(v.par(w));
        }
    }
    out
}

pub fn bag_union_sum(a: &Sum<Bag>, b: &Sum<Bag>) -> Sum<Bag> {
    let mut out = Sum::zero();
    for p in a {
        for q in b {
            out.insert(p.union(q));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Locally nameless plumbing

/// Shared traversal over the three syntactic sorts.
pub trait Syntax: Clone + Ord + fmt::Debug {
    /// Rebuild with every variable occurrence mapped; `depth` counts enclosing binders.
    fn map_vars(&self, depth: usize, f: &mut dyn FnMut(&Var, usize) -> Term) -> Self;
    fn visit_vars(&self, depth: usize, under_bang: bool, f: &mut dyn FnMut(&Var, usize, bool));
    fn size(&self) -> usize;
    fn sort() -> Sort;
    fn into_expr(self) -> Expr;
    fn wrap_sum(s: Sum<Self>) -> ExprSum;

    /// Replace the dangling index at `depth` by the free variable `x`.
    fn open(&self, x: &VarName, depth: usize) -> Self {
        self.map_vars(depth, &mut |v, d| match v {
            Var::Bound(i) if *i == d => Term::var(x),
            v => Term::Var(v.clone()),
        })
    }

    /// Abstract the free variable `x` as the index at `depth`.
    fn close(&self, x: &VarName, depth: usize) -> Self {
        self.map_vars(depth, &mut |v, d| match v {
            Var::Free(y) if y == x => Term::Var(Var::Bound(d)),
            v => Term::Var(v.clone()),
        })
    }

    /// Add `k` to every index that escapes `cutoff` enclosing binders.
    fn shift(&self, cutoff: usize, k: usize) -> Self {
        self.map_vars(cutoff, &mut |v, d| match v {
            Var::Bound(i) if *i >= d => Term::Var(Var::Bound(i + k)),
            v => Term::Var(v.clone()),
        })
    }

    /// Substitute free variable `x` by a locally closed term, blindly.
    fn replace_free(&self, x: &VarName, n: &Term) -> Self {
        self.map_vars(0, &mut |v, _| match v {
            Var::Free(y) if y == x => n.clone(),
            v => Term::Var(v.clone()),
        })
    }

    fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.visit_vars(0, false, &mut |v, _, _| {
            if let Var::Free(n) = v {
                out.insert(n.clone());
            }
        });
        out
    }

    fn mentions(&self, x: &VarName) -> bool {
        let mut found = false;
        self.visit_vars(0, false, &mut |v, _, _| {
            if matches!(v, Var::Free(n) if n == x) {
                found = true;
            }
        });
        found
    }

    fn is_closed(&self) -> bool {
        self.free_vars().is_empty() && self.is_locally_closed()
    }

    fn is_locally_closed(&self) -> bool {
        let mut ok = true;
        self.visit_vars(0, false, &mut |v, d, _| {
            if matches!(v, Var::Bound(i) if *i >= d) {
                ok = false;
            }
        });
        ok
    }

    /// Number of free occurrences of `x`.
    fn degree(&self, x: &VarName) -> Result<usize, DegreeUndefined> {
        let mut n = 0;
        let mut banged = false;
        self.visit_vars(0, false, &mut |v, _, bang| {
            if matches!(v, Var::Free(y) if y == x) {
                if bang {
                    banged = true;
                }
                n += 1;
            }
        });
        if banged {
            Err(DegreeUndefined(x.clone()))
        } else {
            Ok(n)
        }
    }

    fn is_promotion_free(&self) -> bool;
}

impl Syntax for Term {
    fn map_vars(&self, depth: usize, f: &mut dyn FnMut(&Var, usize) -> Term) -> Self {
        match self {
            Term::Var(v) => f(v, depth),
            Term::Lam(h, b) => Term::Lam(h.clone(), Box::new(b.map_vars(depth + 1, f))),
            Term::App(m, p) => Term::App(Box::new(m.map_vars(depth, f)), Box::new(p.map_vars(depth, f))),
            Term::TauBar(v) => Term::TauBar(Box::new(v.map_vars(depth, f))),
        }
    }
    fn visit_vars(&self, depth: usize, bang: bool, f: &mut dyn FnMut(&Var, usize, bool)) {
        match self {
            Term::Var(v) => f(v, depth, bang),
            Term::Lam(_, b) => b.visit_vars(depth + 1, bang, f),
            Term::App(m, p) => {
                m.visit_vars(depth, bang, f);
                p.visit_vars(depth, bang, f);
            }
            Term::TauBar(v) => v.visit_vars(depth, bang, f),
        }
    }
    fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Lam(_, b) => b.size() + 1,
            Term::App(m, p) => m.size() + p.size() + 1,
            Term::TauBar(v) => v.size() + 1,
        }
    }
    fn sort() -> Sort {
        Sort::Term
    }
    fn into_expr(self) -> Expr {
        Expr::T(self)
    }
    fn wrap_sum(s: Sum<Self>) -> ExprSum {
        ExprSum::Terms(s)
    }
    fn is_promotion_free(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Lam(_, b) => b.is_promotion_free(),
            Term::App(m, p) => m.is_promotion_free() && p.is_promotion_free(),
            Term::TauBar(v) => v.is_promotion_free(),
        }
    }
}

impl Syntax for Bag {
    fn map_vars(&self, depth: usize, f: &mut dyn FnMut(&Var, usize) -> Term) -> Self {
        let linear = self.linear.iter().map(|t| t.map_vars(depth, f)).collect();
        let promoted = self.promoted.iter().map(|t| t.map_vars(depth, f)).collect();
        Bag::new(linear, promoted)
    }
    fn visit_vars(&self, depth: usize, bang: bool, f: &mut dyn FnMut(&Var, usize, bool)) {
        for t in &self.linear {
            t.visit_vars(depth, bang, f);
        }
        for t in &self.promoted {
            t.visit_vars(depth, true, f);
        }
    }
    fn size(&self) -> usize {
        let lin: usize = self.linear.iter().map(Syntax::size).sum();
        let bang = if self.promoted.is_zero() {
            0
        } else {
            1 + self.promoted.iter().map(Syntax::size).sum::<usize>()
        };
        lin + bang + 1
    }
    fn sort() -> Sort {
        Sort::Bag
    }
    fn into_expr(self) -> Expr {
        Expr::B(self)
    }
    fn wrap_sum(s: Sum<Self>) -> ExprSum {
        ExprSum::Bags(s)
    }
    fn is_promotion_free(&self) -> bool {
        self.promoted.is_zero() && self.linear.iter().all(Syntax::is_promotion_free)
    }
}

impl Syntax for Test {
    fn map_vars(&self, depth: usize, f: &mut dyn FnMut(&Var, usize) -> Term) -> Self {
        Test::new(self.elements.iter().map(|t| t.map_vars(depth, f)).collect())
    }
    fn visit_vars(&self, depth: usize, bang: bool, f: &mut dyn FnMut(&Var, usize, bool)) {
        for t in &self.elements {
            t.visit_vars(depth, bang, f);
        }
    }
    fn size(&self) -> usize {
        self.elements.iter().map(Syntax::size).sum::<usize>() + 1
    }
    fn sort() -> Sort {
        Sort::Test
    }
    fn into_expr(self) -> Expr {
        Expr::Q(self)
    }
    fn wrap_sum(s: Sum<Self>) -> ExprSum {
        ExprSum::Tests(s)
    }
    fn is_promotion_free(&self) -> bool {
        self.elements.iter().all(Syntax::is_promotion_free)
    }
}

impl<T: Syntax> Sum<T> {
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        self.iter().flat_map(|t| t.free_vars()).collect()
    }
    pub fn is_promotion_free(&self) -> bool {
        self.iter().all(Syntax::is_promotion_free)
    }
    pub fn is_closed(&self) -> bool {
        self.iter().all(Syntax::is_closed)
    }
}

/// Open the body of a λ with a fresh name.
pub fn open_fresh(body: &Term) -> (VarName, Term) {
    let x = VarName::fresh();
    let t = body.open(&x, 0);
    (x, t)
}

// ---------------------------------------------------------------------------
// Expr-level API

impl Expr {
    pub fn sort(&self) -> Sort {
        match self {
            Expr::T(_) => Sort::Term,
            Expr::B(_) => Sort::Bag,
            Expr::Q(_) => Sort::Test,
        }
    }
}

macro_rules! on_expr {
    ($e:expr, $x:ident => $body:expr) => {
        match $e {
            Expr::T($x) => $body,
            Expr::B($x) => $body,
            Expr::Q($x) => $body,
        }
    };
}

macro_rules! on_sum {
    ($e:expr, $x:ident => $body:expr) => {
        match $e {
            ExprSum::Terms($x) => $body,
            ExprSum::Bags($x) => $body,
            ExprSum::Tests($x) => $body,
        }
    };
}
pub(crate) use on_sum;

pub fn free_vars(e: &Expr) -> BTreeSet<VarName> {
    on_expr!(e, x => x.free_vars())
}

pub fn degree(x: &VarName, e: &Expr) -> Result<usize, DegreeUndefined> {
    on_expr!(e, t => t.degree(x))
}

pub fn size(e: &Expr) -> usize {
    on_expr!(e, t => t.size())
}

pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    a == b
}

pub fn is_promotion_free(e: &Expr) -> bool {
    on_expr!(e, t => t.is_promotion_free())
}

impl ExprSum {
    pub fn sort(&self) -> Sort {
        match self {
            ExprSum::Terms(_) => Sort::Term,
            ExprSum::Bags(_) => Sort::Bag,
            ExprSum::Tests(_) => Sort::Test,
        }
    }
    pub fn is_zero(&self) -> bool {
        on_sum!(self, s => s.is_zero())
    }
    pub fn len(&self) -> usize {
        on_sum!(self, s => s.len())
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn summands(&self) -> Vec<Expr> {
        on_sum!(self, s => s.iter().cloned().map(Syntax::into_expr).collect())
    }
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        on_sum!(self, s => s.free_vars())
    }
    pub fn is_promotion_free(&self) -> bool {
        on_sum!(self, s => s.is_promotion_free())
    }
    pub fn is_closed(&self) -> bool {
        on_sum!(self, s => s.is_closed())
    }
    pub fn msize(&self) -> Vec<usize> {
        on_sum!(self, s => msize(s))
    }
    pub fn into_terms(self) -> Option<Sum<Term>> {
        match self {
            ExprSum::Terms(s) => Some(s),
            _ => None,
        }
    }
    pub fn into_tests(self) -> Option<Sum<Test>> {
        match self {
            ExprSum::Tests(s) => Some(s),
            _ => None,
        }
    }
    pub fn into_bags(self) -> Option<Sum<Bag>> {
        match self {
            ExprSum::Bags(s) => Some(s),
            _ => None,
        }
    }
    pub fn from_expr(e: Expr) -> ExprSum {
        match e {
            Expr::T(t) => ExprSum::Terms(Sum::single(t)),
            Expr::B(b) => ExprSum::Bags(Sum::single(b)),
            Expr::Q(q) => ExprSum::Tests(Sum::single(q)),
        }
    }
}

/// Sorted multiset of summand sizes.
pub fn msize<T: Syntax>(s: &Sum<T>) -> Vec<usize> {
    let mut v: Vec<usize> = s.iter().map(Syntax::size).collect();
    v.sort_unstable();
    v
}

/// Strict multiset order induced by `<` on naturals.
///
/// `a < b` iff `a ≠ b` and every value with more copies in `a` is dominated by
/// some larger value with more copies in `b`.
pub fn msize_lt(a: &[usize], b: &[usize]) -> bool {
    use std::collections::BTreeMap;
    let mut diff: BTreeMap<usize, i64> = BTreeMap::new();
    for &x in a {
        *diff.entry(x).or_default() += 1;
    }
    for &x in b {
        *diff.entry(x).or_default() -= 1;
    }
    diff.retain(|_, d| *d != 0);
    if diff.is_empty() {
        return false;
    }
    // The largest value whose multiplicity differs must have more copies in b.
    let (_, &d) = diff.iter().next_back().unwrap();
    d < 0
}
