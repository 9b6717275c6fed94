//! The relational model `D` and membership in interpretations of
//! promotion-free terms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::reduce::{normalize, Reducible, ReduceError};
use crate::syntax::{open_fresh, Bag, Sum, Syntax, Term, Test, Var, VarName};

/// Quasi-finite sequence of finite multisets of elements of `D`.
///
/// Canonical: every level is sorted and the last level is nonempty. The empty
/// sequence is `*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DElem {
    levels: Vec<Vec<DElem>>,
}

impl Ord for DElem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.levels
            .len()
            .cmp(&other.levels.len())
            .then_with(|| self.levels.cmp(&other.levels))
    }
}

impl PartialOrd for DElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl DElem {
    pub fn star() -> DElem {
        DElem::default()
    }

    pub fn from_levels(levels: Vec<Vec<DElem>>) -> DElem {
        let mut levels: Vec<Vec<DElem>> = levels
            .into_iter()
            .map(|mut l| {
                l.sort();
                l
            })
            .collect();
        while levels.last().is_some_and(|l| l.is_empty()) {
            levels.pop();
        }
        DElem { levels }
    }

    /// `a :: rest`.
    pub fn cons(mut a: Vec<DElem>, rest: DElem) -> DElem {
        a.sort();
        if a.is_empty() && rest.is_star() {
            return rest;
        }
        let mut levels = vec![a];
        levels.extend(rest.levels);
        DElem { levels }
    }

    /// First level and the remaining sequence.
    pub fn peel(&self) -> (Vec<DElem>, DElem) {
        match self.levels.split_first() {
            None => (Vec::new(), DElem::star()),
            Some((a, rest)) => (a.clone(), DElem { levels: rest.to_vec() }),
        }
    }

    pub fn is_star(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[Vec<DElem>] {
        &self.levels
    }

    pub fn rank(&self) -> usize {
        self.levels
            .iter()
            .flatten()
            .map(|b| b.rank() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn length(&self) -> usize {
        self.levels.len()
    }

    /// Largest multiset cardinality occurring anywhere inside.
    pub fn width(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.len().max(l.iter().map(DElem::width).max().unwrap_or(0)))
            .max()
            .unwrap_or(0)
    }

    /// Largest length occurring anywhere inside.
    pub fn depth_length(&self) -> usize {
        self.levels
            .iter()
            .flatten()
            .map(DElem::depth_length)
            .fold(self.length(), usize::max)
    }

    pub fn within(&self, b: Bounds) -> bool {
        self.rank() <= b.max_rank && self.width() <= b.max_width && self.depth_length() <= b.max_length
    }

    /// Number of constructors, used to grade enumerations.
    pub fn weight(&self) -> usize {
        1 + self.levels.len() + self.levels.iter().flatten().map(DElem::weight).sum::<usize>()
    }
}

fn write_mset(f: &mut fmt::Formatter<'_>, m: &[DElem]) -> fmt::Result {
    f.write_str("[")?;
    for (i, d) in m.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{d}")?;
    }
    f.write_str("]")
}

impl fmt::Display for DElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.levels {
            write_mset(f, l)?;
            f.write_str("::")?;
        }
        f.write_str("*")
    }
}

/// Bounds describing a finite slice of `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_rank: usize,
    pub max_width: usize,
    pub max_length: usize,
}

impl Bounds {
    pub fn new(max_rank: usize, max_width: usize, max_length: usize) -> Self {
        Bounds { max_rank, max_width, max_length }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::new(3, 3, 3)
    }
}

/// Sorted multisets of cardinality `≤ w` drawn from `elems`.
pub fn multisets<T: Clone>(elems: &[T], w: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    fn go<T: Clone>(elems: &[T], start: usize, left: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if left == 0 {
            return;
        }
        for i in start..elems.len() {
            cur.push(elems[i].clone());
            out.push(cur.clone());
            go(elems, i, left - 1, cur, out);
            cur.pop();
        }
    }
    go(elems, 0, w, &mut Vec::new(), &mut out);
    out
}

/// All canonical elements within the bounds, in canonical order.
pub fn enumerate_d(max_rank: usize, max_width: usize, max_length: usize) -> Vec<DElem> {
    let mut cur = vec![DElem::star()];
    for _ in 0..max_rank {
        let ms = multisets(&cur, max_width);
        let mut next: BTreeSet<DElem> = BTreeSet::new();
        let mut seqs: Vec<Vec<Vec<DElem>>> = vec![Vec::new()];
        next.insert(DElem::star());
        for _ in 0..max_length {
            let mut grown = Vec::new();
            for s in &seqs {
                for m in &ms {
                    let mut t = s.clone();
                    t.push(m.clone());
                    next.insert(DElem::from_levels(t.clone()));
                    grown.push(t);
                }
            }
            seqs = grown;
        }
        cur = next.into_iter().collect();
    }
    cur
}

/// Size of `enumerate_d(max_rank, max_width, max_length)`, saturating.
pub fn count_d(max_rank: usize, max_width: usize, max_length: usize) -> u128 {
    let mut n: u128 = 1;
    for _ in 0..max_rank {
        let m = multiset_count(n, max_width);
        n = m.checked_pow(max_length as u32).unwrap_or(u128::MAX);
    }
    n
}

/// Number of multisets of cardinality `≤ w` over `n` elements, i.e. `C(n + w, w)`.
fn multiset_count(n: u128, w: usize) -> u128 {
    let mut r: u128 = 1;
    for i in 1..=w as u128 {
        r = match r.checked_mul(n + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    r
}

/// An environment of multisets together with a target element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub env: Vec<(VarName, Vec<DElem>)>,
    pub target: DElem,
}

impl Point {
    pub fn closed(target: DElem) -> Point {
        Point { env: Vec::new(), target }
    }

    pub fn new(env: Vec<(VarName, Vec<DElem>)>, target: DElem) -> Point {
        let env = env
            .into_iter()
            .map(|(x, mut m)| {
                m.sort();
                (x, m)
            })
            .collect();
        Point { env, target }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m)) in self.env.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{x}=")?;
            write_mset(f, m)?;
        }
        if !self.env.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "|- {}", self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("term is not in normal form")]
    NotNormalForm,
    #[error("term is not promotion-free")]
    NotPromotionFree,
    #[error("environment does not match the free variables: {0}")]
    EnvMismatch(String),
    #[error("at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

impl From<ReduceError> for ModelError {
    fn from(e: ReduceError) -> Self {
        match e {
            ReduceError::NotPromotionFree => ModelError::NotPromotionFree,
            ReduceError::NotClosed => ModelError::EnvMismatch("not closed".into()),
        }
    }
}

struct Lexer<'a> {
    s: &'a [u8],
    i: usize,
}

impl Lexer<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }
    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.i..].starts_with(tok.as_bytes()) {
            self.i += tok.len();
            true
        } else {
            false
        }
    }
    fn expect(&mut self, tok: &str) -> Result<(), ModelError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {tok:?}")))
        }
    }
    fn err(&self, msg: &str) -> ModelError {
        ModelError::Parse { pos: self.i, msg: msg.to_string() }
    }
    fn delem(&mut self) -> Result<DElem, ModelError> {
        let mut levels = Vec::new();
        loop {
            if self.eat("*") {
                break;
            }
            levels.push(self.mset()?);
            self.expect("::")?;
        }
        // trailing empty levels are trimmed: []::* is *
        Ok(DElem::from_levels(levels))
    }
    fn mset(&mut self) -> Result<Vec<DElem>, ModelError> {
        self.expect("[")?;
        let mut out = Vec::new();
        if self.eat("]") {
            return Ok(out);
        }
        loop {
            out.push(self.delem()?);
            if self.eat("]") {
                out.sort();
                return Ok(out);
            }
            self.expect(",")?;
        }
    }
    fn ident(&mut self) -> Result<String, ModelError> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len()
            && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_' || self.s[self.i] == b'\'')
        {
            self.i += 1;
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.i]).into_owned())
    }
    fn end(&mut self) -> Result<(), ModelError> {
        self.ws();
        if self.i == self.s.len() {
            Ok(())
        } else {
            Err(self.err("trailing input"))
        }
    }
}

pub fn parse_delem(s: &str) -> Result<DElem, ModelError> {
    let mut lx = Lexer { s: s.as_bytes(), i: 0 };
    let d = lx.delem()?;
    lx.end()?;
    Ok(d)
}

/// `x=[d, …]; y=[…] |- d`; a bare element is a point with empty environment.
pub fn parse_point(s: &str) -> Result<Point, ModelError> {
    if !s.contains("|-") {
        return Ok(Point::closed(parse_delem(s)?));
    }
    let mut lx = Lexer { s: s.as_bytes(), i: 0 };
    let mut env = Vec::new();
    if !lx.eat("|-") {
        loop {
            let pos = lx.i;
            let name = lx.ident()?;
            let x = VarName::new(&name).map_err(|_| ModelError::Parse { pos, msg: format!("invalid variable {name:?}") })?;
            lx.expect("=")?;
            env.push((x, lx.mset()?));
            if lx.eat("|-") {
                break;
            }
            lx.expect(";")?;
        }
    }
    let target = lx.delem()?;
    lx.end()?;
    Ok(Point { env, target })
}

// ---------------------------------------------------------------------------
// Weight-graded enumeration

/// Elements within `b` of weight at most `max_weight`, ordered by weight then canonically.
///
/// Unlike [`enumerate_d`] this stays small for generous bounds, since it is
/// cut by weight rather than by the shape of the slice.
pub fn elements_by_weight(b: Bounds, max_weight: usize) -> Vec<DElem> {
    let mut by_rank: Vec<Vec<DElem>> = vec![vec![DElem::star()]];
    for _ in 0..b.max_rank {
        let prev = by_rank.last().unwrap();
        let mut next = BTreeSet::new();
        next.insert(DElem::star());
        // a level costs 1 plus its members; the element itself costs 1
        let members: Vec<(usize, DElem)> = prev.iter().map(|d| (d.weight(), d.clone())).collect();
        let levels = weighted_multisets(&members, b.max_width, max_weight.saturating_sub(2));
        let mut seqs: Vec<(usize, Vec<Vec<DElem>>)> = vec![(1, Vec::new())];
        for _ in 0..b.max_length {
            let mut grown = Vec::new();
            for (w, s) in &seqs {
                for (lw, l) in &levels {
                    let nw = w + 1 + lw;
                    if nw > max_weight {
                        continue;
                    }
                    let mut t = s.clone();
                    t.push(l.clone());
                    next.insert(DElem::from_levels(t.clone()));
                    grown.push((nw, t));
                }
            }
            seqs = grown;
        }
        by_rank.push(next.into_iter().filter(|d| d.weight() <= max_weight).collect());
    }
    let mut out = by_rank.pop().unwrap();
    out.sort_by(|x, y| x.weight().cmp(&y.weight()).then_with(|| x.cmp(y)));
    out
}

/// Sorted multisets with at most `w` members and total member weight `≤ budget`.
fn weighted_multisets(elems: &[(usize, DElem)], w: usize, budget: usize) -> Vec<(usize, Vec<DElem>)> {
    let mut out = vec![(0, Vec::new())];
    fn go(
        elems: &[(usize, DElem)],
        start: usize,
        left: usize,
        budget: usize,
        acc: usize,
        cur: &mut Vec<DElem>,
        out: &mut Vec<(usize, Vec<DElem>)>,
    ) {
        if left == 0 {
            return;
        }
        for i in start..elems.len() {
            let (ew, e) = &elems[i];
            if acc + ew > budget {
                continue;
            }
            cur.push(e.clone());
            out.push((acc + ew, cur.clone()));
            go(elems, i, left - 1, budget, acc + ew, cur, out);
            cur.pop();
        }
    }
    go(elems, 0, w, budget, 0, &mut Vec::new(), &mut out);
    out
}

impl Point {
    pub fn weight(&self) -> usize {
        self.target.weight() + self.env.iter().flat_map(|(_, m)| m).map(DElem::weight).sum::<usize>()
    }

    pub fn within(&self, b: Bounds) -> bool {
        self.target.within(b)
            && self.env.iter().all(|(_, m)| m.len() <= b.max_width && m.iter().all(|d| d.within(b)))
    }
}

/// The first `max_points` points over `vars` within `b`, by increasing weight.
pub fn points_by_weight(vars: &[VarName], b: Bounds, max_points: usize) -> Vec<Point> {
    let mut cap = 1;
    let mut last_len = usize::MAX;
    loop {
        let pts = points_upto(vars, b, cap);
        // Stop once enough points exist, or the slice no longer grows with the cap.
        let exhausted = pts.len() == last_len && cap > 4 * (b.max_rank + 1) * (b.max_length + 1) * (b.max_width + 1);
        if pts.len() >= max_points || exhausted || cap >= 64 {
            return pts.into_iter().take(max_points).collect();
        }
        last_len = pts.len();
        cap += 1;
    }
}

fn points_upto(vars: &[VarName], b: Bounds, max_weight: usize) -> Vec<Point> {
    let elems = elements_by_weight(b, max_weight);
    let weighted: Vec<(usize, DElem)> = elems.iter().map(|d| (d.weight(), d.clone())).collect();
    let msets = weighted_multisets(&weighted, b.max_width, max_weight);
    let mut partial: Vec<(usize, Vec<(VarName, Vec<DElem>)>)> = vec![(0, Vec::new())];
    for x in vars {
        let mut next = Vec::new();
        for (w, env) in &partial {
            for (mw, m) in &msets {
                if w + mw < max_weight {
                    let mut e = env.clone();
                    e.push((x.clone(), m.clone()));
                    next.push((w + mw, e));
                }
            }
        }
        partial = next;
    }
    let mut out = Vec::new();
    for (w, env) in &partial {
        for (tw, t) in &weighted {
            if w + tw <= max_weight {
                out.push(Point { env: env.clone(), target: t.clone() });
            }
        }
    }
    out.sort_by(|p, q| p.weight().cmp(&q.weight()).then_with(|| p.cmp(q)));
    out
}

// ---------------------------------------------------------------------------
// Membership

type Env = BTreeMap<VarName, Vec<DElem>>;

fn remove_one(env: &Env, x: &VarName, d: &DElem) -> Option<Env> {
    let m = env.get(x)?;
    let i = m.iter().position(|e| e == d)?;
    let mut out = env.clone();
    let v = out.get_mut(x).unwrap();
    v.remove(i);
    if v.is_empty() {
        out.remove(x);
    }
    Some(out)
}

fn distinct(m: &[DElem]) -> Vec<&DElem> {
    let mut v: Vec<&DElem> = m.iter().collect();
    v.dedup();
    v
}

/// All leftovers `env ∖ used` such that `(used, target)` is in the interpretation of `t`.
fn sat_term(t: &Term, target: &DElem, env: &Env) -> BTreeSet<Env> {
    let mut out = BTreeSet::new();
    match t {
        Term::Var(Var::Free(y)) => out.extend(remove_one(env, y, target)),
        Term::Var(Var::Bound(_)) => {}
        Term::Lam(_, b) => {
            let (a, rest) = target.peel();
            let (x, o) = open_fresh(b);
            let mut env2 = env.clone();
            if !a.is_empty() {
                env2.insert(x.clone(), a);
            }
            for l in sat_term(&o, &rest, &env2) {
                if !l.contains_key(&x) {
                    out.insert(l);
                }
            }
        }
        Term::TauBar(v) => {
            if target.is_star() {
                out.extend(sat_test(v, env));
            }
        }
        Term::App(..) => {
            let (h, bags) = t.spine();
            let Term::Var(Var::Free(y)) = h else { return out };
            let Some(m) = env.get(y) else { return out };
            for d in distinct(m) {
                let mut bs = Vec::with_capacity(bags.len());
                let mut rest = d.clone();
                for _ in &bags {
                    let (b, r) = rest.peel();
                    bs.push(b);
                    rest = r;
                }
                if rest != *target {
                    continue;
                }
                let mut states: BTreeSet<Env> = remove_one(env, y, d).into_iter().collect();
                for (bag, b) in bags.iter().zip(&bs) {
                    let mut next = BTreeSet::new();
                    for e in &states {
                        next.extend(sat_bag(bag, b, e));
                    }
                    states = next;
                    if states.is_empty() {
                        break;
                    }
                }
                out.extend(states);
            }
        }
    }
    out
}

fn sat_bag(bag: &Bag, b: &[DElem], env: &Env) -> BTreeSet<Env> {
    if bag.linear_part().len() != b.len() {
        return BTreeSet::new();
    }
    sat_matching(bag.linear_part(), b.to_vec(), env)
}

/// Leftovers over all bijections pairing `ls` with the members of `b`.
fn sat_matching(ls: &[Term], b: Vec<DElem>, env: &Env) -> BTreeSet<Env> {
    let Some((l, rest)) = ls.split_first() else {
        return std::iter::once(env.clone()).collect();
    };
    let mut out = BTreeSet::new();
    for (i, beta) in b.iter().enumerate() {
        if i > 0 && b[i - 1] == *beta {
            continue;
        }
        let mut remaining = b.clone();
        remaining.remove(i);
        for e in sat_term(l, beta, env) {
            out.extend(sat_matching(rest, remaining.clone(), &e));
        }
    }
    out
}

fn sat_test(v: &Test, env: &Env) -> BTreeSet<Env> {
    let mut states: BTreeSet<Env> = std::iter::once(env.clone()).collect();
    for e in v.elements() {
        let mut next = BTreeSet::new();
        for s in &states {
            next.extend(sat_term(e, &DElem::star(), s));
        }
        states = next;
        if states.is_empty() {
            break;
        }
    }
    states
}

fn env_of(p: &Point, fv: &BTreeSet<VarName>) -> Result<Env, ModelError> {
    let mut env = Env::new();
    let mut names = BTreeSet::new();
    for (x, m) in &p.env {
        if !names.insert(x.clone()) {
            return Err(ModelError::EnvMismatch(format!("{x} bound twice")));
        }
        if !m.is_empty() {
            let mut m = m.clone();
            m.sort();
            env.insert(x.clone(), m);
        }
    }
    if let Some(x) = fv.iter().find(|x| !names.contains(*x)) {
        return Err(ModelError::EnvMismatch(format!("{x} is free but not in the environment")));
    }
    Ok(env)
}

/// Membership of a point in the interpretation of a normal promotion-free term.
pub fn interp_member_nf(m: &Term, p: &Point) -> Result<bool, ModelError> {
    if !m.is_promotion_free() {
        return Err(ModelError::NotPromotionFree);
    }
    if m.count_redexes() > 0 {
        return Err(ModelError::NotNormalForm);
    }
    let env = env_of(p, &m.free_vars())?;
    Ok(sat_term(m, &p.target, &env).iter().any(|l| l.is_empty()))
}

/// Membership for a promotion-free term, through its normal form.
pub fn interp_member(m: &Term, p: &Point) -> Result<bool, ModelError> {
    interp_member_sum(&Sum::single(m.clone()), p)
}

pub fn interp_member_sum(m: &Sum<Term>, p: &Point) -> Result<bool, ModelError> {
    env_of(p, &m.free_vars())?;
    let n = normalize(m)?;
    for t in &n {
        if interp_member_nf(t, p)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Membership of an environment (as a point with target `*`) in the interpretation of a test.
pub fn interp_test_member(v: &Sum<Test>, env: &[(VarName, Vec<DElem>)]) -> Result<bool, ModelError> {
    let p = Point::new(env.to_vec(), DElem::star());
    let e = env_of(&p, &v.free_vars())?;
    let n = normalize(v)?;
    Ok(n.iter().any(|w| sat_test(w, &e).iter().any(|l| l.is_empty())))
}

/// `⟦m⟧ ≠ ∅`.
pub fn interp_nonempty(m: &Term) -> Result<bool, ModelError> {
    Ok(!normalize(&Sum::single(m.clone()))?.is_zero())
}
