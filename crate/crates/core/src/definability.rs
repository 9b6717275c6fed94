//! Compilation of model points into closed terms and test-contexts.

use std::fmt;

use crate::model::{interp_member, DElem, ModelError, Point};
use crate::reduce::{closed_test_outcome, converges, Fuel, Outcome};
use crate::syntax::{Bag, Hint, Syntax, Term, Test, Var, VarName};

/// A test with exactly one hole in term position. Filling is blind: free
/// variables of the plugged term may be captured by binders above the hole.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TestContext {
    test: Test,
}

impl TestContext {
    /// Wrap a test containing exactly one occurrence of the hole.
    pub fn new(test: Test) -> Option<TestContext> {
        let hole = VarName::hole();
        let mut n = 0;
        test.visit_vars(0, false, &mut |v, _, _| {
            if matches!(v, Var::Free(x) if *x == hole) {
                n += 1;
            }
        });
        (n == 1).then_some(TestContext { test })
    }

    pub fn test(&self) -> &Test {
        &self.test
    }

    pub fn fill(&self, m: &Term) -> Test {
        let mut hints = Vec::new();
        fill_test(&self.test, m, &mut hints)
    }
}

impl fmt::Display for TestContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.test.fmt(f)
    }
}

fn fill_test(v: &Test, m: &Term, hints: &mut Vec<String>) -> Test {
    Test::new(v.elements().iter().map(|e| fill_term(e, m, hints)).collect())
}

fn fill_term(t: &Term, m: &Term, hints: &mut Vec<String>) -> Term {
    match t {
        Term::Var(Var::Free(x)) if x.is_hole() => capture(m, hints),
        Term::Var(_) => t.clone(),
        Term::Lam(h, b) => {
            hints.push(h.0.clone());
            let b2 = fill_term(b, m, hints);
            hints.pop();
            Term::Lam(h.clone(), Box::new(b2))
        }
        Term::App(f, p) => {
            let f2 = fill_term(f, m, hints);
            let lin = p.linear_part().iter().map(|l| fill_term(l, m, hints)).collect();
            let prom = p.promoted_part().iter().map(|l| fill_term(l, m, hints)).collect();
            Term::app(f2, Bag::new(lin, prom))
        }
        Term::TauBar(v) => Term::taubar(fill_test(v, m, hints)),
    }
}

/// Bind the free variables of `m` named like enclosing binders, innermost first.
fn capture(m: &Term, hints: &[String]) -> Term {
    m.map_vars(0, &mut |v, d| match v {
        Var::Free(x) => match hints.iter().rposition(|h| h == x.as_str()) {
            Some(k) => Term::Var(Var::Bound(d + hints.len() - 1 - k)),
            None => Term::Var(v.clone()),
        },
        v => Term::Var(v.clone()),
    })
}

fn lam(hint: &str, x: &VarName, body: Term) -> Term {
    Term::Lam(Hint::new(hint), Box::new(body.close(x, 0)))
}

/// `head [a1⁺] … [ar⁺]` placed alone in a test: the context `α⁻` filled with `head`.
fn minus_applied(a: &DElem, head: Term) -> Test {
    Test::new(vec![Term::apps(head, a.levels().iter().map(|l| bag_plus(l)))])
}

/// `α⁺`, the closed term whose interpretation is `{α}`.
pub fn alpha_plus(a: &DElem) -> Term {
    let xs: Vec<VarName> = a.levels().iter().map(|_| VarName::fresh()).collect();
    let mut parts = Vec::new();
    for (x, level) in xs.iter().zip(a.levels()) {
        for b in level {
            parts.push(minus_applied(b, Term::var(x)));
        }
    }
    let body = Term::taubar(Test::par_all(&parts));
    xs.iter().rev().fold(body, |t, x| lam("x", x, t))
}

pub fn bag_plus(a: &[DElem]) -> Bag {
    Bag::linear(a.iter().map(alpha_plus).collect())
}

/// `α⁻⟨·⟩`, the test-context recognizing `α`.
pub fn alpha_minus(a: &DElem) -> TestContext {
    TestContext { test: minus_applied(a, Term::var(&VarName::hole())) }
}

pub fn separation(a: &DElem, b: &DElem) -> Outcome {
    closed_test_outcome(&alpha_minus(a).fill(&alpha_plus(b))).expect("closed promotion-free test")
}

fn check_env(m: &Term, p: &Point) -> Result<(), ModelError> {
    let mut names = std::collections::BTreeSet::new();
    for (x, _) in &p.env {
        if !names.insert(x.clone()) {
            return Err(ModelError::EnvMismatch(format!("{x} bound twice")));
        }
    }
    match m.free_vars().into_iter().find(|x| !names.contains(x)) {
        Some(x) => Err(ModelError::EnvMismatch(format!("{x} is free but not in the environment"))),
        None => Ok(()),
    }
}

/// `α⁻⟨(λx̄.·) ā⁺⟩` for the point `(ā, α)`.
pub fn separating_context(p: &Point) -> TestContext {
    let names: Vec<VarName> = p.env.iter().map(|(x, _)| x.clone()).collect();
    let head = Term::abs_many(&names, Term::var(&VarName::hole()));
    let head = Term::apps(head, p.env.iter().map(|(_, a)| bag_plus(a)));
    TestContext { test: minus_applied(&p.target, head) }
}

fn probe_test(m: &Term, p: &Point) -> Test {
    let names: Vec<VarName> = p.env.iter().map(|(x, _)| x.clone()).collect();
    let head = Term::apps(Term::abs_many(&names, m.clone()), p.env.iter().map(|(_, a)| bag_plus(a)));
    minus_applied(&p.target, head)
}

/// Membership decided operationally, by running the separating test.
pub fn member_by_test(m: &Term, p: &Point) -> Result<bool, ModelError> {
    if !m.is_promotion_free() {
        return Err(ModelError::NotPromotionFree);
    }
    check_env(m, p)?;
    Ok(closed_test_outcome(&probe_test(m, p))? == Outcome::Epsilon)
}

/// Membership for the full calculus, semi-decided within `fuel`.
pub fn member_by_test_full(m: &Term, p: &Point, fuel: Fuel) -> Result<Outcome, ModelError> {
    check_env(m, p)?;
    Ok(converges(&probe_test(m, p), fuel)?)
}

/// `Some(b)` when membership is settled, `None` when inconclusive.
fn settled_member(m: &Term, p: &Point, fuel: Fuel) -> Result<Option<bool>, ModelError> {
    if m.is_promotion_free() {
        return interp_member(m, p).map(Some);
    }
    Ok(match member_by_test_full(m, p, fuel)? {
        Outcome::Epsilon => Some(true),
        Outcome::Zero => Some(false),
        Outcome::Unknown(_) => None,
    })
}

/// First point settled to be in `⟦m⟧` and not in `⟦n⟧`. Inconclusive points are skipped.
pub fn preorder_probe(m: &Term, n: &Term, points: &[Point], fuel: Fuel) -> Result<Option<Point>, ModelError> {
    for p in points {
        if settled_member(m, p, fuel)? == Some(true) && settled_member(n, p, fuel)? == Some(false) {
            return Ok(Some(p.clone()));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_d, parse_delem, points_by_weight, Bounds};
    use crate::reduce::UnknownReason;
    use crate::syntax::parse_term;

    fn one(s: &str) -> Term {
        parse_term(s).unwrap().into_iter().next().unwrap()
    }
    fn d(s: &str) -> DElem {
        parse_delem(s).unwrap()
    }

    #[test]
    fn compiled_examples() {
        assert_eq!(alpha_plus(&DElem::star()), one("tbar(eps)"));
        assert_eq!(alpha_plus(&d("[*]::*")), one("\\x.tbar(tau[x])"));
        assert_eq!(alpha_minus(&DElem::star()).to_string(), "tau[<hole>]");
        assert_eq!(alpha_minus(&d("[*]::*")).to_string(), "tau[<hole>[tbar(eps)]]");
        assert_eq!(alpha_plus(&d("[*, [*]::*]::[*]::*")).to_string(), "\\x x1.tbar(tau[x1, x, x[tbar(eps)]])");
    }

    #[test]
    fn separation_examples() {
        assert_eq!(separation(&DElem::star(), &DElem::star()), Outcome::Epsilon);
        assert_eq!(separation(&DElem::star(), &d("[*]::*")), Outcome::Zero);
        assert_eq!(separation(&d("[*]::*"), &d("[*]::*")), Outcome::Epsilon);
    }

    #[test]
    fn blind_fill_captures() {
        let x = VarName::new("x").unwrap();
        let p = Point::new(vec![(x, vec![DElem::star()])], DElem::star());
        let c = separating_context(&p);
        assert_eq!(c.to_string(), "tau[(\\x.<hole>)[tbar(eps)]]");
        assert_eq!(c.fill(&one("x")), probe_test(&one("x"), &p));
        assert_eq!(closed_test_outcome(&c.fill(&one("x"))), Ok(Outcome::Epsilon));
    }

    #[test]
    fn membership_by_test_examples() {
        assert!(member_by_test(&one("I"), &Point::closed(d("[*]::*"))).unwrap());
        for a in enumerate_d(2, 2, 2).iter().take(200) {
            assert!(!member_by_test(&one("D[I]"), &Point::closed(a.clone())).unwrap());
        }
        let x = VarName::new("x").unwrap();
        assert!(member_by_test(&one("x"), &Point::new(vec![(x, vec![DElem::star()])], DElem::star())).unwrap());
        assert!(matches!(member_by_test(&one("y"), &Point::closed(DElem::star())), Err(ModelError::EnvMismatch(_))));
    }

    #[test]
    fn full_membership_examples() {
        let f = Fuel::new(1000);
        let di = one("D[; I!]");
        assert_eq!(member_by_test_full(&di, &Point::closed(d("[*]::*")), f), Ok(Outcome::Epsilon));
        assert_eq!(member_by_test_full(&di, &Point::closed(d("[*, *]::*")), f), Ok(Outcome::Zero));
        let o = member_by_test_full(&one("Omega"), &Point::closed(DElem::star()), Fuel::new(50)).unwrap();
        assert!(matches!(o, Outcome::Unknown(UnknownReason::CycleDetected) | Outcome::Zero));
    }

    #[test]
    fn probe_examples() {
        let pts: Vec<Point> = points_by_weight(&[], Bounds::new(2, 2, 2), 200);
        let f = Fuel::new(100);
        assert_eq!(preorder_probe(&one("D[I]"), &one("I"), &pts, f), Ok(None));
        let sep = preorder_probe(&one("I"), &one("D[I]"), &pts, f).unwrap().unwrap();
        assert_eq!(sep.target, d("[*]::*"));
        assert_eq!(preorder_probe(&one("T"), &one("T"), &pts, f), Ok(None));
        let sep = preorder_probe(&one("T"), &one("F"), &pts, f).unwrap().unwrap();
        assert!(member_by_test(&one("T"), &sep).unwrap());
        assert!(!member_by_test(&one("F"), &sep).unwrap());
    }
}
