//! Linear and regular substitution.
//!
//! Substituted terms are locally closed, so descending under a binder needs no
//! renaming: free names cannot be captured by de Bruijn binders.

use crate::syntax::{
    on_sum, product, Bag, Expr, ExprSum, Sum, Syntax, Term, Test, Var, VarName,
};

/// Syntactic sorts that support both substitutions.
pub trait Subst: Syntax {
    /// `A⟨N/x⟩`: replace exactly one free occurrence, summing over the choices.
    fn lsubst(&self, x: &VarName, n: &Term) -> Sum<Self>;
    /// `A[ℕ/x]`: replace every free occurrence by the whole sum.
    fn subst(&self, x: &VarName, n: &Sum<Term>) -> Sum<Self>;
}

impl Subst for Term {
    fn lsubst(&self, x: &VarName, n: &Term) -> Sum<Term> {
        match self {
            Term::Var(Var::Free(y)) if y == x => Sum::single(n.clone()),
            Term::Var(_) => Sum::zero(),
            Term::Lam(h, b) => b.lsubst(x, n).map(|b| Term::Lam(h.clone(), Box::new(b.clone()))),
            Term::App(m, p) => {
                let mut out: Sum<Term> = m
                    .lsubst(x, n)
                    .map(|m2| Term::App(Box::new(m2.clone()), p.clone()));
                for p2 in p.lsubst(x, n) {
                    out.insert(Term::App(m.clone(), Box::new(p2)));
                }
                out
            }
            Term::TauBar(v) => v.lsubst(x, n).map(|v| Term::taubar(v.clone())),
        }
    }

    fn subst(&self, x: &VarName, n: &Sum<Term>) -> Sum<Term> {
        if !self.mentions(x) {
            return Sum::single(self.clone());
        }
        match self {
            Term::Var(Var::Free(y)) if y == x => n.clone(),
            Term::Var(_) => Sum::single(self.clone()),
            Term::Lam(h, b) => b.subst(x, n).map(|b| Term::Lam(h.clone(), Box::new(b.clone()))),
            Term::App(m, p) => {
                let ms = m.subst(x, n);
                let ps = p.subst(x, n);
                let mut out = Sum::zero();
                for m2 in &ms {
                    for p2 in &ps {
                        out.insert(Term::app(m2.clone(), p2.clone()));
                    }
                }
                out
            }
            Term::TauBar(v) => v.subst(x, n).map(|v| Term::taubar(v.clone())),
        }
    }
}

impl Subst for Bag {
    fn lsubst(&self, x: &VarName, n: &Term) -> Sum<Bag> {
        let lin = self.linear_part();
        let mut out = Sum::zero();
        for (i, l) in lin.iter().enumerate() {
            for l2 in l.lsubst(x, n) {
                let mut v = lin.to_vec();
                v[i] = l2;
                out.insert(Bag::new(v, self.promoted_part().clone()));
            }
        }
        // A promoted resource may be used once more, linearly.
        for p in self.promoted_part() {
            for p2 in p.lsubst(x, n) {
                out.insert(self.with(p2));
            }
        }
        out
    }

    fn subst(&self, x: &VarName, n: &Sum<Term>) -> Sum<Bag> {
        if !self.mentions(x) {
            return Sum::single(self.clone());
        }
        let choices: Vec<Vec<Term>> = self
            .linear_part()
            .iter()
            .map(|l| l.subst(x, n).into_iter().collect())
            .collect();
        let promoted: Sum<Term> = self.promoted_part().flat_map(|p| p.subst(x, n));
        product(&choices)
            .into_iter()
            .map(|ls| Bag::new(ls, promoted.clone()))
            .collect()
    }
}

impl Subst for Test {
    fn lsubst(&self, x: &VarName, n: &Term) -> Sum<Test> {
        let els = self.elements();
        let mut out = Sum::zero();
        for (i, l) in els.iter().enumerate() {
            for l2 in l.lsubst(x, n) {
                let mut v = els.to_vec();
                v[i] = l2;
                out.insert(Test::new(v));
            }
        }
        out
    }

    fn subst(&self, x: &VarName, n: &Sum<Term>) -> Sum<Test> {
        if !self.mentions(x) {
            return Sum::single(self.clone());
        }
        let choices: Vec<Vec<Term>> = self
            .elements()
            .iter()
            .map(|l| l.subst(x, n).into_iter().collect())
            .collect();
        product(&choices).into_iter().map(Test::new).collect()
    }
}

/// Bilinear extension of linear substitution.
pub fn lsubst_sum<T: Subst>(a: &Sum<T>, x: &VarName, n: &Sum<Term>) -> Sum<T> {
    let mut out = Sum::zero();
    for t in a {
        for m in n {
            out.extend(t.lsubst(x, m));
        }
    }
    out
}

/// Extension of regular substitution, linear in the first argument only.
pub fn subst_sum<T: Subst>(a: &Sum<T>, x: &VarName, n: &Sum<Term>) -> Sum<T> {
    a.flat_map(|t| t.subst(x, n))
}

/// `A⟨L1/x⟩⋯⟨Lk/x⟩`.
pub fn lsubst_bag_sum<T: Subst>(a: &Sum<T>, x: &VarName, p: &[Term]) -> Sum<T> {
    let mut acc = a.clone();
    for l in p {
        if acc.is_zero() {
            break;
        }
        acc = acc.flat_map(|t| t.lsubst(x, l));
    }
    acc
}

pub fn linear_subst(a: &Expr, x: &VarName, n: &Term) -> ExprSum {
    match a {
        Expr::T(t) => ExprSum::Terms(t.lsubst(x, n)),
        Expr::B(b) => ExprSum::Bags(b.lsubst(x, n)),
        Expr::Q(q) => ExprSum::Tests(q.lsubst(x, n)),
    }
}

pub fn linear_subst_sum(a: &ExprSum, x: &VarName, n: &Sum<Term>) -> ExprSum {
    on_sum!(a, s => Syntax::wrap_sum(lsubst_sum(s, x, n)))
}

pub fn subst(a: &Expr, x: &VarName, n: &Sum<Term>) -> ExprSum {
    match a {
        Expr::T(t) => ExprSum::Terms(t.subst(x, n)),
        Expr::B(b) => ExprSum::Bags(b.subst(x, n)),
        Expr::Q(q) => ExprSum::Tests(q.subst(x, n)),
    }
}

pub fn subst_sum_expr(a: &ExprSum, x: &VarName, n: &Sum<Term>) -> ExprSum {
    on_sum!(a, s => Syntax::wrap_sum(subst_sum(s, x, n)))
}

pub fn linear_subst_bag(a: &Expr, x: &VarName, p: &[Term]) -> ExprSum {
    let s = ExprSum::from_expr(a.clone());
    on_sum!(&s, s => Syntax::wrap_sum(lsubst_bag_sum(s, x, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Sum<Term> {
        parse_term(s).unwrap()
    }
    fn one(s: &str) -> Term {
        t(s).into_iter().next().unwrap()
    }
    fn name(s: &str) -> VarName {
        VarName::new(s).unwrap()
    }

    #[test]
    fn linear_examples() {
        let x = name("x");
        assert_eq!(one("\\y.y[x][x]").lsubst(&x, &Term::identity()), t("\\y.y[I][x] + \\y.y[x][I]"));
        assert!(one("\\y.y[T]").lsubst(&x, &one("z")).is_zero());
        assert_eq!(one("y[; x!]").lsubst(&x, &one("z")), t("y[z; x!]"));
        let twice = lsubst_sum(&one("x[; x!]").lsubst(&x, &one("y")), &x, &t("z"));
        assert_eq!(twice, t("y[z; x!] + z[y; x!] + x[y, z; x!]"));
    }

    #[test]
    fn linear_sum_examples() {
        let x = name("x");
        assert_eq!(
            lsubst_sum(&t("x[; x!]"), &x, &t("y + z")),
            t("y[; x!] + z[; x!] + x[y; x!] + x[z; x!]")
        );
        assert!(lsubst_sum(&t("x"), &x, &Sum::zero()).is_zero());
        assert!(lsubst_sum(&Sum::<Term>::zero(), &x, &t("y")).is_zero());
    }

    #[test]
    fn regular_examples() {
        let x = name("x");
        assert_eq!(one("\\y.y[x][x]").subst(&x, &t("I")), t("\\y.y[I][I]"));
        assert_eq!(one("x[x]").subst(&x, &t("y + z")), t("y[y] + y[z] + z[y] + z[z]"));
        assert_eq!(one("x[; x!]").subst(&x, &t("y + z")), t("y[; (y + z)!] + z[; (y + z)!]"));
        assert!(one("x[x]").subst(&x, &Sum::zero()).is_zero());
        assert_eq!(one("y[; x!]").subst(&x, &Sum::zero()), t("y[]"));
    }

    #[test]
    fn bag_examples() {
        let x = name("x");
        let a = t("\\y.y[T]");
        assert_eq!(lsubst_bag_sum(&a, &x, &[]), a);
        let two = [Term::identity(), Term::false_()];
        assert_eq!(lsubst_bag_sum(&t("y[x][x]"), &x, &two), t("y[I][F] + y[F][I]"));
        assert!(lsubst_bag_sum(&t("y[x]"), &x, &two).is_zero());
    }

    #[test]
    fn under_binders_without_capture() {
        let x = name("x");
        // The substituted `y` stays free even though the binder hint is `y`.
        let r = one("\\y.x[y]").lsubst(&x, &one("y"));
        let expected = Term::Lam(
            crate::syntax::Hint::new("z"),
            Box::new(Term::app(one("y"), Bag::linear(vec![Term::Var(Var::Bound(0))]))),
        );
        assert_eq!(r, Sum::single(expected));
        assert_eq!(r.to_string(), "\\y1.y[y1]");
    }
}
