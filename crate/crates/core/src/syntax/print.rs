use std::collections::BTreeSet;
use std::fmt;

use super::{is_ident, is_reserved, Bag, Expr, ExprSum, Sum, Syntax, Term, Test, Var};

struct Printer {
    free: BTreeSet<String>,
    scope: Vec<String>,
    out: String,
}

impl Printer {
    fn new(free: BTreeSet<String>) -> Self {
        Printer { free, scope: Vec::new(), out: String::new() }
    }

    fn binder(&self, hint: &str) -> String {
        let base = if is_ident(hint) && !is_reserved(hint) { hint } else { "x" };
        let clash = |s: &str| self.free.contains(s) || self.scope.iter().any(|n| n == s);
        if !clash(base) {
            return base.to_string();
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "x" } else { stem };
        (1..).map(|i| format!("{stem}{i}")).find(|c| !clash(c)).unwrap()
    }

    fn term(&mut self, t: &Term, head: bool) {
        match t {
            Term::Var(Var::Free(n)) => self.out.push_str(n.as_str()),
            Term::Var(Var::Bound(i)) => {
                let name = self
                    .scope
                    .len()
                    .checked_sub(i + 1)
                    .map(|k| self.scope[k].clone())
                    .unwrap_or_else(|| format!("#{i}"));
                self.out.push_str(&name);
            }
            Term::Lam(..) => {
                if head {
                    self.out.push('(');
                }
                self.out.push('\\');
                let mut t = t;
                let mut pushed = 0;
                while let Term::Lam(h, b) = t {
                    let n = self.binder(&h.0);
                    if pushed > 0 {
                        self.out.push(' ');
                    }
                    self.out.push_str(&n);
                    self.scope.push(n);
                    pushed += 1;
                    t = b;
                }
                self.out.push('.');
                self.term(t, false);
                self.scope.truncate(self.scope.len() - pushed);
                if head {
                    self.out.push(')');
                }
            }
            Term::App(m, p) => {
                self.term(m, true);
                self.bag(p);
            }
            Term::TauBar(v) => {
                self.out.push_str("tbar(");
                self.test(v);
                self.out.push(')');
            }
        }
    }

    fn bag(&mut self, b: &Bag) {
        self.out.push('[');
        self.list(b.linear_part());
        let p = b.promoted_part();
        if !p.is_zero() {
            self.out.push_str("; ");
            if p.len() == 1 {
                self.term(p.first().unwrap(), false);
            } else {
                self.out.push('(');
                self.term_sum(p);
                self.out.push(')');
            }
            self.out.push('!');
        }
        self.out.push(']');
    }

    fn list(&mut self, ts: &[Term]) {
        for (i, t) in ts.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.term(t, false);
        }
    }

    fn test(&mut self, v: &Test) {
        if v.is_epsilon() {
            self.out.push_str("eps");
        } else {
            self.out.push_str("tau[");
            self.list(v.elements());
            self.out.push(']');
        }
    }

    fn term_sum(&mut self, s: &Sum<Term>) {
        self.sum_with(s, |p, t| p.term(t, false));
    }

    fn sum_with<T: Ord>(&mut self, s: &Sum<T>, mut f: impl FnMut(&mut Self, &T)) {
        if s.is_zero() {
            self.out.push('0');
            return;
        }
        for (i, t) in s.iter().enumerate() {
            if i > 0 {
                self.out.push_str(" + ");
            }
            f(self, t);
        }
    }
}

fn free_strings<T: Syntax>(t: &T) -> BTreeSet<String> {
    t.free_vars().into_iter().map(|n| n.as_str().to_string()).collect()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer::new(free_strings(self));
        p.term(self, false);
        f.write_str(&p.out)
    }
}

impl fmt::Display for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer::new(free_strings(self));
        p.bag(self);
        f.write_str(&p.out)
    }
}

impl fmt::Display for Test {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer::new(free_strings(self));
        p.test(self);
        f.write_str(&p.out)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::T(t) => t.fmt(f),
            Expr::B(b) => b.fmt(f),
            Expr::Q(q) => q.fmt(f),
        }
    }
}

impl<T: Syntax + fmt::Display> fmt::Display for Sum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, t) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            fmt::Display::fmt(t, f)?;
        }
        Ok(())
    }
}

impl fmt::Display for ExprSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprSum::Terms(s) => s.fmt(f),
            ExprSum::Bags(s) => s.fmt(f),
            ExprSum::Tests(s) => s.fmt(f),
        }
    }
}
