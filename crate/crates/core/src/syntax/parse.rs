use thiserror::Error;

use super::{
    app_sum, bag_sum, is_ident, is_reserved, lam_sum, par_sum, taubar_sum, test_sum, ExprSum,
    Hint, Sort, Sum, Term, Test, Var, VarName, HOLE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("at byte {pos}: cannot add a {left:?} to a {right:?}")]
    SortMix { pos: usize, left: Sort, right: Sort },
    #[error("at byte {pos}: expected a {expected:?}, found a {found:?}")]
    SortMismatch { pos: usize, expected: Sort, found: Sort },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Backslash,
    Dot,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Bang,
    Plus,
    Bar,
    Ident(String),
    Num(u64),
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '\\' => Some(Tok::Backslash),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '!' => Some(Tok::Bang),
            '+' => Some(Tok::Plus),
            '|' => Some(Tok::Bar),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, i));
            i += 1;
        } else if src[i..].starts_with(HOLE) {
            out.push((Tok::Ident(HOLE.to_string()), i));
            i += HOLE.len();
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "number too large".into(),
            })?;
            out.push((Tok::Num(n), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let ch = src[i..].chars().next().unwrap();
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character {ch:?}") });
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

/// A parsed sum whose sort may still be open (the literal `0`).
#[derive(Clone, Debug)]
enum PSum {
    Zero,
    S(ExprSum),
}

impl PSum {
    fn sort(&self) -> Option<Sort> {
        match self {
            PSum::Zero => None,
            PSum::S(s) => Some(s.sort()),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    scope: Vec<String>,
}

type R<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }
    fn pos(&self) -> usize {
        self.toks[self.i].1
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }
    fn err<T>(&self, msg: impl Into<String>) -> R<T> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.into() })
    }
    fn expect(&mut self, t: Tok, what: &str) -> R<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {:?}", self.peek()))
        }
    }
    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn sum(&mut self) -> R<PSum> {
        let mut acc = self.addend()?;
        while *self.peek() == Tok::Plus {
            let pos = self.pos();
            self.bump();
            let next = self.addend()?;
            acc = add(acc, next, pos)?;
        }
        Ok(acc)
    }

    fn addend(&mut self) -> R<PSum> {
        match self.peek().clone() {
            Tok::Backslash => Ok(PSum::S(ExprSum::Terms(self.lambda()?))),
            Tok::LBrack => Ok(PSum::S(ExprSum::Bags(self.bag()?))),
            Tok::Ident(s) if s == "tau" || s == "eps" => Ok(PSum::S(ExprSum::Tests(self.test()?))),
            _ => {
                let pos = self.pos();
                let head = self.atom()?;
                match head.sort() {
                    Some(Sort::Test) => {
                        let mut acc = match head {
                            PSum::S(ExprSum::Tests(t)) => t,
                            _ => unreachable!(),
                        };
                        while *self.peek() == Tok::Bar {
                            self.bump();
                            let rhs = self.test_operand()?;
                            acc = par_sum(&acc, &rhs);
                        }
                        Ok(PSum::S(ExprSum::Tests(acc)))
                    }
                    Some(Sort::Bag) => Ok(head),
                    None if *self.peek() == Tok::Bar => {
                        self.bump();
                        let _ = self.test_operand()?;
                        while *self.peek() == Tok::Bar {
                            self.bump();
                            let _ = self.test_operand()?;
                        }
                        Ok(PSum::S(ExprSum::Tests(Sum::zero())))
                    }
                    _ => {
                        let f = coerce_terms(head, pos)?;
                        Ok(PSum::S(ExprSum::Terms(self.app_tail(f)?)))
                    }
                }
            }
        }
    }

    /// `term ::= "\" ident+ "." term | app`
    fn term(&mut self) -> R<Sum<Term>> {
        if *self.peek() == Tok::Backslash {
            return self.lambda();
        }
        let pos = self.pos();
        let head = self.atom()?;
        let f = coerce_terms(head, pos)?;
        self.app_tail(f)
    }

    fn lambda(&mut self) -> R<Sum<Term>> {
        self.expect(Tok::Backslash, "\\")?;
        let mut names = Vec::new();
        while let Tok::Ident(s) = self.peek().clone() {
            if is_reserved(&s) || !is_ident(&s) {
                return self.err(format!("{s:?} cannot be bound"));
            }
            self.bump();
            names.push(s);
        }
        if names.is_empty() {
            return self.err("expected a binder after \\");
        }
        self.expect(Tok::Dot, ".")?;
        let n = names.len();
        self.scope.extend(names.iter().cloned());
        let body = self.term();
        self.scope.truncate(self.scope.len() - n);
        let mut body = body?;
        for name in names.iter().rev() {
            body = lam_sum(&Hint(name.clone()), &body);
        }
        Ok(body)
    }

    fn app_tail(&mut self, mut f: Sum<Term>) -> R<Sum<Term>> {
        while *self.peek() == Tok::LBrack {
            let b = self.bag()?;
            f = app_sum(&f, &b);
        }
        Ok(f)
    }

    fn atom(&mut self) -> R<PSum> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let s = self.sum()?;
                self.expect(Tok::RParen, ")")?;
                Ok(s)
            }
            Tok::Num(0) => Ok(PSum::Zero),
            Tok::Ident(s) => self.ident(s, pos),
            t => Err(ParseError::Syntax { pos, msg: format!("unexpected {t:?}") }),
        }
    }

    fn ident(&mut self, s: String, pos: usize) -> R<PSum> {
        let t = match s.as_str() {
            "tbar" => {
                self.expect(Tok::LParen, "(")?;
                let p = self.pos();
                let inner = self.sum()?;
                self.expect(Tok::RParen, ")")?;
                let v = coerce_tests(inner, p)?;
                return Ok(PSum::S(ExprSum::Terms(taubar_sum(&v))));
            }
            "I" => Term::identity(),
            "T" => Term::true_(),
            "F" => Term::false_(),
            "D" => Term::duplicator(),
            "Delta" => Term::delta(),
            "Omega" => Term::omega(),
            "Xi" => {
                self.expect(Tok::LParen, "(")?;
                let mut ns = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        match self.bump() {
                            Tok::Num(n) => ns.push(n as usize),
                            _ => return self.err("expected a natural number"),
                        }
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen, ")")?;
                Term::xi(&ns)
            }
            "tau" | "eps" => {
                return Err(ParseError::Syntax { pos, msg: "a test cannot appear here".into() })
            }
            _ => match self.scope.iter().rposition(|n| *n == s) {
                Some(k) => Term::Var(Var::Bound(self.scope.len() - 1 - k)),
                None if s == HOLE => Term::var(&VarName::hole()),
                None => Term::var(&VarName::new(&s).map_err(|_| ParseError::Syntax {
                    pos,
                    msg: format!("invalid variable {s:?}"),
                })?),
            },
        };
        Ok(PSum::S(ExprSum::Terms(Sum::single(t))))
    }

    /// `bag ::= "[" terms? ( ";" sum "!" )? "]"`
    fn bag(&mut self) -> R<Sum<crate::syntax::Bag>> {
        self.expect(Tok::LBrack, "[")?;
        let mut linear = Vec::new();
        if !matches!(self.peek(), Tok::RBrack | Tok::Semi) {
            linear = self.terms()?;
        }
        let mut promoted = Sum::zero();
        if *self.peek() == Tok::Semi {
            self.bump();
            let p = self.pos();
            let s = self.sum()?;
            promoted = coerce_terms(s, p)?;
            self.expect(Tok::Bang, "!")?;
        }
        self.expect(Tok::RBrack, "]")?;
        Ok(bag_sum(&linear, &promoted))
    }

    fn terms(&mut self) -> R<Vec<Sum<Term>>> {
        let mut out = Vec::new();
        loop {
            let p = self.pos();
            let s = self.sum()?;
            out.push(coerce_terms(s, p)?);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    /// `test ::= "tau" "[" terms? "]" ("|" test)* | "eps"`
    fn test(&mut self) -> R<Sum<Test>> {
        let mut acc = self.test_primary()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.test_operand()?;
            acc = par_sum(&acc, &rhs);
        }
        Ok(acc)
    }

    fn test_primary(&mut self) -> R<Sum<Test>> {
        if self.is_kw("eps") {
            self.bump();
            return Ok(Sum::single(Test::epsilon()));
        }
        if self.is_kw("tau") {
            self.bump();
            self.expect(Tok::LBrack, "[")?;
            let mut elems = Vec::new();
            if *self.peek() != Tok::RBrack {
                elems = self.terms()?;
            }
            self.expect(Tok::RBrack, "]")?;
            return Ok(test_sum(&elems));
        }
        self.err("expected a test")
    }

    fn test_operand(&mut self) -> R<Sum<Test>> {
        if *self.peek() == Tok::LParen {
            let p = self.pos();
            let s = self.atom()?;
            return coerce_tests(s, p);
        }
        self.test_primary()
    }
}

fn add(a: PSum, b: PSum, pos: usize) -> R<PSum> {
    Ok(match (a, b) {
        (PSum::Zero, x) | (x, PSum::Zero) => x,
        (PSum::S(x), PSum::S(y)) => PSum::S(match (x, y) {
            (ExprSum::Terms(x), ExprSum::Terms(y)) => ExprSum::Terms(x.union(y)),
            (ExprSum::Bags(x), ExprSum::Bags(y)) => ExprSum::Bags(x.union(y)),
            (ExprSum::Tests(x), ExprSum::Tests(y)) => ExprSum::Tests(x.union(y)),
            (x, y) => return Err(ParseError::SortMix { pos, left: x.sort(), right: y.sort() }),
        }),
    })
}

fn coerce_terms(s: PSum, pos: usize) -> R<Sum<Term>> {
    match s {
        PSum::Zero => Ok(Sum::zero()),
        PSum::S(ExprSum::Terms(t)) => Ok(t),
        PSum::S(other) => Err(ParseError::SortMismatch { pos, expected: Sort::Term, found: other.sort() }),
    }
}

fn coerce_tests(s: PSum, pos: usize) -> R<Sum<Test>> {
    match s {
        PSum::Zero => Ok(Sum::zero()),
        PSum::S(ExprSum::Tests(t)) => Ok(t),
        PSum::S(other) => Err(ParseError::SortMismatch { pos, expected: Sort::Test, found: other.sort() }),
    }
}

/// Parse a sum of any sort. A bare `0` is read as the zero sum of terms.
pub fn parse(text: &str) -> Result<ExprSum, ParseError> {
    let mut p = Parser { toks: lex(text)?, i: 0, scope: Vec::new() };
    let s = p.sum()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {:?}", p.peek()));
    }
    Ok(match s {
        PSum::Zero => ExprSum::Terms(Sum::zero()),
        PSum::S(s) => s,
    })
}

pub fn parse_term(text: &str) -> Result<Sum<Term>, ParseError> {
    match parse(text)? {
        ExprSum::Terms(t) => Ok(t),
        other => Err(ParseError::SortMismatch { pos: 0, expected: Sort::Term, found: other.sort() }),
    }
}

pub fn parse_test(text: &str) -> Result<Sum<Test>, ParseError> {
    let mut p = Parser { toks: lex(text)?, i: 0, scope: Vec::new() };
    let s = p.sum()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {:?}", p.peek()));
    }
    coerce_tests(s, 0)
}
