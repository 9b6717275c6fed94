//! Resource λ-calculus with tests.
//!
//! Both the promotion-free fragment and the full calculus with promoted bags
//! are covered, together with the relational model `D`, compilation of model
//! points into terms and test-contexts, Taylor expansion, and the translation
//! of tests into test-free terms.

pub mod definability;
pub mod expansion;
pub mod gen;
pub mod model;
pub mod reduce;
pub mod subst;
pub mod syntax;
pub mod taylor;

pub use syntax::{parse, Bag, Expr, ExprSum, Sort, Sum, Syntax, Term, Test, VarName};
