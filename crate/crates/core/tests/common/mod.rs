#![allow(dead_code)]

use rlct::gen::Gen;
use rlct::syntax::{parse_term, parse_test};
use rlct::{Term, Test, VarName};

pub fn name(s: &str) -> VarName {
    VarName::new(s).unwrap()
}

pub fn term(s: &str) -> Term {
    parse_term(s).unwrap().into_iter().next().unwrap()
}

pub fn test(s: &str) -> Test {
    parse_test(s).unwrap().into_iter().next().unwrap()
}

/// Generator over the free variables `vars`, promotion-free unless `full`.
pub fn gen(seed: u64, vars: &[&str], full: bool) -> Gen {
    let mut g = Gen::new(seed);
    g.free = vars.iter().map(|v| name(v)).collect();
    g.promotion = full;
    g
}
