//! The `rlct` command line, callable in-process through [`run`].

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rlct::definability::{alpha_minus, alpha_plus, member_by_test, member_by_test_full, preorder_probe, separating_context};
use rlct::expansion::{dom, ell_expand, label, solvable, EllMap};
use rlct::model::{interp_member, parse_delem, parse_point, points_by_weight, Bounds, ModelError, Point};
use rlct::reduce::{converges_sum, head_step_expr, normalize_expr, normalize_with, Fuel, Outcome, Strategy, UnknownReason};
use rlct::taylor::{taylor_enumerate_expr, taylor_member, TaylorError};
use rlct::{parse, Expr, ExprSum, Sum, Syntax, Term, VarName};

#[derive(Parser)]
#[command(name = "rlct", version, about = "Resource lambda-calculus with tests")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Input {
    /// Read the expression from a file ("-" for stdin).
    file: Option<PathBuf>,
    /// Expression given inline.
    #[arg(short = 'e', long = "expr")]
    expr: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Via {
    Test,
    Direct,
    Taylor,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and print in canonical form.
    Parse(Input),
    /// Normal form of a promotion-free expression.
    Normalize(Input),
    /// Perform head steps.
    Head {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Fair head reduction of a closed test.
    Converges {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
    /// Is a point in the interpretation of a term?
    Member {
        #[arg(long)]
        term: Option<String>,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        point: String,
        /// Allow promoted bags, deciding through bounded head reduction.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        #[arg(long, value_enum, default_value_t = Via::Test)]
        via: Via,
        #[arg(long, default_value_t = 12)]
        size_bound: usize,
    },
    /// Compile a model element into its term and test-context.
    Testctx {
        #[arg(long)]
        point: String,
    },
    /// Taylor approximants up to a size bound.
    Taylor {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        size_bound: usize,
    },
    /// Replace tests by dummy abstractions and empty applications.
    Expand {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "{default:0}")]
        ell: String,
    },
    /// Solvability of a test-free promotion-free term.
    Solvable(Input),
    /// Search for a point in the left interpretation but not the right one.
    Probe {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = 3)]
        max_rank: usize,
        #[arg(long, default_value_t = 3)]
        max_width: usize,
        #[arg(long, default_value_t = 3)]
        max_length: usize,
        #[arg(long, default_value_t = 500)]
        max_points: usize,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
}

enum Failure {
    Parse(String),
    Precondition(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Parse { .. } => Failure::Parse(e.to_string()),
            e => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<TaylorError> for Failure {
    fn from(e: TaylorError) -> Self {
        match e {
            TaylorError::Model(m) => m.into(),
            e => Failure::Precondition(e.to_string()),
        }
    }
}

fn pre<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Precondition(e.to_string())
}

/// Result of a subcommand: exit code, JSON document, human-readable text.
struct Report {
    code: u8,
    json: Value,
    text: String,
}

fn report(code: u8, json: Value, text: impl Into<String>) -> Report {
    Report { code, json, text: text.into() }
}

fn read_input(input: &Input) -> Result<String, Failure> {
    match (&input.expr, &input.file) {
        (Some(e), _) => Ok(e.clone()),
        (None, Some(p)) if p.as_os_str() != "-" => std::fs::read_to_string(p).map_err(|e| pre(format!("{}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(pre)?;
            Ok(s)
        }
    }
}

fn parse_text(src: &str) -> Result<ExprSum, Failure> {
    parse(src).map_err(|e| Failure::Parse(e.to_string()))
}

fn parse_input(input: &Input) -> Result<ExprSum, Failure> {
    parse_text(&read_input(input)?)
}

fn terms_of(e: ExprSum) -> Result<Sum<Term>, Failure> {
    if e.is_zero() {
        return Ok(Sum::zero());
    }
    e.into_terms().ok_or_else(|| pre("expected a term"))
}

fn sort_name(e: &ExprSum) -> &'static str {
    match e {
        ExprSum::Terms(_) => "term",
        ExprSum::Bags(_) => "bag",
        ExprSum::Tests(_) => "test",
    }
}

/// Closed terms printed by their prelude name when they are one.
fn named(e: &Expr) -> String {
    if let Expr::T(t) = e {
        let prelude = [
            ("I", Term::identity()),
            ("T", Term::true_()),
            ("F", Term::false_()),
            ("D", Term::duplicator()),
            ("Delta", Term::delta()),
            ("Omega", Term::omega()),
        ];
        if let Some((name, _)) = prelude.iter().find(|(_, c)| c == t) {
            return name.to_string();
        }
    }
    e.to_string()
}

fn summands(e: &ExprSum) -> Vec<String> {
    e.summands().iter().map(named).collect()
}

fn show(e: &ExprSum) -> String {
    let s = summands(e);
    if s.is_empty() {
        "0".to_string()
    } else {
        s.join(" + ")
    }
}

fn outcome_name(o: Outcome) -> (&'static str, Option<&'static str>, u8) {
    match o {
        Outcome::Epsilon => ("epsilon", None, 0),
        Outcome::Zero => ("zero", None, 1),
        Outcome::Unknown(UnknownReason::FuelExhausted) => ("unknown", Some("fuel_exhausted"), 4),
        Outcome::Unknown(UnknownReason::CycleDetected) => ("unknown", Some("cycle_detected"), 4),
    }
}

fn seed() -> Option<u64> {
    std::env::var("RLCT_SEED").ok().and_then(|s| s.trim().parse().ok())
}

fn cmd_parse(input: &Input) -> Result<Report, Failure> {
    let e = parse_input(input)?;
    let text = show(&e);
    Ok(report(0, json!({"sort": sort_name(&e), "text": text, "summands": summands(&e)}), text))
}

fn cmd_normalize(input: &Input) -> Result<Report, Failure> {
    let e = parse_input(input)?;
    let nf = match seed() {
        None => normalize_expr(&e).map_err(pre)?,
        Some(s) => {
            let mut st = Strategy::seeded(s);
            match e {
                ExprSum::Terms(t) => ExprSum::Terms(normalize_with(&t, &mut st).map_err(pre)?),
                ExprSum::Bags(b) => ExprSum::Bags(normalize_with(&b, &mut st).map_err(pre)?),
                ExprSum::Tests(q) => ExprSum::Tests(normalize_with(&q, &mut st).map_err(pre)?),
            }
        }
    };
    let text = show(&nf);
    Ok(report(0, json!({"sort": sort_name(&nf), "normal_form": text, "summands": summands(&nf), "is_zero": nf.is_zero()}), text))
}

fn cmd_head(input: &Input, steps: usize) -> Result<Report, Failure> {
    let mut e = parse_input(input)?;
    let mut trace = vec![show(&e)];
    let mut taken = 0;
    while taken < steps {
        match head_step_expr(&e) {
            Some(next) => {
                e = next;
                taken += 1;
                trace.push(show(&e));
            }
            None => break,
        }
    }
    let normal = head_step_expr(&e).is_none();
    let text = trace.join("\n");
    Ok(report(0, json!({"steps_taken": taken, "result": show(&e), "trace": trace, "head_normal": normal}), text))
}

fn cmd_converges(input: &Input, fuel: usize) -> Result<Report, Failure> {
    let e = parse_input(input)?;
    let tests = match e {
        ExprSum::Tests(q) => q,
        e if e.is_zero() => Sum::zero(),
        _ => return Err(pre("expected a test")),
    };
    let o = converges_sum(&tests, Fuel::new(fuel)).map_err(pre)?;
    let (name, reason, code) = outcome_name(o);
    let text = match reason {
        Some(r) => format!("{name} ({})", r.replace('_', " ")),
        None => name.to_string(),
    };
    Ok(report(code, json!({"outcome": name, "reason": reason}), text))
}

/// Membership in a sum: any summand settles it positively, otherwise any inconclusive summand is unknown.
fn cmd_member(term: &Sum<Term>, point: &Point, full: bool, fuel: usize, via: Via, bound: usize) -> Result<Report, Failure> {
    let mut unknown = None;
    let mut found = false;
    for m in term {
        if !full && !matches!(via, Via::Taylor) && !m.is_promotion_free() {
            return Err(pre("the term has promoted bags; pass --full"));
        }
        let o = match via {
            Via::Direct => {
                if interp_member(m, point)? {
                    Outcome::Epsilon
                } else {
                    Outcome::Zero
                }
            }
            Via::Taylor => {
                if taylor_member(m, point, bound)? {
                    Outcome::Epsilon
                } else {
                    Outcome::Zero
                }
            }
            Via::Test if full => member_by_test_full(m, point, Fuel::new(fuel))?,
            Via::Test => {
                if member_by_test(m, point)? {
                    Outcome::Epsilon
                } else {
                    Outcome::Zero
                }
            }
        };
        match o {
            Outcome::Epsilon => {
                found = true;
                break;
            }
            Outcome::Unknown(r) => unknown = Some(r),
            Outcome::Zero => {}
        }
    }
    let o = if found {
        Outcome::Epsilon
    } else {
        unknown.map_or(Outcome::Zero, Outcome::Unknown)
    };
    let (name, reason, code) = outcome_name(o);
    let member = match o {
        Outcome::Epsilon => json!(true),
        Outcome::Zero => json!(false),
        Outcome::Unknown(_) => Value::Null,
    };
    let text = match o {
        Outcome::Epsilon => "true".to_string(),
        Outcome::Zero if matches!(via, Via::Taylor) => format!("false (no approximant up to size {bound})"),
        Outcome::Zero => "false".to_string(),
        Outcome::Unknown(_) => format!("unknown ({})", reason.unwrap().replace('_', " ")),
    };
    let mut j = json!({"member": member, "outcome": name, "reason": reason, "point": point.to_string()});
    if matches!(via, Via::Taylor) {
        j["size_bound"] = json!(bound);
    }
    Ok(report(code, j, text))
}

fn cmd_testctx(point: &str) -> Result<Report, Failure> {
    if let Ok(a) = parse_delem(point) {
        let plus = alpha_plus(&a).to_string();
        let minus = alpha_minus(&a).to_string();
        let text = format!("plus:  {plus}\nminus: {minus}");
        return Ok(report(0, json!({"element": a.to_string(), "plus": plus, "minus": minus}), text));
    }
    let p = parse_point(point)?;
    let ctx = separating_context(&p).to_string();
    Ok(report(0, json!({"point": p.to_string(), "context": ctx}), format!("context: {ctx}")))
}

fn cmd_taylor(input: &Input, bound: usize) -> Result<Report, Failure> {
    let e = parse_input(input)?;
    let out = taylor_enumerate_expr(&e, bound);
    let els: Vec<String> = out.summands().iter().map(|s| s.to_string()).collect();
    let text = if els.is_empty() { "0".to_string() } else { els.join("\n") };
    Ok(report(0, json!({"size_bound": bound, "count": els.len(), "elements": els}), text))
}

fn cmd_expand(input: &Input, ell: &str) -> Result<Report, Failure> {
    let ell = EllMap::parse(ell).map_err(|e| Failure::Parse(e.to_string()))?;
    let e = parse_input(input)?;
    let mut outs = Vec::new();
    let mut doms = Vec::new();
    for s in e.summands() {
        let le = label(&s).map_err(pre)?;
        doms.push(dom(&le).into_iter().collect::<Vec<_>>());
        outs.push(ell_expand(&le, &ell).to_string());
    }
    let text = if outs.is_empty() { "0".to_string() } else { outs.join(" + ") };
    Ok(report(0, json!({"ell": ell.to_string(), "expansion": text, "summands": outs, "dom": doms}), text))
}

fn cmd_solvable(input: &Input) -> Result<Report, Failure> {
    let terms = terms_of(parse_input(input)?)?;
    let mut any = false;
    for m in &terms {
        any |= solvable(m).map_err(pre)?;
    }
    Ok(report(if any { 0 } else { 1 }, json!({"solvable": any}), any.to_string()))
}

fn cmd_probe(left: &str, right: &str, b: Bounds, max_points: usize, fuel: usize) -> Result<Report, Failure> {
    let l = terms_of(parse_text(left)?)?;
    let r = terms_of(parse_text(right)?)?;
    let (Some(m), true) = (l.first(), l.len() == 1) else { return Err(pre("--left must be a single term")) };
    let (Some(n), true) = (r.first(), r.len() == 1) else { return Err(pre("--right must be a single term")) };
    let mut vars: Vec<VarName> = m.free_vars().into_iter().chain(n.free_vars()).collect();
    vars.sort();
    vars.dedup();
    let pts = points_by_weight(&vars, b, max_points);
    let found = preorder_probe(m, n, &pts, Fuel::new(fuel))?;
    let (code, text) = match &found {
        Some(p) => (0, format!("separated at {p}")),
        None => (1, format!("no separating point among {} points", pts.len())),
    };
    Ok(report(
        code,
        json!({"separated": found.is_some(), "point": found.map(|p| p.to_string()), "points_examined": pts.len()}),
        text,
    ))
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    match &cli.cmd {
        Cmd::Parse(i) => cmd_parse(i),
        Cmd::Normalize(i) => cmd_normalize(i),
        Cmd::Head { input, steps } => cmd_head(input, *steps),
        Cmd::Converges { input, fuel } => cmd_converges(input, *fuel),
        Cmd::Member { term, input, point, full, fuel, via, size_bound } => {
            let src = match term {
                Some(t) => t.clone(),
                None => read_input(input)?,
            };
            let m = terms_of(parse_text(&src)?)?;
            let p = parse_point(point)?;
            cmd_member(&m, &p, *full, *fuel, *via, *size_bound)
        }
        Cmd::Testctx { point } => cmd_testctx(point),
        Cmd::Taylor { input, size_bound } => cmd_taylor(input, *size_bound),
        Cmd::Expand { input, ell } => cmd_expand(input, ell),
        Cmd::Solvable(i) => cmd_solvable(i),
        Cmd::Probe { left, right, max_rank, max_width, max_length, max_points, fuel } => {
            cmd_probe(left, right, Bounds::new(*max_rank, *max_width, *max_length), *max_points, *fuel)
        }
    }
}

/// What a run of the command line produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Run the command line on `args`, the first of which is the program name.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let json_mode = args.iter().skip(1).any(|a| a == "--json");
    let out = |code, stdout: String, stderr: String| Output { code, stdout, stderr };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => return out(0, e.render().to_string(), String::new()),
        Err(e) if json_mode => {
            let msg = e.kind().as_str().unwrap_or("invalid arguments");
            return out(2, format!("{}\n", json!({"error": "usage", "message": msg})), String::new());
        }
        Err(e) => return out(2, String::new(), e.render().to_string()),
    };
    match dispatch(&cli) {
        Ok(r) if cli.json => out(r.code, format!("{}\n", r.json), String::new()),
        Ok(r) => out(r.code, format!("{}\n", r.text), String::new()),
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Parse(m) => (2, "parse", m),
                Failure::Precondition(m) => (3, "precondition", m),
            };
            if cli.json {
                out(code, format!("{}\n", json!({"error": kind, "message": msg})), String::new())
            } else {
                out(code, String::new(), format!("error: {msg}\n"))
            }
        }
    }
}
