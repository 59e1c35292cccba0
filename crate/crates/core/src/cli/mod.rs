//! Command-line front end.
//!
//! Every command prints plain text by default and a JSON document tagged
//! `"schema": "mseg/1"` under `--json`. Exit codes: 0 on success, 1 when two
//! routes disagree or a reduction does not reach a covered case, 2 on parse or
//! usage errors.

mod parse;
mod selftest;

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coxeter::zelevinsky_permutation;
use crate::error::{Error, Result};
use crate::formulas::{derivative_closed_form, induce_segment, theta_table};
use crate::kl::{kl_poly, multiplicity, parabolic_kl};
use crate::multiseg::{Multisegment, Side};
use crate::poset::{generate_poset, leq, minimal_element};
use crate::reduce::{classify_poset, in_s_a_k_side, symmetrize, transport, truncate, TruncationStep};
use crate::ring::{decompose_product, derivative_simple, Terms};

pub use parse::{format_multisegment, parse_generator_set, parse_multisegment, parse_permutation, parse_segment};
pub use selftest::{run_selftest, SelftestReport};

pub const SCHEMA: &str = "mseg/1";

/// Above this degree the brute-force routes are skipped unless asked for.
pub const ORACLE_MAX_DEG: u64 = 9;

#[derive(Debug, Parser)]
#[command(name = "mseg", version, about = "Exact multisegment combinatorics")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The poset S(A) by level, or its Hasse diagram in DOT.
    Poset {
        a: String,
        #[arg(long)]
        dot: bool,
    },
    /// The minimal element of S(A).
    Min { a: String },
    /// Whether B <= A.
    Leq { b: String, a: String },
    /// The multiplicity m(B,A) of L_B in π(A).
    Mult {
        b: String,
        a: String,
        #[arg(long, value_enum, default_value_t = Route::Both)]
        route: Route,
    },
    /// The decomposition of L_A × L_B into irreducibles.
    Product {
        a: String,
        b: String,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// The derivative D^K(L_A), or ^K D(L_A) with --left.
    Derive {
        #[arg(allow_hyphen_values = true)]
        k: i64,
        a: String,
        #[arg(long)]
        left: bool,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// The truncation A^(K), or ^(K)A with --left.
    Truncate {
        #[arg(allow_hyphen_values = true)]
        k: i64,
        a: String,
        #[arg(long)]
        left: bool,
    },
    /// The symmetrization certificate of A, and the image of B under it.
    Sym { a: String, b: Option<String> },
    /// The parabolic classification of S(A).
    Classify { a: String },
    /// The Kazhdan–Lusztig polynomial P_{U,W}, parabolic with --J.
    Kl {
        u: String,
        w: String,
        #[arg(long = "J")]
        j: Option<String>,
    },
    /// Zelevinsky's permutation w(A).
    Wperm { a: String },
    /// The θ table of an identity model A at K with parameter R0.
    Theta {
        a: String,
        #[arg(allow_hyphen_values = true)]
        k: i64,
        r0: usize,
    },
    /// Random cross-checks of every formula against its brute-force route.
    Selftest {
        #[arg(long, default_value_t = 6)]
        max_deg: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        trials: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Sym,
    Deg,
    Both,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct ModeArgs {
    /// Closed formulas only.
    #[arg(long)]
    formula: bool,
    /// Brute-force route only.
    #[arg(long)]
    oracle: bool,
    /// Both routes; any disagreement is an error.
    #[arg(long)]
    both: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Formula,
    Oracle,
    Both,
}

impl ModeArgs {
    /// The explicit choice, or both routes when the oracle is affordable.
    fn resolve(&self, degree: u64) -> Mode {
        match (self.formula, self.oracle, self.both) {
            (true, _, _) => Mode::Formula,
            (_, true, _) => Mode::Oracle,
            (_, _, true) => Mode::Both,
            _ if degree <= ORACLE_MAX_DEG => Mode::Both,
            _ => Mode::Formula,
        }
    }
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// What a command produced: text and JSON renderings, plus a failure message
/// when the result is a disagreement.
struct Report {
    text: String,
    json: Value,
    failure: Option<String>,
    warning: Option<String>,
}

impl Report {
    fn ok(text: String, json: Value) -> Report {
        Report { text, json, failure: None, warning: None }
    }
}

pub fn main() -> i32 {
    let out = run(std::env::args());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let mut stdout = if cli.json {
                let mut doc = report.json;
                doc["schema"] = json!(SCHEMA);
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("JSON values serialize"))
            } else {
                report.text
            };
            let mut stderr = report.warning.map(|w| format!("warning: {w}\n")).unwrap_or_default();
            match report.failure {
                None => Outcome { code: 0, stdout, stderr },
                Some(msg) => {
                    if !cli.json && !stdout.ends_with('\n') {
                        stdout.push('\n');
                    }
                    stderr.push_str(&format!("error: {msg}\n"));
                    Outcome { code: 1, stdout, stderr }
                }
            }
        }
        Err(e) => {
            let code = if matches!(e, Error::Parse { .. }) { 2 } else { 1 };
            let stdout = if cli.json {
                let doc = json!({ "schema": SCHEMA, "error": e.to_string(), "kind": error_kind(&e) });
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("JSON values serialize"))
            } else {
                String::new()
            };
            Outcome { code, stdout, stderr: format!("error: {e}\n") }
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::UnreducedCase(_) => "unreduced",
        Error::SizeLimit(_) => "size_limit",
        _ => "domain",
    }
}

fn ms(text: &str) -> Result<Multisegment> {
    parse_multisegment(text)
}

fn side_of(left: bool) -> Side {
    if left {
        Side::Left
    } else {
        Side::Right
    }
}

fn terms_text(terms: &Terms) -> String {
    let mut out = String::new();
    for (c, n) in terms {
        let _ = writeln!(out, "{n}\t{c}");
    }
    out
}

fn terms_json(terms: &Terms) -> Value {
    Value::Array(terms.iter().map(|(c, n)| json!({ "mseg": c.to_string(), "coef": n })).collect())
}

/// The smallest multisegment on which the two expansions differ.
fn first_difference(x: &Terms, y: &Terms) -> Option<(Multisegment, i64, i64)> {
    x.keys()
        .chain(y.keys())
        .filter(|c| x.get(*c) != y.get(*c))
        .min()
        .map(|c| (c.clone(), x.get(c).copied().unwrap_or(0), y.get(c).copied().unwrap_or(0)))
}

/// Runs the requested routes and reports their result, or the first
/// disagreement when both ran.
fn two_routes(
    mode: Mode,
    degree: u64,
    formula: impl FnOnce() -> Result<Terms>,
    oracle: impl FnOnce() -> Result<Terms>,
    json: Value,
) -> Result<Report> {
    let (terms, failure) = match mode {
        Mode::Formula => (formula()?, None),
        Mode::Oracle => (oracle()?, None),
        Mode::Both => {
            let f = formula()?;
            let o = oracle()?;
            let failure = first_difference(&f, &o)
                .map(|(c, nf, no)| format!("routes disagree at L_{{{c}}}: formula {nf}, oracle {no}"));
            (f, failure)
        }
    };
    let mut doc = json;
    doc["route"] = json!(match mode {
        Mode::Formula => "formula",
        Mode::Oracle => "oracle",
        Mode::Both => "both",
    });
    let unchecked = mode == Mode::Formula && degree > ORACLE_MAX_DEG;
    doc["basis"] = json!("L");
    doc["terms"] = terms_json(&terms);
    doc["agree"] = json!(failure.is_none());
    doc["cross_checked"] = json!(mode == Mode::Both);
    let warning = unchecked.then(|| format!("degree {degree} exceeds {ORACLE_MAX_DEG}; the oracle cross-check was skipped"));
    Ok(Report { text: terms_text(&terms), json: doc, failure, warning })
}

fn execute(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Poset { a, dot } => poset(&ms(a)?, *dot),
        Command::Min { a } => {
            let a = ms(a)?;
            let m = minimal_element(&a);
            Ok(Report::ok(format!("{m}\n"), json!({ "command": "min", "a": a.to_string(), "min": m.to_string() })))
        }
        Command::Leq { b, a } => {
            let (b, a) = (ms(b)?, ms(a)?);
            let r = leq(&b, &a);
            Ok(Report::ok(
                format!("{r}\n"),
                json!({ "command": "leq", "b": b.to_string(), "a": a.to_string(), "leq": r }),
            ))
        }
        Command::Mult { b, a, route } => mult(&ms(b)?, &ms(a)?, *route),
        Command::Product { a, b, mode } => {
            let (a, b) = (ms(a)?, ms(b)?);
            let degree = a.degree() + b.degree();
            let doc = json!({ "command": "product", "a": a.to_string(), "b": b.to_string() });
            two_routes(
                mode.resolve(degree),
                degree,
                || match b.entries() {
                    [(s, 1)] => induce_segment(&a, s),
                    _ => Err(Error::UnreducedCase(format!("the product formulas need a single segment, got {b}"))),
                },
                || decompose_product(&a, &b),
                doc,
            )
        }
        Command::Derive { k, a, left, mode } => {
            let a = ms(a)?;
            let side = side_of(*left);
            let doc = json!({ "command": "derive", "a": a.to_string(), "k": k, "left": left });
            two_routes(
                mode.resolve(a.degree()),
                a.degree(),
                || derivative_closed_form(&a, *k, side),
                || derivative_simple(&a, *k, side),
                doc,
            )
        }
        Command::Truncate { k, a, left } => {
            let a = ms(a)?;
            let step = if *left { TruncationStep::left(*k) } else { TruncationStep::right(*k) };
            let t = truncate(&a, step);
            let hk = in_s_a_k_side(&a, &a, step);
            Ok(Report::ok(
                format!("{t}\nH_k(a): {hk}\n"),
                json!({ "command": "truncate", "a": a.to_string(), "k": k, "left": left,
                        "truncation": t.to_string(), "hypothesis_hk": hk }),
            ))
        }
        Command::Sym { a, b } => sym(&ms(a)?, b.as_deref().map(ms).transpose()?),
        Command::Classify { a } => {
            let a = ms(a)?;
            let c = classify_poset(&a)?;
            let text = format!(
                "n: {}\nJ1: {}\nJ2: {}\nw: {}\nmodel: {}\nfloor: {}\n",
                c.n,
                c.j1.display(),
                c.j2.display(),
                c.w,
                c.model,
                c.floor
            );
            Ok(Report::ok(
                text,
                json!({ "command": "classify", "a": a.to_string(), "n": c.n,
                        "J1": c.j1.members().collect::<Vec<_>>(), "J2": c.j2.members().collect::<Vec<_>>(),
                        "w": c.w.one_line(), "model": c.model.to_string(), "floor": c.floor.to_string() }),
            ))
        }
        Command::Kl { u, w, j } => {
            let (u0, w0) = (parse_permutation(u, None)?, parse_permutation(w, None)?);
            let n = u0.n().max(w0.n());
            let (u, w) = (parse_permutation(u, Some(n))?, parse_permutation(w, Some(n))?);
            let p = match j {
                None => kl_poly(&u, &w)?,
                Some(j) => parabolic_kl(&u, &w, &parse_generator_set(j, n)?)?,
            };
            Ok(Report::ok(
                format!("{p}\n"),
                json!({ "command": "kl", "u": u.one_line(), "w": w.one_line(), "J": j,
                        "poly": p.to_string(), "value_at_one": p.eval_one_i64() }),
            ))
        }
        Command::Wperm { a } => {
            let a = ms(a)?;
            let w = zelevinsky_permutation(&a);
            Ok(Report::ok(format!("{w}\n"), json!({ "command": "wperm", "a": a.to_string(), "w": w.one_line() })))
        }
        Command::Theta { a, k, r0 } => {
            let a = ms(a)?;
            let t = theta_table(&a, *k, *r0)?;
            let mut text = format!("J: {}\nJ1: {}\nJ2: {}\n", t.j.display(), t.j1.display(), t.j2.display());
            let mut rows = Vec::new();
            for ((u, tv), th) in &t.entries {
                let _ = writeln!(text, "θ({u}; {tv}) = {th}");
                rows.push(json!({ "u": u.one_line(), "t": tv.one_line(), "theta": th.to_string() }));
            }
            Ok(Report::ok(text, json!({ "command": "theta", "a": a.to_string(), "k": k, "r0": r0, "entries": rows })))
        }
        Command::Selftest { max_deg, seed, trials } => {
            let r = run_selftest(*max_deg, *seed, *trials);
            Ok(Report { text: r.text(), json: r.json(), failure: r.failure(), warning: None })
        }
    }
}

fn poset(a: &Multisegment, dot: bool) -> Result<Report> {
    let p = generate_poset(a)?;
    let text = if dot {
        let mut s = String::from("digraph S {\n");
        for e in &p.elements {
            let _ = writeln!(s, "  \"{e}\";");
        }
        for &(hi, lo) in &p.cover_edges {
            let _ = writeln!(s, "  \"{}\" -> \"{}\";", p.elements[hi], p.elements[lo]);
        }
        s.push_str("}\n");
        s
    } else {
        let mut s = format!("{} elements\n", p.len());
        for (e, lvl) in p.elements.iter().zip(&p.levels) {
            let _ = writeln!(s, "{lvl}\t{e}");
        }
        s
    };
    let json = json!({
        "command": "poset",
        "root": a.to_string(),
        "elements": p.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "levels": p.levels,
        "covers": p.cover_edges,
    });
    Ok(Report::ok(text, json))
}

fn mult(b: &Multisegment, a: &Multisegment, route: Route) -> Result<Report> {
    let sym = || -> Result<i64> {
        if !leq(b, a) {
            return Ok(0);
        }
        crate::reduce::multiplicity_via(&symmetrize(a)?, b)
    };
    let (m, failure, name) = match route {
        Route::Deg => (multiplicity(b, a)?, None, "deg"),
        Route::Sym => (sym()?, None, "sym"),
        Route::Both => {
            let (d, s) = (multiplicity(b, a)?, sym()?);
            let failure = (d != s).then(|| format!("routes disagree on m({b}, {a}): deg {d}, sym {s}"));
            (d, failure, "both")
        }
    };
    Ok(Report {
        warning: None,
        text: format!("{m}\n"),
        json: json!({ "command": "mult", "b": b.to_string(), "a": a.to_string(), "route": name,
                      "m": m, "agree": failure.is_none() }),
        failure,
    })
}

fn sym(a: &Multisegment, b: Option<Multisegment>) -> Result<Report> {
    let cert = symmetrize(a)?;
    let mut text = format!(
        "a_sym: {}\nc1: {}\nc2: {}\nc3: {}\na_id: {}\nw: {}\n",
        cert.sym, cert.c1, cert.c2, cert.c3, cert.a_id, cert.w
    );
    let mut json = json!({
        "command": "sym", "a": a.to_string(), "a_sym": cert.sym.to_string(),
        "c1": cert.c1.to_string(), "c2": cert.c2.to_string(), "c3": cert.c3.to_string(),
        "a_id": cert.a_id.to_string(), "w": cert.w.one_line(),
    });
    if let Some(b) = b {
        let bs = transport(&b, &cert)?;
        let m = crate::reduce::multiplicity_via(&cert, &b)?;
        let _ = writeln!(text, "b_sym: {bs}\nm: {m}");
        json["b"] = json!(b.to_string());
        json["b_sym"] = json!(bs.to_string());
        json["m"] = json!(m);
    }
    Ok(Report::ok(text, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> Outcome {
        run(std::iter::once("mseg").chain(args.iter().copied()))
    }

    #[test]
    fn zelevinsky_two() {
        let out = call(&["mult", "[1,2]+[2,3]", "[1]+2*[2]+[3]", "--route", "both"]);
        assert_eq!((out.code, out.stdout.as_str()), (0, "2\n"));
    }

    #[test]
    fn kl_remark() {
        let out = call(&["kl", "1,3,2,4", "3,4,1,2"]);
        assert_eq!((out.code, out.stdout.as_str()), (0, "1 + q\n"));
    }

    #[test]
    fn derive_both_routes() {
        let out = call(&["derive", "3", "[0,2]+[1,3]+[2,3]", "--both"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert_eq!(out.stdout.lines().count(), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["mult", "[1,2", "[1]"]).code, 2);
        assert_eq!(call(&["mult", "[1]", "[1]", "--bogus"]).code, 2);
        assert_eq!(call(&["frobnicate"]).code, 2);
        assert_eq!(call(&["product", "[1]", "[2]", "--formula", "--oracle"]).code, 2);
        assert_eq!(call(&["product", "[0]", "[1]+[3]", "--formula"]).code, 1);
        assert_eq!(call(&["--help"]).code, 0);
    }

    #[test]
    fn json_is_versioned() {
        let out = call(&["--json", "leq", "[1,3]+[2]", "[1,2]+[2,3]"]);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["schema"], "mseg/1");
        assert_eq!(v["leq"], true);
        let out = call(&["--json", "mult", "[1", "[1]"]);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!((out.code, v["kind"].as_str()), (2, Some("parse")));
    }

    #[test]
    fn dot_labels_and_covers() {
        let out = call(&["poset", "[1,2]+[2,3]", "--dot"]);
        let expected = "digraph S {\n  \"[1,2]+[2,3]\";\n  \"[2]+[1,3]\";\n  \"[1,2]+[2,3]\" -> \"[2]+[1,3]\";\n}\n";
        assert_eq!(out.stdout, expected);
    }

    #[test]
    fn product_point() {
        let out = call(&["product", "[0,2]+[1,3]+[2,3]", "[4]", "--formula"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("1\t[0,2]+[2,3]+[1,3]+[4]"));
    }

    #[test]
    fn large_degree_runs_formula_with_warning() {
        let out = call(&["--json", "derive", "2", "[0,2]+[1,2]+[2,4]+[3,5]"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stderr.starts_with("warning:"));
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!((v["cross_checked"].as_bool(), v["basis"].as_str()), (Some(false), Some("L")));
    }
}
