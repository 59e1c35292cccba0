//! Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
//!
//! Criteria that cannot pass because the reference values themselves are
//! wrong are listed in `KNOWN_FAILURES`; the test fails if the set of failing
//! criteria differs from that list in either direction.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;

use mseg::cli::run;
use mseg::coxeter::{all_permutations, bruhat_leq, phi, Permutation};
use mseg::formulas::{derivative_closed_form, induce_segment};
use mseg::kl::{kl_poly, multiplicity};
use mseg::multiseg::Side;
use mseg::poset::generate_poset;
use mseg::qpoly::QPoly;
use mseg::reduce::{
    in_s_a_k, in_s_a_k_side, relation_type_equal, symmetrize, transport, truncate, xi_transport, TruncationStep,
};
use mseg::ring::{decompose_product, derivative_simple, m_matrix_route, Route, Terms};
use mseg::sample::{random_end, random_multisegment, random_segment, rng};
use mseg::{Multisegment, Segment};

/// Multiplicities, θ coefficients and product coefficients are exact integers.
const TOLERANCE: i64 = 0;
const SMALL_CASE_BUDGET: Duration = Duration::from_secs(1);
const ROUTE_FUZZ_BUDGET: Duration = Duration::from_secs(600);

const ROUTE_FUZZ: (u64, usize, u64) = (501, 500, 8);
const DERIVATIVE_FUZZ: (u64, usize, u64) = (601, 500, 7);
const PRODUCT_FUZZ: (u64, usize, u64) = (5, 200, 9);
const PSI_FUZZ: (u64, usize, u64) = (801, 300, 7);
const RELATION_FUZZ: (u64, usize, u64) = (901, 100, 5);

/// Criteria whose reference values disagree with exact computation:
/// 2 (the printed transport of b has m = 1, not 2) and 4 (the printed product
/// omits the constituent [0,2]+[1,3]+[2,4]).
const KNOWN_FAILURES: &[u32] = &[2, 4];

fn m(s: &str) -> Multisegment {
    s.parse().unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }
}

/// Collects positivity and minimal-degree violations seen by the fuzz criteria.
#[derive(Default)]
struct Laws {
    checked: usize,
    violations: Vec<String>,
}

impl Laws {
    fn positive(&mut self, what: &str, terms: &Terms) {
        self.checked += 1;
        if let Some((c, n)) = terms.iter().find(|(_, n)| **n < 0) {
            self.violations.push(format!("{what}: coefficient {n} at {c}"));
        }
    }

    fn minimal_degree(&mut self, a: &Multisegment, k: i64, d: &Terms) {
        self.checked += 1;
        let ak = truncate(a, TruncationStep::right(k));
        let low: Vec<(&Multisegment, &i64)> = d.iter().filter(|(b, _)| b.degree() == ak.degree()).collect();
        let ok = if in_s_a_k_side(a, a, TruncationStep::right(k)) {
            let min_deg = d.keys().map(Multisegment::degree).min();
            low == vec![(&ak, &1)] && min_deg == Some(ak.degree())
        } else {
            low.is_empty()
        };
        if !ok {
            self.violations.push(format!("minimal degree: D^{k}(L_{a}) has {low:?} in degree {}", ak.degree()));
        }
    }
}

fn cli_json(args: &[&str]) -> (i32, Value) {
    let out = run(["mseg", "--json"].iter().chain(args));
    let v = serde_json::from_str(&out.stdout).unwrap_or(Value::Null);
    (out.code, v)
}

fn json_terms(v: &Value) -> BTreeMap<String, i64> {
    v["terms"]
        .as_array()
        .map(|ts| {
            ts.iter()
                .map(|t| (t["mseg"].as_str().unwrap_or("").to_string(), t["coef"].as_i64().unwrap_or(0)))
                .collect()
        })
        .unwrap_or_default()
}

fn canonical(items: &[&str]) -> BTreeMap<String, i64> {
    items.iter().map(|s| (m(s).to_string(), 1)).collect()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let (code, v) = cli_json(&["mult", "[1,2]+[2,3]", "[1]+2*[2]+[3]", "--route", "both"]);
    let elapsed = t.elapsed();
    let value = v["m"].as_i64();
    let pass = code == 0 && value == Some(2) && v["agree"] == true && elapsed < SMALL_CASE_BUDGET;
    Outcome::new(pass, format!("m = {value:?} via both routes, exit {code}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let a = m("[1]+2*[2]+[3]");
    let b = m("[1,2]+[2,3]");
    let cert = symmetrize(&a).unwrap();
    let expected_sym = m("[0,3]+[1,5]+[2,4]+[3,6]");
    let sym_ok = cert.sym == expected_sym
        && cert.sym.to_string() == expected_sym.to_string()
        && phi(&cert.a_id, &Permutation::simple(4, 2)).unwrap() == cert.sym;
    let moved = transport(&b, &cert).unwrap();
    let expected_b = m("[0,5]+[1,3]+[2,6]+[3,4]");
    Outcome::new(
        sym_ok && moved == expected_b,
        format!(
            "a^sym = {} ({}), transport(b) = {moved}, printed {expected_b}; m(moved) = {}, m(printed) = {}",
            cert.sym,
            if sym_ok { "matches" } else { "differs" },
            multiplicity(&moved, &cert.sym).unwrap(),
            multiplicity(&expected_b, &cert.sym).unwrap(),
        ),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let p = |v: &[usize]| Permutation::new(v.to_vec()).unwrap();
    let remark = kl_poly(&p(&[1, 3, 2, 4]), &p(&[3, 4, 1, 2])).unwrap() == QPoly::from_q_coeffs(&[1, 1]);
    let s3 = all_permutations(3);
    let s3_ok = s3.iter().all(|x| {
        s3.iter().all(|y| !bruhat_leq(x, y).unwrap() || kl_poly(x, y).unwrap().is_one())
    });
    let e = Permutation::identity(4);
    let singular = all_permutations(4).iter().filter(|w| !kl_poly(&e, w).unwrap().is_one()).count();
    let elapsed = t.elapsed();
    Outcome::new(
        remark && s3_ok && singular == 2 && elapsed < SMALL_CASE_BUDGET,
        format!("P = 1+q: {remark}, S_3 trivial: {s3_ok}, singular in S_4: {singular}, {elapsed:.2?}"),
    )
}

fn criterion_4() -> Outcome {
    let a = "[0,2]+[1,3]+[2,3]";
    let expected = canonical(&["[0,2]+[1,3]+[2,3]+[4]", "[0,3]+[1,4]+[2]", "[0,2]+[1,4]+[2,3]"]);
    let (c1, formula) = cli_json(&["product", a, "[4]", "--formula"]);
    let (c2, oracle) = cli_json(&["product", a, "[4]", "--oracle"]);
    let (formula, oracle) = (json_terms(&formula), json_terms(&oracle));
    let (c3, der) = cli_json(&["derive", "3", a, "--both"]);
    let der_expected = canonical(&[a, "[0,2]+[2]+[1,3]"]);
    let der_ok = c3 == 0 && json_terms(&der) == der_expected;
    let extra: Vec<&String> = formula.keys().filter(|c| !expected.contains_key(*c)).collect();
    Outcome::new(
        c1 == 0 && c2 == 0 && formula == expected && oracle == expected && der_ok,
        format!(
            "product: formula {} terms, oracle {} terms, routes agree: {}, beyond the printed three: {extra:?}; derive 3: {}",
            formula.len(),
            oracle.len(),
            formula == oracle,
            if der_ok { "matches" } else { "differs" }
        ),
    )
}

fn criterion_5(laws: &mut Laws) -> Outcome {
    let (seed, count, max_deg) = ROUTE_FUZZ;
    let t = Instant::now();
    let mut r = rng(seed);
    let (mut pairs, mut bad) = (0usize, Vec::new());
    for _ in 0..count {
        let a = random_multisegment(&mut r, max_deg);
        let sym = m_matrix_route(&a, Route::Sym).unwrap();
        let deg = m_matrix_route(&a, Route::Deg).unwrap();
        pairs += deg.len();
        laws.positive(&format!("m(·,{a})"), &deg);
        if sym.len() != deg.len() || sym.iter().any(|(b, x)| (x - deg.get(b).copied().unwrap_or(i64::MIN)).abs() > TOLERANCE) {
            bad.push(a);
        }
    }
    let elapsed = t.elapsed();
    Outcome::new(
        bad.is_empty() && elapsed < ROUTE_FUZZ_BUDGET,
        format!("{count} multisegments, {pairs} pairs (b,a), {} mismatches {:?}, {elapsed:.1?}", bad.len(), bad.first()),
    )
}

fn criterion_6(laws: &mut Laws) -> Outcome {
    let (seed, count, max_deg) = DERIVATIVE_FUZZ;
    let mut r = rng(seed);
    let mut bad = Vec::new();
    for _ in 0..count {
        let a = random_multisegment(&mut r, max_deg);
        let k = random_end(&mut r, &a);
        let oracle = derivative_simple(&a, k, Side::Right).unwrap();
        laws.positive(&format!("D^{k}(L_{a})"), &oracle);
        laws.minimal_degree(&a, k, &oracle);
        match derivative_closed_form(&a, k, Side::Right) {
            Ok(f) if f == oracle => {}
            other => bad.push(format!("D^{k}(L_{a}): {other:?}")),
        }
    }
    Outcome::new(bad.is_empty(), format!("{count} instances, {} mismatches {:?}", bad.len(), bad.first()))
}

fn criterion_7(laws: &mut Laws) -> Outcome {
    let (seed, count, max_total) = PRODUCT_FUZZ;
    let mut r = rng(seed);
    let (mut bad, mut unreduced) = (Vec::new(), Vec::new());
    for _ in 0..count {
        let len = r.gen_range(1..=3);
        let a = random_multisegment(&mut r, max_total - len as u64);
        let b = random_segment(&mut r, a.max_end().unwrap() + 2, len);
        let oracle = decompose_product(&a, &Multisegment::from_segments([b])).unwrap();
        laws.positive(&format!("L_{a} × L_{b}"), &oracle);
        match induce_segment(&a, &b) {
            Ok(f) if f == oracle => {}
            Err(mseg::Error::UnreducedCase(msg)) => unreduced.push(format!("{a} × {b}: {msg}")),
            other => bad.push(format!("{a} × {b}: {other:?}")),
        }
    }
    for u in &unreduced {
        println!("  unreduced: {u}");
    }
    Outcome::new(
        bad.is_empty() && unreduced.is_empty(),
        format!("{count} products, {} mismatches {:?}, {} unreduced", bad.len(), bad.first(), unreduced.len()),
    )
}

/// Instances are drawn until `a` itself satisfies `H_k(a)`, so that `ψ_k` is
/// defined on all of `S(a)_k` and the bijection onto `S(a^(k))` is meaningful.
fn criterion_8() -> Outcome {
    let (seed, count, max_deg) = PSI_FUZZ;
    let mut r = rng(seed);
    let (mut done, mut pairs, mut bad) = (0, 0, Vec::new());
    while done < count {
        let a = random_multisegment(&mut r, max_deg);
        let k = random_end(&mut r, &a);
        if !in_s_a_k(&a, &a, k) {
            continue;
        }
        done += 1;
        let step = TruncationStep::right(k);
        let ak = truncate(&a, step);
        let mut image = BTreeSet::new();
        let mut injective = true;
        for b in generate_poset(&a).unwrap().elements {
            if !in_s_a_k(&b, &a, k) {
                continue;
            }
            pairs += 1;
            let bk = truncate(&b, step);
            if multiplicity(&b, &a).unwrap() != multiplicity(&bk, &ak).unwrap() {
                bad.push(format!("m({b},{a}) at k={k}"));
            }
            injective &= image.insert(bk);
        }
        let target: BTreeSet<Multisegment> = generate_poset(&ak).unwrap().elements.into_iter().collect();
        if !injective || image != target {
            bad.push(format!("ψ_{k} on S({a}) is not a bijection onto S({ak})"));
        }
    }
    Outcome::new(bad.is_empty(), format!("{count} instances, {pairs} pairs, {} violations {:?}", bad.len(), bad.first()))
}

/// `[b,e] ↦ [s·b, s·e + s − 1]`: every gap and every segment widens.
fn stretch(a: &Multisegment, s: i64) -> Multisegment {
    a.map_segments(|d| Some(Segment::new(s * d.begin, s * d.end + s - 1)))
}

/// Widens the gap between `p − 1` and `p`: beginnings from `p` and ends from `p − 1` move up.
fn widen(a: &Multisegment, p: i64) -> Multisegment {
    a.map_segments(|d| Some(Segment::new(d.begin + i64::from(d.begin >= p), d.end + i64::from(d.end >= p - 1))))
}

fn criterion_9() -> Outcome {
    let (seed, count, max_deg) = RELATION_FUZZ;
    let mut r = rng(seed);
    let mut bad = Vec::new();
    let mut rewrites = 0;
    for _ in 0..count {
        let a = random_multisegment(&mut r, max_deg);
        let (lo, hi) = (a.min_begin().unwrap(), a.max_end().unwrap());
        let p = r.gen_range(lo..=hi + 1);
        let t = r.gen_range(-20..=20);
        let base = m_matrix_route(&a, Route::Deg).unwrap();
        for a2 in [a.shift(t), widen(&a, p), stretch(&a.shift(t), 2)] {
            rewrites += 1;
            if !relation_type_equal(&a, &a2) {
                bad.push(format!("{a} → {a2} changes the relation type"));
                continue;
            }
            let route = if a2.degree() <= 9 { Route::Deg } else { Route::Sym };
            let other = m_matrix_route(&a2, route).unwrap();
            let moved: Terms = base.iter().map(|(b, n)| (xi_transport(b, &a, &a2).unwrap(), *n)).collect();
            if moved != *other {
                bad.push(format!("{a} → {a2}"));
            }
        }
    }
    Outcome::new(bad.is_empty(), format!("{count} multisegments, {rewrites} rewrites, {} violations {:?}", bad.len(), bad.first()))
}

fn criterion_10(laws: &Laws) -> Outcome {
    Outcome::new(
        laws.violations.is_empty() && laws.checked > 0,
        format!("{} checks on the fuzz instances, {} violations {:?}", laws.checked, laws.violations.len(), laws.violations.first()),
    )
}

#[test]
fn acceptance() {
    let mut laws = Laws::default();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, o: Outcome| {
        let mut out = std::io::stdout().lock();
        let tag = match (o.pass, KNOWN_FAILURES.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        writeln!(out, "criterion {id:>2} [{tag}] {name}: {}", o.detail).unwrap();
        out.flush().unwrap();
        results.push((id, name, o));
    };
    record(1, "m = 2 via both routes", criterion_1());
    record(2, "symmetrization certificate", criterion_2());
    record(3, "KL spot values", criterion_3());
    record(4, "single-point product and derivative example", criterion_4());
    record(5, "route-equivalence fuzz", criterion_5(&mut laws));
    record(6, "derivative-equivalence fuzz", criterion_6(&mut laws));
    record(7, "product-equivalence fuzz", criterion_7(&mut laws));
    record(8, "ψ_k law", criterion_8());
    record(9, "relation-type invariance", criterion_9());
    record(10, "positivity and minimal-degree laws", criterion_10(&laws));
    let failing: Vec<u32> = results.iter().filter(|(_, _, o)| !o.pass).map(|(id, _, _)| *id).collect();
    assert_eq!(failing, KNOWN_FAILURES, "failing criteria differ from the known-failure list");
}
