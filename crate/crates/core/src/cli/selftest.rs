//! Seeded cross-checks of the closed formulas against the brute-force routes.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::Error;
use crate::formulas::{derivative_closed_form, induce_segment};
use crate::multiseg::{Multisegment, Segment, Side};
use crate::ring::{decompose_product, derivative_simple, m_matrix_route, Route};
use crate::sample::{random_end, random_multisegment, random_segment, rng};

/// One random instance. All randomness is drawn up front, so the trials can
/// run in any order and the report only depends on the seed.
#[derive(Debug, Clone)]
struct Trial {
    a: Multisegment,
    k: i64,
    side: Side,
    b: Segment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Check {
    Multiplicity,
    Derivative,
    Product,
}

impl Check {
    fn name(&self) -> &'static str {
        match self {
            Check::Multiplicity => "multiplicity routes",
            Check::Derivative => "derivative",
            Check::Product => "product",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Failure {
    check: Check,
    degree: u64,
    trial: usize,
    message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub seed: u64,
    pub trials: usize,
    pub max_deg: u64,
    failures: Vec<Failure>,
    unreduced: Vec<Failure>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.unreduced.is_empty()
    }

    /// The failing instance of least degree (then earliest trial).
    fn minimal(&self) -> Option<&Failure> {
        self.failures.iter().chain(&self.unreduced).min_by_key(|f| (f.degree, f.trial))
    }

    pub fn failure(&self) -> Option<String> {
        self.minimal().map(|f| format!("minimal counterexample (trial {}): {}", f.trial, f.message))
    }

    pub fn text(&self) -> String {
        let mut out = format!("selftest seed={} trials={} max-deg={}\n", self.seed, self.trials, self.max_deg);
        for check in [Check::Multiplicity, Check::Derivative, Check::Product] {
            let bad = self.failures.iter().filter(|f| f.check == check).count();
            let unred = self.unreduced.iter().filter(|f| f.check == check).count();
            out.push_str(&format!(
                "{}: {}/{} agree, {} unreduced\n",
                check.name(),
                self.trials - bad - unred,
                self.trials,
                unred
            ));
        }
        out.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        out
    }

    pub fn json(&self) -> Value {
        let list = |v: &[Failure]| -> Vec<Value> {
            v.iter()
                .map(|f| json!({ "check": f.check.name(), "trial": f.trial, "degree": f.degree, "message": f.message }))
                .collect()
        };
        json!({
            "command": "selftest",
            "seed": self.seed,
            "trials": self.trials,
            "max_deg": self.max_deg,
            "passed": self.passed(),
            "failures": list(&self.failures),
            "unreduced": list(&self.unreduced),
        })
    }
}

fn draw(seed: u64, trials: usize, max_deg: u64) -> Vec<Trial> {
    let mut r = rng(seed);
    (0..trials)
        .map(|_| {
            let a = random_multisegment(&mut r, max_deg.saturating_sub(1).max(1));
            let k = random_end(&mut r, &a);
            let side = if r.gen_bool(0.5) { Side::Left } else { Side::Right };
            let room = max_deg.saturating_sub(a.degree()).clamp(1, 3) as i64;
            let b = random_segment(&mut r, a.max_end().unwrap_or(0) + 2, room);
            Trial { a, k, side, b }
        })
        .collect()
}

/// `None` on agreement, otherwise the failure and whether it is an unreduced case.
fn compare(
    check: Check,
    trial: usize,
    degree: u64,
    label: String,
    result: Result<bool, Error>,
) -> Option<(bool, Failure)> {
    let (unreduced, message) = match result {
        Ok(true) => return None,
        Ok(false) => (false, format!("{label}: routes disagree")),
        Err(e @ Error::UnreducedCase(_)) => (true, format!("{label}: {e}")),
        Err(e) => (false, format!("{label}: {e}")),
    };
    Some((unreduced, Failure { check, degree, trial, message }))
}

fn run_trial(i: usize, t: &Trial) -> Vec<(bool, Failure)> {
    let deg = t.a.degree();
    let mut out = Vec::new();
    let mult = (|| Ok(m_matrix_route(&t.a, Route::Sym)? == m_matrix_route(&t.a, Route::Deg)?))();
    out.extend(compare(Check::Multiplicity, i, deg, format!("S({})", t.a), mult));
    let der = (|| Ok(derivative_closed_form(&t.a, t.k, t.side)? == derivative_simple(&t.a, t.k, t.side)?))();
    let side = if t.side == Side::Left { "left " } else { "" };
    out.extend(compare(Check::Derivative, i, deg, format!("{side}D^{} of {}", t.k, t.a), der));
    let b = Multisegment::from_segments([t.b]);
    let prod = (|| Ok(induce_segment(&t.a, &t.b)? == decompose_product(&t.a, &b)?))();
    out.extend(compare(Check::Product, i, deg + b.degree(), format!("{} × {}", t.a, t.b), prod));
    out
}

pub fn run_selftest(max_deg: u64, seed: u64, trials: usize) -> SelftestReport {
    let instances = draw(seed, trials, max_deg);
    let results: Vec<Vec<(bool, Failure)>> =
        instances.par_iter().enumerate().map(|(i, t)| run_trial(i, t)).collect();
    let (mut failures, mut unreduced) = (Vec::new(), Vec::new());
    for (unred, f) in results.into_iter().flatten() {
        if unred {
            unreduced.push(f);
        } else {
            failures.push(f);
        }
    }
    SelftestReport { seed, trials, max_deg, failures, unreduced }
}
