//! `L_a × L_b = Σ_c m(c,b,a) L_c` for a segment `b`.
//!
//! Both routes are driven by the closed-form derivatives. For a point `b`
//! whose lift reaches the normal form, the point formula is applied there and
//! the product is carried back down one truncation at a time. Otherwise the
//! identities `D(L_a × L_b) = D(L_a) × D(L_b)` for the partial derivatives
//! are solved as a linear system in the unknown multiplicities, with the
//! smaller products on the right computed recursively.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use super::{clear_above, derivative_closed_form, gamma_set, lift_chain, lower_begins, separate_begins, LiftStep};
use crate::error::{Error, Result};
use crate::multiseg::{Multisegment, Segment, Side};
use crate::poset::lower_set;
use crate::reduce::{psi_k_inv, truncate};
use crate::ring::{shave, Terms};

type Q = Ratio<i128>;
type ProductKey = (Multisegment, Segment);

fn derivative_cache() -> &'static DashMap<(Multisegment, i64, Side), Arc<Terms>> {
    static CACHE: OnceLock<DashMap<(Multisegment, i64, Side), Arc<Terms>>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

fn product_cache() -> &'static DashMap<ProductKey, Arc<Terms>> {
    static CACHE: OnceLock<DashMap<ProductKey, Arc<Terms>>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

fn touches(a: &Multisegment, k: i64, side: Side) -> bool {
    match side {
        Side::Right => a.end_count(k) > 0,
        Side::Left => a.begin_count(k) > 0,
    }
}

/// The closed-form derivative, memoized.
fn derivative(a: &Multisegment, k: i64, side: Side) -> Result<Arc<Terms>> {
    if !touches(a, k, side) {
        return Ok(Arc::new(Terms::from([(a.clone(), 1)])));
    }
    let key = (a.clone(), k, side);
    if let Some(t) = derivative_cache().get(&key) {
        return Ok(t.clone());
    }
    let t = Arc::new(derivative_closed_form(a, k, side)?);
    derivative_cache().insert(key, t.clone());
    Ok(t)
}

fn add_scaled(out: &mut Terms, terms: &Terms, n: i64) {
    for (c, &m) in terms {
        *out.entry(c.clone()).or_insert(0) += n * m;
    }
}

/// `m(c, [k+1], a)` for every `c`.
pub fn induce_point(a: &Multisegment, k: i64) -> Result<Terms> {
    induce_segment(a, &Segment::point(k + 1))
}

/// `m(c, b, a)` for every `c`.
pub fn induce_segment(a: &Multisegment, b: &Segment) -> Result<Terms> {
    let mut stack = Vec::new();
    Ok(product(a, b, &mut stack)?.as_ref().clone())
}

fn product(a: &Multisegment, b: &Segment, stack: &mut Vec<ProductKey>) -> Result<Arc<Terms>> {
    if a.is_empty() {
        return Ok(Arc::new(Terms::from([(Multisegment::from_segments([*b]), 1)])));
    }
    let key = (a.clone(), *b);
    if let Some(t) = product_cache().get(&key) {
        return Ok(t.clone());
    }
    if stack.contains(&key) {
        return Err(Error::UnreducedCase(format!("the reduction of {a} × {b} returns to itself")));
    }
    stack.push(key.clone());
    let res = if b.len() == 1 { point_product(a, b.end - 1, stack) } else { solve_by_derivatives(a, b, stack) };
    stack.pop();
    let mut terms = res?;
    terms.retain(|_, n| *n != 0);
    if let Some((c, n)) = terms.iter().find(|(_, n)| **n < 0) {
        return Err(Error::UnreducedCase(format!("negative multiplicity {n} of {c} in {a} × {b}")));
    }
    let terms = Arc::new(terms);
    product_cache().insert(key, terms.clone());
    Ok(terms)
}

/// `L_x × L_b` for a linear combination `x = Σ n_d L_d`.
fn product_of_sum(x: &Terms, b: Option<Segment>, stack: &mut Vec<ProductKey>) -> Result<Terms> {
    let mut out = Terms::new();
    for (d, &n) in x {
        match b {
            Some(b) => add_scaled(&mut out, product(d, &b, stack)?.as_ref(), n),
            None => *out.entry(d.clone()).or_insert(0) += n,
        }
    }
    Ok(out)
}

fn point_product(a: &Multisegment, k: i64, stack: &mut Vec<ProductKey>) -> Result<Terms> {
    let b = Segment::point(k + 1);
    // The lifted multisegment is large, so only the outermost product is lifted.
    if stack.len() == 1 && a.end_count(k) > 0 && a.end_count(k - 1) == 0 {
        let lifted = lift_chain(a, |c| separate_begins(c).or_else(|| lower_begins(c)).or_else(|| clear_above(c, k)));
        if let Ok((top, chain)) = lifted {
            if point_formula_applies(&top, k) {
                let mut terms = point_formula(&top, k)?;
                for lift in &chain {
                    terms = transport_product(&terms, lift, &b, stack)?;
                }
                return Ok(terms);
            }
        }
    }
    solve_by_derivatives(a, &b, stack)
}

/// The shape required by the point formula: distinct beginnings below every
/// end, some segment ending at `k`, none ending at `k−1` or `k+1`.
fn point_formula_applies(a: &Multisegment, k: i64) -> bool {
    let distinct = a.begins().values().all(|&n| n == 1);
    let below = matches!((a.max_begin(), a.min_end()), (Some(b), Some(e)) if b < e);
    distinct && below && a.end_count(k) > 0 && a.end_count(k - 1) == 0 && a.end_count(k + 1) == 0
}

/// `c^{[k]_i}`: the unique element of `S(c + i[k])_k` whose truncation at `k` is `c`.
fn raise(c: &Multisegment, k: i64, i: u32) -> Result<Multisegment> {
    let target = c.sum(&Multisegment::from_counts([(Segment::point(k), i)]));
    psi_k_inv(c, &target, k)
}

/// `L_a × L_{[k+1]} = L_{a+[k+1]} + Σ_{c ∈ Γ^{ℓ−1}(a,k)} (θ_k(c,a) − θ_k(c^{[k+1]_1}, a+[k+1])) L_{c^{[k+1]_1 [k]_{ℓ−1}}}`
/// with `ℓ` the number of segments of `a` ending at `k`.
fn point_formula(a: &Multisegment, k: i64) -> Result<Terms> {
    let ab = a.with(Segment::point(k + 1));
    let ell = a.end_count(k);
    let da = derivative(a, k, Side::Right)?;
    let dab = derivative(&ab, k, Side::Right)?;
    let mut out = Terms::from([(ab, 1)]);
    for c in gamma_set(a, k, Some(ell as usize - 1))? {
        let c1 = raise(&c, k + 1, 1)?;
        let coef = da.get(&c).copied().unwrap_or(0) - dab.get(&c1).copied().unwrap_or(0);
        if coef != 0 {
            *out.entry(raise(&c1, k, ell - 1)?).or_insert(0) += coef;
        }
    }
    Ok(out)
}

/// `L_lower × L_b` from `L_upper × L_b`, where `lower` is `upper` truncated
/// once and `upper` satisfies the hypothesis `H` for that truncation, so the
/// derivative of `L_upper` has `L_lower` as its only term of minimal degree.
///
/// Comparing the terms of degree `deg(upper) + deg(b) − f` (`f` the number
/// of segments of `upper` that are shortened) in the derivative of the
/// product gives `L_lower × L_b`, plus `X × L_{b'}` when the truncation also
/// shortens `b` to `b'`, where `X` is the part of degree `deg(lower) + 1` of
/// the derivative of `L_upper`.
fn transport_product(upper_prod: &Terms, lift: &LiftStep, b: &Segment, stack: &mut Vec<ProductKey>) -> Result<Terms> {
    let (k, side) = (lift.step.k, lift.step.side);
    let lower = truncate(&lift.upper, lift.step);
    let target = lower.degree() + b.len() as u64;
    let mut out = Terms::new();
    for (c, &m) in upper_prod {
        for (d, &n) in derivative(c, k, side)?.iter() {
            if d.degree() == target {
                *out.entry(d.clone()).or_insert(0) += m * n;
            }
        }
    }
    if let Some(short) = shave(b, k, side) {
        let du = derivative(&lift.upper, k, side)?;
        let x: Terms = du.iter().filter(|(e, _)| e.degree() == lower.degree() + 1).map(|(e, &n)| (e.clone(), n)).collect();
        add_scaled(&mut out, &product_of_sum(&x, short, stack)?, -1);
    }
    out.retain(|_, n| *n != 0);
    Ok(out)
}

/// Sparse rows in echelon form over `Q`, keyed by their leading column.
#[derive(Default)]
struct Echelon {
    rows: BTreeMap<usize, (BTreeMap<usize, Q>, Q)>,
}

impl Echelon {
    /// Reduces and stores a row; fails if it contradicts the stored ones.
    fn insert(&mut self, mut row: BTreeMap<usize, Q>, mut rhs: Q) -> bool {
        while let Some((&lead, &coef)) = row.iter().next() {
            let Some((prow, prhs)) = self.rows.get(&lead) else {
                self.rows.insert(lead, (row, rhs));
                return true;
            };
            let factor = coef / prow[&lead];
            for (&j, &v) in prow {
                let e = row.entry(j).or_insert_with(Q::zero);
                *e -= factor * v;
                if e.is_zero() {
                    row.remove(&j);
                }
            }
            rhs -= factor * prhs;
        }
        rhs.is_zero()
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Back substitution; assumes full rank.
    fn solve(&self, n: usize) -> Vec<Q> {
        let mut x = vec![Q::zero(); n];
        for (&lead, (row, rhs)) in self.rows.iter().rev() {
            let mut v = *rhs;
            for (&j, &c) in row.range(lead + 1..) {
                v -= c * x[j];
            }
            x[lead] = v / row[&lead];
        }
        x
    }
}

/// Solves `Σ_c m_c (D(L_c) − L_c) = (D(L_a) − L_a) × L_b + [D shortens b] D(L_a) × L_{b'}`
/// over all `c ∈ S(a+b)`, for the partial derivatives near `b` first and then
/// all of them, together with `m(a+b, b, a) = 1`.
fn solve_by_derivatives(a: &Multisegment, b: &Segment, stack: &mut Vec<ProductKey>) -> Result<Terms> {
    let top = a.with(*b);
    let cand = lower_set(&top)?;
    let index: BTreeMap<&Multisegment, usize> = cand.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let n = cand.len();
    let mut ech = Echelon::default();
    ech.insert(BTreeMap::from([(index[&top], Q::from(1))]), Q::from(1));

    let near: Vec<(i64, Side)> = [(b.begin, Side::Left), (b.end, Side::Right), (b.begin - 1, Side::Right), (b.end + 1, Side::Left)]
        .into_iter()
        .chain([(b.begin, Side::Right), (b.end, Side::Left), (b.begin + 1, Side::Left), (b.end - 1, Side::Right)])
        .collect();
    let all: Vec<(i64, Side)> = top
        .ends()
        .into_keys()
        .map(|p| (p, Side::Right))
        .chain(top.begins().into_keys().map(|p| (p, Side::Left)))
        .collect();
    let mut seen = BTreeSet::new();
    for (p, side) in near.into_iter().chain(all) {
        if ech.rank() == n {
            break;
        }
        if !touches(&top, p, side) || !seen.insert((p, side)) {
            continue;
        }
        let da = derivative(a, p, side)?;
        let mut strict = da.as_ref().clone();
        *strict.entry(a.clone()).or_insert(0) -= 1;
        strict.retain(|_, n| *n != 0);
        let mut rhs = product_of_sum(&strict, Some(*b), stack)?;
        if let Some(short) = shave(b, p, side) {
            add_scaled(&mut rhs, &product_of_sum(&da, short, stack)?, 1);
        }
        let mut lhs: BTreeMap<Multisegment, BTreeMap<usize, Q>> = BTreeMap::new();
        for (i, c) in cand.iter().enumerate() {
            for (e, &v) in derivative(c, p, side)?.iter() {
                if e != c {
                    *lhs.entry(e.clone()).or_default().entry(i).or_insert_with(Q::zero) += Q::from(v as i128);
                }
            }
        }
        for e in rhs.keys() {
            lhs.entry(e.clone()).or_default();
        }
        for (e, mut row) in lhs {
            row.retain(|_, v| !v.is_zero());
            let r = Q::from(rhs.get(&e).copied().unwrap_or(0) as i128);
            if !ech.insert(row, r) {
                return Err(Error::SingularSystem(format!("inconsistent derivative identities for {a} × {b} at {p}")));
            }
        }
    }
    if ech.rank() < n {
        return Err(Error::UnreducedCase(format!(
            "derivative identities leave {} of {n} multiplicities of {a} × {b} undetermined",
            n - ech.rank()
        )));
    }
    let mut out = Terms::new();
    for (c, v) in cand.into_iter().zip(ech.solve(n)) {
        if !v.is_integer() || v.is_negative() {
            return Err(Error::SingularSystem(format!("multiplicity {v} of {c} in {a} × {b}")));
        }
        let v = *v.numer() as i64;
        if v != 0 {
            out.insert(c, v);
        }
    }
    Ok(out)
}
