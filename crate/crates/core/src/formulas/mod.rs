//! Closed formulas: the derivative order `⪯_k`, the sets `Γ(a,k)`, the
//! coefficients `θ` of `D^k(L_a)` obtained from parabolic KL polynomials, and
//! the multiplicities of `L_a × L_b` for a segment `b`.
//!
//! Every formula here has a brute-force counterpart in [`crate::ring`]; the
//! tests compare the two.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use dashmap::DashMap;

use serde::Serialize;

use crate::coxeter::{
    all_permutations, bruhat_leq, bruhat_interval, coset_reps, in_double_quotient, parabolic_type, phi,
    phi_inv, GeneratorSet, Permutation,
};
use crate::error::{Error, Result};
use crate::kl::double_parabolic_kl;
use crate::multiseg::{Multisegment, Segment, Side};
use crate::poset::leq;
use crate::qpoly::QPoly;
use crate::reduce::{identity_model, in_s_a_k_side, truncate, TruncationStep};
use crate::ring::{cached_poset, Terms};

mod product;

pub use product::{induce_point, induce_segment};

/// A multisegment `a`, a point `k`, and the sub-multisets `Γ ⊆ a(k)` of the
/// segments ending at `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivativePattern {
    pub base: Multisegment,
    pub k: i64,
    pub gamma_subsets: Vec<Multisegment>,
}

impl DerivativePattern {
    pub fn new(a: &Multisegment, k: i64) -> DerivativePattern {
        let mut subsets = vec![Multisegment::empty()];
        for (s, c) in a.ending_at(k) {
            subsets = subsets
                .iter()
                .flat_map(|g| (0..=c).map(move |j| if j == 0 { g.clone() } else { g.sum(&Multisegment::from_counts([(s, j)])) }))
                .collect();
        }
        DerivativePattern { base: a.clone(), k, gamma_subsets: subsets }
    }

    /// `a_Γ`: the segments of `Γ` lose their end point `k`.
    pub fn apply(&self, gamma: &Multisegment) -> Multisegment {
        let mut out = self.base.clone();
        for s in gamma.segments() {
            out.remove_one(&s);
            if let Some(t) = s.minus_end() {
                out.insert(t, 1);
            }
        }
        out
    }

    /// All `a_Γ`, optionally only those with `|Γ| = i`.
    pub fn shaved(&self, i: Option<usize>) -> Vec<Multisegment> {
        self.gamma_subsets
            .iter()
            .filter(|g| i.is_none_or(|i| g.len() == i))
            .map(|g| self.apply(g))
            .collect()
    }
}

/// `b ⪯_k a`: `b <= a_Γ` for some `Γ ⊆ a(k)`.
pub fn preceq_k(b: &Multisegment, a: &Multisegment, k: i64) -> bool {
    let shrink = a.degree().checked_sub(b.degree());
    let Some(i) = shrink else { return false };
    let pattern = DerivativePattern::new(a, k);
    pattern.shaved(Some(i as usize)).iter().any(|x| leq(b, x))
}

/// `Γ(a,k) = {b : b ⪯_k a}`, or `Γ^i(a,k)` (those with `deg b + i = deg a`), in canonical order.
pub fn gamma_set(a: &Multisegment, k: i64, i: Option<usize>) -> Result<Vec<Multisegment>> {
    let pattern = DerivativePattern::new(a, k);
    let mut out = BTreeSet::new();
    for x in pattern.shaved(i) {
        out.extend(cached_poset(&x)?.elements.iter().cloned());
    }
    Ok(out.into_iter().collect())
}

/// Replaces `count` of the ends equal to `k` by `to` in the identity model of `a_id`.
fn retarget_ends(a_id: &Multisegment, k: i64, count: usize, to: i64) -> Multisegment {
    let segs = a_id.segments();
    let mut beta: Vec<i64> = segs.iter().map(|s| s.begin).collect();
    let mut eps: Vec<i64> = segs.iter().map(|s| s.end).collect();
    let mut left = count;
    for e in eps.iter_mut().filter(|e| **e == k) {
        if left == 0 {
            break;
        }
        *e = to;
        left -= 1;
    }
    beta.sort_unstable();
    eps.sort_unstable();
    Multisegment::from_segments(beta.into_iter().zip(eps).map(|(b, e)| Segment::new(b, e)))
}

/// The models `a_2 = a_Id^{J2(r0,k)}` (the `r0` lowest segments ending at `k`
/// now end at `k−1`) and `a_1 = a_Id^{J1(ℓ_k−r0,k)}` (the others end at `k+1`).
fn shifted_models(a_id: &Multisegment, k: i64, r0: usize) -> (Multisegment, Multisegment) {
    let ell = a_id.end_count(k) as usize;
    (retarget_ends(a_id, k, r0, k - 1), retarget_ends(a_id, k, ell - r0, k + 1))
}

/// `a_{t_v} = (a_{v♭})^♯` for `a_v = b`: the `r0` segments of `b` ending at
/// `k−1` with the smallest beginnings are extended to `k`, and the segments
/// that ended at `k` are extended to `k+1`.
pub fn flat_sharp(b: &Multisegment, k: i64, r0: usize) -> Result<Multisegment> {
    let mut lower: Vec<Segment> = b.segments().into_iter().filter(|s| s.end == k - 1).collect();
    if lower.len() < r0 {
        return Err(Error::ShapeMismatch(format!("{b} has fewer than {r0} segments ending at {}", k - 1)));
    }
    lower.sort_by_key(|s| s.begin);
    let raised: Vec<Segment> = lower[..r0].to_vec();
    let mut out = Multisegment::empty();
    let mut pending = raised.clone();
    for s in b.segments() {
        if s.end == k {
            out.insert(s.plus_end(), 1);
        } else if let Some(pos) = pending.iter().position(|p| *p == s) {
            pending.swap_remove(pos);
            out.insert(s.plus_end(), 1);
        } else {
            out.insert(s, 1);
        }
    }
    Ok(out)
}

/// The elements of the parabolic subgroup `S_J`, block by block.
fn parabolic_subgroup(j: &GeneratorSet) -> Vec<Permutation> {
    let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
    for (lo, hi) in j.blocks() {
        let local = all_permutations(hi - lo + 1);
        partial = partial
            .iter()
            .flat_map(|p| {
                local.iter().map(move |x| {
                    let mut q = p.clone();
                    q.extend(x.one_line().into_iter().map(|v| v + lo - 1));
                    q
                })
            })
            .collect();
    }
    partial.into_iter().map(|w| Permutation::new(w).expect("product of block permutations")).collect()
}

/// `θ_J^{J1}(·, t)` on the interval `{u ∈ S^{J,∅} : w <= u <= t}`; it
/// vanishes outside `u <= t` because every `ρu` lies above `u`.
///
/// Solves `Σ_ρ q^{ℓ(ρ)} P^{J1,∅}_{ρu,t} = Σ_{u'} θ(u',t) P^{J,∅}_{u,u'}` for
/// every `u` in the interval, from the top down. `ρ` runs over the elements
/// of `S_J` without left descents in `J1`.
fn theta_column(
    j: &GeneratorSet,
    j1: &GeneratorSet,
    w: &Permutation,
    t: &Permutation,
) -> Result<BTreeMap<Permutation, QPoly>> {
    let empty = GeneratorSet::empty(j.n());
    let rhos: Vec<Permutation> = parabolic_subgroup(j)
        .into_iter()
        .filter(|x| x.left_descents().iter().all(|&i| !j1.contains(i)))
        .collect();
    let mut upper: Vec<Permutation> = Vec::new();
    for u in bruhat_interval(t, |u| bruhat_leq(w, u).unwrap_or(false)) {
        if in_double_quotient(&u, j, &empty) {
            upper.push(u);
        }
    }
    upper.sort_by_key(|u| std::cmp::Reverse(u.length()));
    let mut theta: BTreeMap<Permutation, QPoly> = BTreeMap::new();
    for u in &upper {
        let mut lhs = QPoly::zero();
        for rho in &rhos {
            let x = rho.compose(u)?;
            if bruhat_leq(&x, t)? {
                let p = double_parabolic_kl(&x, t, j1, &empty)?;
                lhs = &lhs + &p.shift_q(rho.length() as i32);
            }
        }
        for (u2, th) in &theta {
            if th.is_zero() || !bruhat_leq(u, u2)? {
                continue;
            }
            lhs = &lhs - &(th * &double_parabolic_kl(u, u2, j, &empty)?);
        }
        theta.insert(u.clone(), lhs);
    }
    Ok(theta)
}

/// Entry `(w,u)` of the inverse of the matrix `P^{J,∅}(1)` on `S^{J,∅}`,
/// memoized. It vanishes unless `w <= u`.
fn inverse_kl_at_one(j: &GeneratorSet, w: &Permutation, u: &Permutation) -> Result<i64> {
    type Key = (GeneratorSet, Permutation, Permutation);
    static CACHE: OnceLock<DashMap<Key, i64>> = OnceLock::new();
    let cache = CACHE.get_or_init(DashMap::new);
    if u == w {
        return Ok(1);
    }
    let key = (j.clone(), w.clone(), u.clone());
    if let Some(r) = cache.get(&key) {
        return Ok(*r);
    }
    let empty = GeneratorSet::empty(j.n());
    let mut r = 0;
    for v in bruhat_interval(u, |v| bruhat_leq(w, v).unwrap_or(false)) {
        if v != *u && in_double_quotient(&v, j, &empty) {
            let p = double_parabolic_kl(&v, u, j, &empty)?.eval_one_i64();
            if p != 0 {
                r -= inverse_kl_at_one(j, w, &v)? * p;
            }
        }
    }
    cache.insert(key, r);
    Ok(r)
}

/// `θ(w,t)(1)`, the bottom entry of [`theta_column`] evaluated at `q = 1`,
/// obtained by applying one row of the inverse KL matrix to the left-hand side.
fn theta_at_one(j: &GeneratorSet, j1: &GeneratorSet, w: &Permutation, t: &Permutation) -> Result<i64> {
    let empty = GeneratorSet::empty(j.n());
    let rhos: Vec<Permutation> = parabolic_subgroup(j)
        .into_iter()
        .filter(|x| x.left_descents().iter().all(|&i| !j1.contains(i)))
        .collect();
    let mut theta = 0;
    for u in bruhat_interval(t, |u| bruhat_leq(w, u).unwrap_or(false)) {
        if !in_double_quotient(&u, j, &empty) {
            continue;
        }
        let mut lhs = 0;
        for rho in &rhos {
            let x = rho.compose(&u)?;
            if bruhat_leq(&x, t)? {
                lhs += double_parabolic_kl(&x, t, j1, &empty)?.eval_one_i64();
            }
        }
        if lhs != 0 {
            theta += inverse_kl_at_one(j, w, &u)? * lhs;
        }
    }
    Ok(theta)
}

/// The table `θ_J^{J1(ℓ_k−r0,k)}(u, t_v)` for a model `a_id` with distinct
/// beginnings, segments ending at `k` and none ending at `k+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaTable {
    pub j: GeneratorSet,
    pub j1: GeneratorSet,
    pub j2: GeneratorSet,
    pub k: i64,
    pub r0: usize,
    /// `(u, t_v) ↦ θ(u, t_v)`, non-zero entries only.
    pub entries: BTreeMap<(Permutation, Permutation), QPoly>,
    /// `v ↦ t_v`.
    pub flats: BTreeMap<Permutation, Permutation>,
}

fn check_model(a_id: &Multisegment, k: i64) -> Result<()> {
    let distinct_begins = a_id.begins().values().all(|&c| c == 1);
    let separated = match (a_id.max_begin(), a_id.min_end()) {
        (Some(b), Some(e)) => b < e,
        _ => false,
    };
    if identity_model(a_id) != *a_id || !distinct_begins || !separated {
        return Err(Error::ShapeMismatch(format!(
            "{a_id} is not an identity model with distinct beginnings below every end"
        )));
    }
    if a_id.end_count(k) == 0 || a_id.end_count(k + 1) != 0 {
        return Err(Error::ShapeMismatch(format!("{a_id} needs segments ending at {k} and none at {}", k + 1)));
    }
    Ok(())
}

/// Builds `t_v` for every `v ∈ S^{J2(r0,k),∅}` and solves for `θ(u, t_v)`
/// over all `u ∈ S^{J,∅}`.
pub fn theta_table(a_id: &Multisegment, k: i64, r0: usize) -> Result<ThetaTable> {
    check_model(a_id, k)?;
    let ell = a_id.end_count(k) as usize;
    if r0 > ell {
        return Err(Error::ShapeMismatch(format!("r0 = {r0} exceeds the {ell} segments ending at {k}")));
    }
    let (j, _) = parabolic_type(a_id)?;
    let (a2, a1) = shifted_models(a_id, k, r0);
    let (j2, _) = parabolic_type(&a2)?;
    let (j1, _) = parabolic_type(&a1)?;
    let empty = GeneratorSet::empty(j.n());
    let bottom = Permutation::identity(j.n());
    let mut entries = BTreeMap::new();
    let mut flats = BTreeMap::new();
    for v in coset_reps(&j2, &empty)? {
        let t = phi_inv(&a1, &flat_sharp(&phi(&a2, &v)?, k, r0)?)?;
        for (u, th) in theta_column(&j, &j1, &bottom, &t)? {
            if !th.is_zero() {
                entries.insert((u, t.clone()), th);
            }
        }
        flats.insert(v, t);
    }
    Ok(ThetaTable { j, j1, j2, k, r0, entries, flats })
}

/// One truncation `lower = trunc(upper, step)` of a lifting chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftStep {
    pub upper: Multisegment,
    pub step: TruncationStep,
}

/// Lowers the smallest repeated beginning `i0` (the longest segment there)
/// and every beginning below it by one. Undone by left truncations, descending.
fn separate_begins(c: &Multisegment) -> Option<(Multisegment, Vec<TruncationStep>)> {
    let begins = c.begins();
    let (&i0, _) = begins.iter().find(|(_, &n)| n > 1)?;
    let longest = c.segments().into_iter().filter(|s| s.begin == i0).max_by_key(|s| s.end)?;
    let mut out = c.map_segments(|s| Some(if s.begin < i0 { s.plus_begin() } else { s }));
    out.remove_one(&longest);
    out.insert(longest.plus_begin(), 1);
    let mut script = vec![TruncationStep::left(i0 - 1)];
    script.extend(begins.range(..i0).rev().map(|(&j, _)| TruncationStep::left(j - 1)));
    Some((out, script))
}

/// Lowers every beginning by one while some beginning is not below every end.
fn lower_begins(c: &Multisegment) -> Option<(Multisegment, Vec<TruncationStep>)> {
    if c.max_begin()? < c.min_end()? {
        return None;
    }
    let out = c.map_segments(|s| Some(s.plus_begin()));
    let script = c.begins().keys().rev().map(|&j| TruncationStep::left(j - 1)).collect();
    Some((out, script))
}

/// Raises every end above `k` by one when some segment ends at `k+1`.
fn clear_above(c: &Multisegment, k: i64) -> Option<(Multisegment, Vec<TruncationStep>)> {
    if c.end_count(k + 1) == 0 {
        return None;
    }
    let out = c.map_segments(|s| Some(if s.end > k { s.plus_end() } else { s }));
    let top = out.max_end()?;
    Some((out, (k + 2..=top).map(TruncationStep::right).collect()))
}

/// Applies `next` until it returns `None`, then flattens the stages into
/// single truncation steps leading from the top back down to `a`. Every step
/// is checked against the hypothesis `H` for the multisegment it is applied to.
pub(crate) fn lift_chain<F>(a: &Multisegment, next: F) -> Result<(Multisegment, Vec<LiftStep>)>
where
    F: Fn(&Multisegment) -> Option<(Multisegment, Vec<TruncationStep>)>,
{
    let mut stages: Vec<(Multisegment, Vec<TruncationStep>)> = Vec::new();
    let mut cur = a.clone();
    while let Some((up, script)) = next(&cur) {
        stages.push((up.clone(), script));
        cur = up;
    }
    let mut chain = Vec::new();
    for (up, script) in stages.into_iter().rev() {
        let mut x = up;
        for step in script {
            if !in_s_a_k_side(&x, &x, step) {
                return Err(Error::UnreducedCase(format!("{x} fails the hypothesis at {step:?}")));
            }
            let lower = truncate(&x, step);
            chain.push(LiftStep { upper: x, step });
            x = lower;
        }
    }
    let reached = chain.last().map(|s| truncate(&s.upper, s.step)).unwrap_or_else(|| cur.clone());
    if reached != *a {
        return Err(Error::UnreducedCase(format!("lifting chain of {a} ends at {reached}")));
    }
    Ok((cur, chain))
}

/// A multisegment `c'` with distinct beginnings, all below every end, and no
/// segment ending at `k+1`, together with single truncation steps leading
/// from `c'` down to `a`.
pub fn derivative_normal_form(a: &Multisegment, k: i64) -> Result<(Multisegment, Vec<LiftStep>)> {
    lift_chain(a, |c| separate_begins(c).or_else(|| lower_begins(c)).or_else(|| clear_above(c, k)))
}

/// `D^k(L_{Φ(w)})` for `Φ(w)` in normal form, from the θ coefficients,
/// restricted to the terms `b` with `wanted(b)`. The other coefficients are
/// never computed.
fn normal_form_derivative<F: Fn(&Multisegment) -> bool>(c: &Multisegment, k: i64, wanted: F) -> Result<Terms> {
    let ell = c.end_count(k) as usize;
    if ell == 0 {
        return Ok(Terms::from([(c.clone(), 1)]));
    }
    let a_id = identity_model(c);
    check_model(&a_id, k)?;
    let (j, _) = parabolic_type(&a_id)?;
    let w = phi_inv(&a_id, c)?;
    let mut out = Terms::new();
    for r0 in 0..=ell {
        let (_, a1) = shifted_models(&a_id, k, r0);
        let (j1, _) = parabolic_type(&a1)?;
        for b in gamma_set(c, k, Some(r0))? {
            if !wanted(&b) {
                continue;
            }
            let t = phi_inv(&a1, &flat_sharp(&b, k, r0)?)?;
            let theta = theta_at_one(&j, &j1, &w, &t)?;
            if theta != 0 {
                *out.entry(b).or_insert(0) += theta;
            }
        }
    }
    Ok(out)
}

/// Whether the term `L_d` of `D^k(L_upper)` contributes after [`transport_step`]
/// has been applied along the whole chain.
fn survives_chain(d: &Multisegment, chain: &[LiftStep], k: i64) -> bool {
    let mut d = d.clone();
    for lift in chain {
        let lower = truncate(&lift.upper, lift.step);
        if d == lift.upper || !in_s_a_k_side(&d, &d, lift.step) {
            return false;
        }
        let td = truncate(&d, lift.step);
        if d.degree() - td.degree() != lift.upper.degree() - lower.degree() || !preceq_k(&td, &lower, k) {
            return false;
        }
        d = td;
    }
    true
}

/// Carries `D^k(L_upper)` down one truncation step to `D^k(L_lower)`.
fn transport_step(terms: &Terms, lift: &LiftStep, k: i64) -> Terms {
    let lower = truncate(&lift.upper, lift.step);
    let removed = lift.upper.degree() - lower.degree();
    let mut out = Terms::from([(lower.clone(), 1)]);
    for (d, &n) in terms {
        if *d == lift.upper || n == 0 || !in_s_a_k_side(d, d, lift.step) {
            continue;
        }
        let td = truncate(d, lift.step);
        if d.degree() - td.degree() != removed || !preceq_k(&td, &lower, k) {
            continue;
        }
        *out.entry(td).or_insert(0) += n;
    }
    out
}

/// `D^k(L_a) = Σ_b θ_k(b,a) L_b` (right derivative) or `^kD(L_a)` (left,
/// through the mirror), from the θ tables of the normal form of `a`.
pub fn derivative_closed_form(a: &Multisegment, k: i64, side: Side) -> Result<Terms> {
    if side == Side::Left {
        let mirrored = derivative_closed_form(&a.mirror(), -k, Side::Right)?;
        return Ok(mirrored.into_iter().map(|(b, n)| (b.mirror(), n)).collect());
    }
    if a.end_count(k) == 1 {
        // A single segment ends at `k`: D^k(L_a) = L_a + L_{a^(k)} exactly when H_k(a) holds.
        let mut out = Terms::from([(a.clone(), 1)]);
        let step = TruncationStep::right(k);
        if in_s_a_k_side(a, a, step) {
            out.insert(truncate(a, step), 1);
        }
        return Ok(out);
    }
    let (top, chain) = derivative_normal_form(a, k)?;
    let mut terms = normal_form_derivative(&top, k, |b| survives_chain(b, &chain, k))?;
    for lift in &chain {
        terms = transport_step(&terms, lift, k);
    }
    terms.retain(|_, n| *n != 0);
    Ok(terms)
}
