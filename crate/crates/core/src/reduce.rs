//! Truncation functors, the hypothesis `H_k`, the bijection `ψ_k`, the
//! reductions to ordinary and symmetric multisegments, relation types, and
//! the classification of posets `S(a)` by parabolic models.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::coxeter::{phi_inv, GeneratorSet, Permutation};
use crate::error::{Error, Result};
use crate::kl::kl_poly;
use crate::multiseg::{segment_relation, Multisegment, Segment, Side};
use crate::poset::{leq, minimal_element};
use crate::ring::cached_poset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TruncationStep {
    pub side: Side,
    pub k: i64,
}

impl TruncationStep {
    pub fn right(k: i64) -> TruncationStep {
        TruncationStep { side: Side::Right, k }
    }

    pub fn left(k: i64) -> TruncationStep {
        TruncationStep { side: Side::Left, k }
    }

    fn mirrored(self) -> TruncationStep {
        let side = match self.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        TruncationStep { side, k: -self.k }
    }
}

/// `a^(k)` (right) or `^(k)a` (left): shorten every segment ending
/// (beginning) at `k`, dropping those that become empty.
pub fn truncate(a: &Multisegment, step: TruncationStep) -> Multisegment {
    a.map_segments(|s| match step.side {
        Side::Right if s.end == step.k => s.minus_end(),
        Side::Left if s.begin == step.k => s.minus_begin(),
        _ => Some(s),
    })
}

/// Applies the steps in order.
pub fn truncate_seq(a: &Multisegment, steps: &[TruncationStep]) -> Multisegment {
    steps.iter().fold(a.clone(), |x, &s| truncate(&x, s))
}

/// The right truncations `[i,j]` expands to, ascending: `a^(i, i+1, ..., j)`.
pub fn right_script(seg: &Segment) -> Vec<TruncationStep> {
    (seg.begin..=seg.end).map(TruncationStep::right).collect()
}

/// The left truncations `[i,j]` expands to, descending: `^(j, j-1, ..., i)a`.
pub fn left_script(seg: &Segment) -> Vec<TruncationStep> {
    (seg.begin..=seg.end).rev().map(TruncationStep::left).collect()
}

fn hk_right(b: &Multisegment, a: &Multisegment, k: i64) -> bool {
    if b.end_count(k) != a.end_count(k) {
        return false;
    }
    let lower: Vec<Segment> = b.ending_at(k - 1).into_iter().map(|(s, _)| s).collect();
    let upper: Vec<Segment> = b.ending_at(k).into_iter().map(|(s, _)| s).collect();
    !lower.iter().any(|d| upper.iter().any(|e| d.is_linked(e)))
}

/// `H_k(b,a)`. The first condition, `deg(b^(k)) = deg(a^(k))`, is the same
/// as `b` and `a` having equally many segments ending at `k`.
pub fn hypothesis_hk(b: &Multisegment, a: &Multisegment, k: i64) -> Result<bool> {
    hypothesis_hk_side(b, a, k, Side::Right)
}

pub fn hypothesis_hk_side(b: &Multisegment, a: &Multisegment, k: i64, side: Side) -> Result<bool> {
    if !leq(b, a) {
        return Err(Error::NotComparable { b: b.clone(), a: a.clone() });
    }
    Ok(match side {
        Side::Right => hk_right(b, a, k),
        Side::Left => hk_right(&b.mirror(), &a.mirror(), -k),
    })
}

/// Membership in `S(a)_k`: `b <= a` and `H_k(b,a)`.
pub fn in_s_a_k(b: &Multisegment, a: &Multisegment, k: i64) -> bool {
    leq(b, a) && hk_right(b, a, k)
}

pub fn in_s_a_k_side(b: &Multisegment, a: &Multisegment, step: TruncationStep) -> bool {
    match step.side {
        Side::Right => in_s_a_k(b, a, step.k),
        Side::Left => in_s_a_k(&b.mirror(), &a.mirror(), -step.k),
    }
}

/// `ψ_k(b) = b^(k)` on `S(a)_k`.
pub fn psi_k(b: &Multisegment, a: &Multisegment, k: i64) -> Result<Multisegment> {
    if !in_s_a_k(b, a, k) {
        return Err(Error::NotInDomain(b.clone()));
    }
    Ok(truncate(b, TruncationStep::right(k)))
}

/// The unique `c ∈ S(a)_k` with `c^(k) = d`, for `d ∈ S(a^(k))`.
///
/// Candidates extend some of the segments of `d` ending at `k−1` and add
/// copies of `[k]` so that `c` has as many segments ending at `k` as `a`.
pub fn psi_k_inv(d: &Multisegment, a: &Multisegment, k: i64) -> Result<Multisegment> {
    let ak = truncate(a, TruncationStep::right(k));
    if !leq(d, &ak) {
        return Err(Error::NotInDomain(d.clone()));
    }
    let ell = a.end_count(k);
    let lower = d.ending_at(k - 1);
    let mut found: Vec<Multisegment> = Vec::new();
    let mut choice = vec![0u32; lower.len()];
    loop {
        let x: u32 = choice.iter().sum();
        if x <= ell {
            let mut c = d.clone();
            for (&(s, _), &t) in lower.iter().zip(&choice) {
                for _ in 0..t {
                    c.remove_one(&s);
                }
                c.insert(s.plus_end(), t);
            }
            c.insert(Segment::point(k), ell - x);
            if in_s_a_k(&c, a, k) && !found.contains(&c) {
                found.push(c);
            }
        }
        // odometer over 0..=multiplicity for each (k−1)-ending segment
        let mut i = 0;
        loop {
            if i == choice.len() {
                return match found.len() {
                    1 => Ok(found.pop().expect("one element")),
                    _ => Err(Error::NotInDomain(d.clone())),
                };
            }
            if choice[i] < lower[i].1 {
                choice[i] += 1;
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Inverse truncation on either side.
pub fn untruncate(d: &Multisegment, a: &Multisegment, step: TruncationStep) -> Result<Multisegment> {
    match step.side {
        Side::Right => psi_k_inv(d, a, step.k),
        Side::Left => Ok(psi_k_inv(&d.mirror(), &a.mirror(), -step.k)?.mirror()),
    }
}

/// One stage of a reduction: `input` is recovered from `output` by applying `undo` in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionStage {
    pub input: Multisegment,
    pub output: Multisegment,
    pub script: Segment,
    pub undo: Vec<TruncationStep>,
}

impl ReductionStage {
    fn new(input: Multisegment, output: Multisegment, script: Segment, side: Side) -> ReductionStage {
        let undo = match side {
            Side::Right => right_script(&script),
            Side::Left => left_script(&script),
        };
        ReductionStage { input, output, script, undo }
    }

    fn mirrored(self) -> ReductionStage {
        ReductionStage {
            input: self.input.mirror(),
            output: self.output.mirror(),
            script: self.script.mirror(),
            undo: self.undo.into_iter().map(TruncationStep::mirrored).collect(),
        }
    }

    /// Lifts `b ∈ S(input)` to `S(output)` by inverting the undo truncations one at a time.
    pub fn lift(&self, b: &Multisegment) -> Result<Multisegment> {
        let mut chain = vec![self.output.clone()];
        for &s in &self.undo {
            let next = truncate(chain.last().expect("non-empty"), s);
            chain.push(next);
        }
        debug_assert_eq!(chain.last(), Some(&self.input));
        let mut b = b.clone();
        for (i, &s) in self.undo.iter().enumerate().rev() {
            b = untruncate(&b, &chain[i], s)?;
        }
        Ok(b)
    }
}

fn first_gap_above(set: &BTreeMap<i64, u32>, e: i64) -> i64 {
    let mut l = e + 1;
    while set.contains_key(&l) {
        l += 1;
    }
    l
}

/// Separates the smallest repeated end: the longest segment ending there and
/// every segment ending in the run of ends just above it grow by one point.
fn ends_step(a: &Multisegment) -> Option<ReductionStage> {
    let ends = a.ends();
    let (&e, _) = ends.iter().find(|(_, &c)| c > 1)?;
    let l = first_gap_above(&ends, e);
    let longest = a
        .ending_at(e)
        .into_iter()
        .map(|(s, _)| s)
        .min_by_key(|s| s.begin)
        .expect("repeated end has segments");
    let mut out = a.map_segments(|s| Some(if s.end > e && s.end < l { s.plus_end() } else { s }));
    out.remove_one(&longest);
    out.insert(longest.plus_end(), 1);
    Some(ReductionStage::new(a.clone(), out, Segment::new(e + 1, l), Side::Right))
}

fn begins_step(a: &Multisegment) -> Option<ReductionStage> {
    ends_step(&a.mirror()).map(ReductionStage::mirrored)
}

/// Moves the run of ends starting at the smallest end up by one, while some
/// beginning lies above some end. Repeated ends stay repeated.
fn lift_ends_step(a: &Multisegment) -> Option<ReductionStage> {
    if a.is_parabolic() {
        return None;
    }
    let ends = a.ends();
    let e = *ends.keys().next()?;
    let l = first_gap_above(&ends, e);
    let out = a.map_segments(|s| Some(if s.end >= e && s.end < l { s.plus_end() } else { s }));
    Some(ReductionStage::new(a.clone(), out, Segment::new(e + 1, l), Side::Right))
}

fn script_sum(stages: &[ReductionStage]) -> Multisegment {
    Multisegment::from_segments(stages.iter().map(|s| s.script))
}

/// Stages turning `a` into an ordinary multisegment, in creation order.
pub fn ordinary_stages(a: &Multisegment) -> Vec<ReductionStage> {
    let mut stages = Vec::new();
    let mut cur = a.clone();
    while let Some(st) = ends_step(&cur).or_else(|| begins_step(&cur)) {
        cur = st.output.clone();
        stages.push(st);
    }
    stages
}

/// Full truncation sequence recovering the source from the last output.
fn replay_script(stages: &[ReductionStage]) -> Vec<TruncationStep> {
    stages.iter().rev().flat_map(|s| s.undo.iter().copied()).collect()
}

/// An ordinary `b` with `a = ^(c2) b ^(c1)`: `c1` collects the right
/// scripts and `c2` the left ones.
pub fn reduce_to_ordinary(a: &Multisegment) -> (Multisegment, Multisegment, Multisegment) {
    let stages = ordinary_stages(a);
    let b = stages.last().map(|s| s.output.clone()).unwrap_or_else(|| a.clone());
    let (right, left): (Vec<ReductionStage>, Vec<ReductionStage>) =
        stages.into_iter().partition(|s| s.undo.first().map(|t| t.side) == Some(Side::Right));
    (b, script_sum(&right), script_sum(&left))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetrizationCertificate {
    pub source: Multisegment,
    pub sym: Multisegment,
    /// Right scripts of the ordinary stage.
    pub c1: Multisegment,
    /// Left scripts of the ordinary stage.
    pub c2: Multisegment,
    /// Right scripts of the stage lowering ends below beginnings.
    pub c3: Multisegment,
    pub a_id: Multisegment,
    pub w: Permutation,
    pub stages: Vec<ReductionStage>,
    /// The truncations taking `sym` back to `source`, in order.
    pub replay: Vec<TruncationStep>,
}

/// `Σ [β_i, ε_i]` for the sorted beginnings and ends of a parabolic `a`.
pub fn identity_model(a: &Multisegment) -> Multisegment {
    let segs = a.segments();
    let mut beta: Vec<i64> = segs.iter().map(|s| s.begin).collect();
    let mut eps: Vec<i64> = segs.iter().map(|s| s.end).collect();
    beta.sort_unstable();
    eps.sort_unstable();
    Multisegment::from_segments(beta.into_iter().zip(eps).map(|(b, e)| Segment::new(b, e)))
}

pub fn symmetrize(a: &Multisegment) -> Result<SymmetrizationCertificate> {
    let mut stages = ordinary_stages(a);
    let n_ord = stages.len();
    let mut cur = stages.last().map(|s| s.output.clone()).unwrap_or_else(|| a.clone());
    while let Some(st) = lift_ends_step(&cur) {
        cur = st.output.clone();
        stages.push(st);
    }
    let (ord, sym_stages) = stages.split_at(n_ord);
    let (right, left): (Vec<ReductionStage>, Vec<ReductionStage>) =
        ord.iter().cloned().partition(|s| s.undo.first().map(|t| t.side) == Some(Side::Right));
    let a_id = identity_model(&cur);
    let w = phi_inv(&a_id, &cur)?;
    let replay = replay_script(&stages);
    debug_assert_eq!(&truncate_seq(&cur, &replay), a);
    Ok(SymmetrizationCertificate {
        source: a.clone(),
        sym: cur,
        c1: script_sum(&right),
        c2: script_sum(&left),
        c3: script_sum(sym_stages),
        a_id,
        w,
        replay,
        stages,
    })
}

/// `b ∈ S(source)` ↦ the corresponding `b^sym ∈ S(sym)`.
pub fn transport(b: &Multisegment, cert: &SymmetrizationCertificate) -> Result<Multisegment> {
    if !leq(b, &cert.source) {
        return Err(Error::NotComparable { b: b.clone(), a: cert.source.clone() });
    }
    lift_through(b, &cert.stages)
}

fn lift_through(b: &Multisegment, stages: &[ReductionStage]) -> Result<Multisegment> {
    stages.iter().try_fold(b.clone(), |x, st| st.lift(&x))
}

/// `m(b,a)` through the certificate: `m(Φ(v), Φ(w)) = P_{w,v}(1)`.
pub fn multiplicity_via(cert: &SymmetrizationCertificate, b: &Multisegment) -> Result<i64> {
    if !leq(b, &cert.source) {
        return Ok(0);
    }
    let bs = transport(b, cert)?;
    let v = phi_inv(&cert.a_id, &bs)?;
    Ok(kl_poly(&cert.w, &v)?.eval_one_i64())
}

pub fn sym_multiplicity(b: &Multisegment, a: &Multisegment) -> Result<i64> {
    multiplicity_via(&symmetrize(a)?, b)
}

/// The order-preserving maps on beginnings and ends carrying `a` to `a'`
/// segment by segment, when the two share a relation type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMap {
    pub begins: BTreeMap<i64, i64>,
    pub ends: BTreeMap<i64, i64>,
}

fn monotone_injective(m: &BTreeMap<i64, i64>) -> bool {
    m.values().zip(m.values().skip(1)).all(|(x, y)| x < y)
}

pub fn relation_map(a: &Multisegment, a2: &Multisegment) -> Option<RelationMap> {
    let (s1, s2) = (a.segments(), a2.segments());
    if s1.len() != s2.len() {
        return None;
    }
    let mut begins = BTreeMap::new();
    let mut ends = BTreeMap::new();
    for (x, y) in s1.iter().zip(&s2) {
        if *begins.entry(x.begin).or_insert(y.begin) != y.begin || *ends.entry(x.end).or_insert(y.end) != y.end {
            return None;
        }
    }
    if !monotone_injective(&begins) || !monotone_injective(&ends) {
        return None;
    }
    for i in 0..s1.len() {
        for j in i + 1..s1.len() {
            if segment_relation(&s1[i], &s1[j]) != segment_relation(&s2[i], &s2[j]) {
                return None;
            }
        }
    }
    Some(RelationMap { begins, ends })
}

pub fn relation_type_equal(a: &Multisegment, a2: &Multisegment) -> bool {
    relation_map(a, a2).is_some()
}

/// `Ξ(b) = {[ξ_b(b(Δ)), ξ_e(e(Δ))] : Δ ∈ b}`.
pub fn xi_transport(b: &Multisegment, a: &Multisegment, a2: &Multisegment) -> Result<Multisegment> {
    let map = relation_map(a, a2).ok_or_else(|| Error::NoBijection(a.clone(), a2.clone()))?;
    if !leq(b, a) {
        return Err(Error::NotComparable { b: b.clone(), a: a.clone() });
    }
    let mut segs = Vec::new();
    for s in b.segments() {
        let (Some(&i), Some(&j)) = (map.begins.get(&s.begin), map.ends.get(&s.end)) else {
            return Err(Error::NoBijection(a.clone(), a2.clone()));
        };
        segs.push(Segment::try_new(i, j).ok_or_else(|| Error::NoBijection(a.clone(), a2.clone()))?);
    }
    Ok(Multisegment::from_segments(segs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub n: usize,
    pub j1: GeneratorSet,
    pub j2: GeneratorSet,
    pub w: Permutation,
    /// The parabolic model `Φ(w)`: every beginning at or below every end.
    pub model: Multisegment,
    pub a_id: Multisegment,
    /// `S(a)` is isomorphic to the elements of `S(model)` lying above `floor`.
    pub floor: Multisegment,
    pub stages: Vec<ReductionStage>,
}

/// Sorted beginnings and ends, and the minimal `w` with `a = Σ [β_i, ε_{w(i)}]`.
fn begin_end_permutation(a: &Multisegment) -> (Vec<i64>, Vec<i64>, Permutation) {
    let mut segs = a.segments();
    segs.sort_by_key(|s| (s.begin, s.end));
    let beta: Vec<i64> = segs.iter().map(|s| s.begin).collect();
    let mut eps: Vec<i64> = segs.iter().map(|s| s.end).collect();
    eps.sort_unstable();
    let mut used = vec![false; eps.len()];
    let w = segs
        .iter()
        .map(|s| {
            let j = (0..eps.len()).find(|&j| !used[j] && eps[j] == s.end).expect("end present");
            used[j] = true;
            j + 1
        })
        .collect();
    (beta, eps, Permutation::new(w).expect("bijection"))
}

pub fn classify_poset(a: &Multisegment) -> Result<Classification> {
    let (beta, eps, w) = begin_end_permutation(a);
    let n = beta.len();
    let j1 = GeneratorSet::from_equal_neighbours(&eps);
    let j2 = GeneratorSet::from_equal_neighbours(&beta);
    let mut stages = Vec::new();
    let mut cur = a.clone();
    while let Some(st) = lift_ends_step(&cur) {
        cur = st.output.clone();
        stages.push(st);
    }
    let floor = lift_through(&minimal_element(a), &stages)?;
    Ok(Classification { n, j1, j2, w, a_id: identity_model(&cur), model: cur, floor, stages })
}

/// Checks `S(a) ≅ {c ∈ S(model) : c >= floor}` by brute force: the lift is a
/// bijection onto that set which preserves and reflects the order.
pub fn verify_classification(a: &Multisegment, cls: &Classification) -> Result<bool> {
    let small = cached_poset(a)?;
    let big = cached_poset(&cls.model)?;
    let upper: Vec<&Multisegment> = big.elements.iter().filter(|c| leq(&cls.floor, c)).collect();
    if upper.len() != small.len() {
        return Ok(false);
    }
    let lifted = small
        .elements
        .iter()
        .map(|b| lift_through(b, &cls.stages))
        .collect::<Result<Vec<_>>>()?;
    for (i, x) in lifted.iter().enumerate() {
        if !upper.contains(&x) {
            return Ok(false);
        }
        for (j, y) in lifted.iter().enumerate() {
            if leq(&small.elements[i], &small.elements[j]) != leq(x, y) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
