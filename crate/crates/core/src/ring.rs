//! The Grothendieck ring: the standard basis `π(a)`, the simple basis `L_a`,
//! products, partial derivatives, and the brute-force decompositions used as
//! reference results for every closed formula.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::kl::kl_multisegment;
use crate::multiseg::{Multisegment, Segment, Side};
use crate::poset::{generate_poset, lt, PosetSnapshot};

/// Integer coefficients indexed by multisegments.
pub type Terms = BTreeMap<Multisegment, i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Basis {
    #[serde(rename = "pi")]
    Standard,
    #[serde(rename = "L")]
    Simple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RingElement {
    pub basis: Basis,
    pub terms: Terms,
}

impl RingElement {
    pub fn zero(basis: Basis) -> RingElement {
        RingElement { basis, terms: Terms::new() }
    }

    pub fn from_terms(basis: Basis, terms: Terms) -> RingElement {
        let mut out = RingElement::zero(basis);
        for (a, c) in terms {
            out.add_term(a, c);
        }
        out
    }

    /// `π(a)`.
    pub fn standard(a: Multisegment) -> RingElement {
        RingElement { basis: Basis::Standard, terms: Terms::from([(a, 1)]) }
    }

    /// `L_a`.
    pub fn simple(a: Multisegment) -> RingElement {
        RingElement { basis: Basis::Simple, terms: Terms::from([(a, 1)]) }
    }

    pub fn add_term(&mut self, a: Multisegment, c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(a.clone()).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.terms.remove(&a);
        }
    }

    pub fn coefficient(&self, a: &Multisegment) -> i64 {
        self.terms.get(a).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same-basis sum; panics on a basis mismatch.
    pub fn plus(&self, other: &RingElement) -> RingElement {
        assert_eq!(self.basis, other.basis, "adding elements of different bases");
        let mut out = self.clone();
        for (a, &c) in &other.terms {
            out.add_term(a.clone(), c);
        }
        out
    }

    pub fn scaled(&self, c: i64) -> RingElement {
        RingElement::from_terms(self.basis, self.terms.iter().map(|(a, &x)| (a.clone(), x * c)).collect())
    }
}

fn poset_cache() -> &'static DashMap<Multisegment, Arc<PosetSnapshot>> {
    static CACHE: OnceLock<DashMap<Multisegment, Arc<PosetSnapshot>>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

fn m_cache() -> &'static DashMap<Multisegment, Arc<Terms>> {
    static CACHE: OnceLock<DashMap<Multisegment, Arc<Terms>>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

fn inverse_cache() -> &'static DashMap<Multisegment, Arc<Terms>> {
    static CACHE: OnceLock<DashMap<Multisegment, Arc<Terms>>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

/// `generate_poset`, memoised.
pub fn cached_poset(a: &Multisegment) -> Result<Arc<PosetSnapshot>> {
    if let Some(p) = poset_cache().get(a) {
        return Ok(p.clone());
    }
    let p = Arc::new(generate_poset(a)?);
    poset_cache().insert(a.clone(), p.clone());
    Ok(p)
}

/// Which independent computation supplies `m(b,a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Zelevinsky's permutations in `S_{deg a}`.
    Deg,
    /// Symmetrization followed by KL polynomials in `S_n`, `n` the number of segments.
    Sym,
}

/// `b ↦ m(b,a)` over `S(a)`, through the `S_deg` route.
pub fn m_matrix(a: &Multisegment) -> Result<Arc<Terms>> {
    if let Some(m) = m_cache().get(a) {
        return Ok(m.clone());
    }
    let poset = cached_poset(a)?;
    let entries: Vec<(Multisegment, i64)> = poset
        .elements
        .par_iter()
        .map(|b| Ok((b.clone(), kl_multisegment(b, a)?.eval_one_i64())))
        .collect::<Result<_>>()?;
    let m = Arc::new(entries.into_iter().collect::<Terms>());
    m_cache().insert(a.clone(), m.clone());
    Ok(m)
}

pub fn m_matrix_route(a: &Multisegment, route: Route) -> Result<Arc<Terms>> {
    match route {
        Route::Deg => m_matrix(a),
        Route::Sym => {
            let poset = cached_poset(a)?;
            let cert = crate::reduce::symmetrize(a)?;
            let entries = poset
                .elements
                .iter()
                .map(|b| Ok((b.clone(), crate::reduce::multiplicity_via(&cert, b)?)))
                .collect::<Result<Terms>>()?;
            Ok(Arc::new(entries))
        }
    }
}

/// `L_a = Σ_b m̃(b,a) π(b)`, by unitriangular inversion of the `m` matrix.
pub fn simple_in_standard(a: &Multisegment) -> Result<Arc<Terms>> {
    if let Some(t) = inverse_cache().get(a) {
        return Ok(t.clone());
    }
    let m = m_matrix(a)?;
    let mut acc = RingElement::standard(a.clone());
    for (b, &c) in m.iter() {
        if lt(b, a) {
            let sub = simple_in_standard(b)?;
            for (x, &y) in sub.iter() {
                acc.add_term(x.clone(), -c * y);
            }
        }
    }
    let t = Arc::new(acc.terms);
    inverse_cache().insert(a.clone(), t.clone());
    Ok(t)
}

pub fn convert(x: &RingElement, target: Basis) -> Result<RingElement> {
    if x.basis == target {
        return Ok(x.clone());
    }
    let mut out = RingElement::zero(target);
    for (a, &c) in &x.terms {
        let expansion = match target {
            Basis::Simple => m_matrix(a)?,
            Basis::Standard => simple_in_standard(a)?,
        };
        for (b, &d) in expansion.iter() {
            out.add_term(b.clone(), c * d);
        }
    }
    Ok(out)
}

/// Product in the standard basis, where `π(a)·π(b) = π(a+b)`.
pub fn ring_mult(x: &RingElement, y: &RingElement) -> Result<RingElement> {
    let (x, y) = (convert(x, Basis::Standard)?, convert(y, Basis::Standard)?);
    let mut out = RingElement::zero(Basis::Standard);
    for (a, &c) in &x.terms {
        for (b, &d) in &y.terms {
            out.add_term(a.sum(b), c * d);
        }
    }
    Ok(out)
}

/// `L_a × L_b = Σ_c m(c,b,a) L_c`, computed through the standard basis.
pub fn decompose_product(a: &Multisegment, b: &Multisegment) -> Result<Terms> {
    let prod = ring_mult(&RingElement::simple(a.clone()), &RingElement::simple(b.clone()))?;
    Ok(convert(&prod, Basis::Simple)?.terms)
}

/// Segments shortened by a partial derivative at `k`, or `None` if untouched.
pub(crate) fn shave(s: &Segment, k: i64, side: Side) -> Option<Option<Segment>> {
    match side {
        Side::Right if s.end == k => Some(s.minus_end()),
        Side::Left if s.begin == k => Some(s.minus_begin()),
        _ => None,
    }
}

/// `D^k(π(a)) = Σ_{Γ ⊆ a(k)} π(a_Γ)`: every sub-multiset of the segments
/// ending at `k` (beginning at `k` for the left derivative) is shortened.
pub fn derivative_of_standard(a: &Multisegment, k: i64, side: Side) -> Terms {
    let mut out = Terms::from([(Multisegment::empty(), 1i64)]);
    for &(s, c) in a.entries() {
        let shaved = shave(&s, k, side);
        let mut next = Terms::new();
        for (partial, coef) in &out {
            match shaved {
                None => {
                    let mut p = partial.clone();
                    p.insert(s, c);
                    *next.entry(p).or_insert(0) += coef;
                }
                Some(short) => {
                    for j in 0..=c {
                        let mut p = partial.clone();
                        p.insert(s, c - j);
                        if let Some(t) = short {
                            p.insert(t, j);
                        }
                        *next.entry(p).or_insert(0) += coef * binomial(c as i64, j as i64);
                    }
                }
            }
        }
        out = next;
    }
    out
}

fn binomial(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// The partial derivative, extended linearly from the standard basis.
pub fn derivative_standard(x: &RingElement, k: i64, side: Side) -> Result<RingElement> {
    let x = convert(x, Basis::Standard)?;
    let mut out = RingElement::zero(Basis::Standard);
    for (a, &c) in &x.terms {
        for (b, d) in derivative_of_standard(a, k, side) {
            out.add_term(b, c * d);
        }
    }
    Ok(out)
}

/// `D^k(L_a) = Σ_b n(b,a) L_b`, computed through the standard basis.
pub fn derivative_simple(a: &Multisegment, k: i64, side: Side) -> Result<Terms> {
    let d = derivative_standard(&RingElement::simple(a.clone()), k, side)?;
    Ok(convert(&d, Basis::Simple)?.terms)
}

/// Zelevinsky's full derivative along `[i,j]`: the composite `D^i ∘ ... ∘ D^j`
/// (right side), applied from `j` down to `i`.
pub fn derivative_along(a: &Multisegment, seg: &Segment) -> Result<Terms> {
    let mut x = RingElement::simple(a.clone());
    for k in (seg.begin..=seg.end).rev() {
        x = derivative_standard(&x, k, Side::Right)?;
    }
    Ok(convert(&x, Basis::Simple)?.terms)
}
