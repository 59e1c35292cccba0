//! Segments, multisegments, weights and the elementary operation.
//!
//! A segment `[i,j]` is an integer interval with `i <= j`. Multisegments are
//! kept in one canonical form: distinct segments sorted end-major with
//! beginnings descending inside an end, each carrying a positive multiplicity.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub begin: i64,
    pub end: i64,
}

impl Segment {
    /// Panics when `begin > end`; empty segments are never materialised.
    pub fn new(begin: i64, end: i64) -> Segment {
        assert!(begin <= end, "empty segment [{begin},{end}]");
        Segment { begin, end }
    }

    pub fn try_new(begin: i64, end: i64) -> Option<Segment> {
        (begin <= end).then_some(Segment { begin, end })
    }

    pub fn point(k: i64) -> Segment {
        Segment { begin: k, end: k }
    }

    /// Number of points; always at least 1.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> i64 {
        self.end - self.begin + 1
    }

    pub fn contains_point(&self, k: i64) -> bool {
        self.begin <= k && k <= self.end
    }

    pub fn contains(&self, other: &Segment) -> bool {
        self.begin <= other.begin && other.end <= self.end
    }

    /// `Δ⁻`: drop the last point.
    pub fn minus_end(&self) -> Option<Segment> {
        Segment::try_new(self.begin, self.end - 1)
    }

    /// `⁻Δ`: drop the first point.
    pub fn minus_begin(&self) -> Option<Segment> {
        Segment::try_new(self.begin + 1, self.end)
    }

    /// `Δ⁺`: append the next point.
    pub fn plus_end(&self) -> Segment {
        Segment::new(self.begin, self.end + 1)
    }

    /// `⁺Δ`: prepend the previous point.
    pub fn plus_begin(&self) -> Segment {
        Segment::new(self.begin - 1, self.end)
    }

    pub fn mirror(&self) -> Segment {
        Segment::new(-self.end, -self.begin)
    }

    pub fn shift(&self, t: i64) -> Segment {
        Segment::new(self.begin + t, self.end + t)
    }

    /// Neither segment contains the other and their union is a segment.
    pub fn is_linked(&self, other: &Segment) -> bool {
        if self.contains(other) || other.contains(self) {
            return false;
        }
        let (lo, hi) = if self.begin < other.begin { (self, other) } else { (other, self) };
        hi.begin <= lo.end + 1
    }

    /// `self` precedes `other`: linked and `b(self) < b(other)`.
    pub fn precedes(&self, other: &Segment) -> bool {
        self.is_linked(other) && self.begin < other.begin
    }
}

/// The canonical order: `[j,k] < [m,n]` iff `k < n`, or `k = n` and `j > m`.
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.end.cmp(&other.end).then(other.begin.cmp(&self.begin))
    }
}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.begin == self.end {
            write!(f, "[{}]", self.begin)
        } else {
            write!(f, "[{},{}]", self.begin, self.end)
        }
    }
}

/// Which extremity of a segment an operation acts on: beginnings (left) or ends (right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Equal,
    Covers,
    CoveredBy,
    LinkedNotJuxtaposed,
    Juxtaposed,
    Unrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentRelation {
    pub kind: RelationKind,
    pub precedes: bool,
}

pub fn segment_relation(d1: &Segment, d2: &Segment) -> SegmentRelation {
    let kind = if d1 == d2 {
        RelationKind::Equal
    } else if d1.contains(d2) {
        RelationKind::Covers
    } else if d2.contains(d1) {
        RelationKind::CoveredBy
    } else if d1.is_linked(d2) {
        if d1.end < d2.begin || d2.end < d1.begin {
            RelationKind::Juxtaposed
        } else {
            RelationKind::LinkedNotJuxtaposed
        }
    } else {
        RelationKind::Unrelated
    };
    SegmentRelation { kind, precedes: d1.precedes(d2) }
}

/// Finitely supported function from integers to non-negative counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight(pub BTreeMap<i64, u32>);

impl Weight {
    pub fn get(&self, k: i64) -> u32 {
        self.0.get(&k).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u64 {
        self.0.values().map(|&v| v as u64).sum()
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.0.keys().next()?;
        let hi = *self.0.keys().next_back()?;
        Some((lo, hi))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Multisegment {
    entries: Vec<(Segment, u32)>,
}

impl Multisegment {
    pub fn empty() -> Multisegment {
        Multisegment { entries: Vec::new() }
    }

    pub fn from_segments<I: IntoIterator<Item = Segment>>(segs: I) -> Multisegment {
        Multisegment::from_counts(segs.into_iter().map(|s| (s, 1)))
    }

    pub fn from_counts<I: IntoIterator<Item = (Segment, u32)>>(items: I) -> Multisegment {
        let mut map: BTreeMap<Segment, u32> = BTreeMap::new();
        for (s, c) in items {
            if c > 0 {
                *map.entry(s).or_insert(0) += c;
            }
        }
        Multisegment { entries: map.into_iter().collect() }
    }

    /// Convenience constructor from `(begin, end)` pairs.
    pub fn of(pairs: &[(i64, i64)]) -> Multisegment {
        Multisegment::from_segments(pairs.iter().map(|&(b, e)| Segment::new(b, e)))
    }

    pub fn entries(&self) -> &[(Segment, u32)] {
        &self.entries
    }

    /// Segments with repetition, in canonical order.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(self.len());
        for &(s, c) in &self.entries {
            for _ in 0..c {
                out.push(s);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(|&(_, c)| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, s: &Segment) -> u32 {
        match self.entries.binary_search_by(|(t, _)| t.cmp(s)) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    pub fn insert(&mut self, s: Segment, c: u32) {
        if c == 0 {
            return;
        }
        match self.entries.binary_search_by(|(t, _)| t.cmp(&s)) {
            Ok(i) => self.entries[i].1 += c,
            Err(i) => self.entries.insert(i, (s, c)),
        }
    }

    /// Removes one copy of `s`; returns false if there was none.
    pub fn remove_one(&mut self, s: &Segment) -> bool {
        match self.entries.binary_search_by(|(t, _)| t.cmp(s)) {
            Ok(i) => {
                if self.entries[i].1 == 1 {
                    self.entries.remove(i);
                } else {
                    self.entries[i].1 -= 1;
                }
                true
            }
            Err(_) => false,
        }
    }

    pub fn with(&self, s: Segment) -> Multisegment {
        let mut out = self.clone();
        out.insert(s, 1);
        out
    }

    /// Multiset union.
    pub fn sum(&self, other: &Multisegment) -> Multisegment {
        let mut out = self.clone();
        for &(s, c) in &other.entries {
            out.insert(s, c);
        }
        out
    }

    pub fn map_segments<F: FnMut(Segment) -> Option<Segment>>(&self, mut f: F) -> Multisegment {
        Multisegment::from_counts(self.entries.iter().filter_map(|&(s, c)| f(s).map(|t| (t, c))))
    }

    pub fn shift(&self, t: i64) -> Multisegment {
        self.map_segments(|s| Some(s.shift(t)))
    }

    /// Reflection `[i,j] -> [-j,-i]`; exchanges the roles of beginnings and ends.
    pub fn mirror(&self) -> Multisegment {
        self.map_segments(|s| Some(s.mirror()))
    }

    pub fn weight(&self) -> Weight {
        let mut w: BTreeMap<i64, u32> = BTreeMap::new();
        for &(s, c) in &self.entries {
            for k in s.begin..=s.end {
                *w.entry(k).or_insert(0) += c;
            }
        }
        Weight(w)
    }

    pub fn degree(&self) -> u64 {
        self.entries.iter().map(|&(s, c)| s.len() as u64 * c as u64).sum()
    }

    /// The multiset `e(a)` of ends, as a count map.
    pub fn ends(&self) -> BTreeMap<i64, u32> {
        let mut m = BTreeMap::new();
        for &(s, c) in &self.entries {
            *m.entry(s.end).or_insert(0) += c;
        }
        m
    }

    /// The multiset `b(a)` of beginnings, as a count map.
    pub fn begins(&self) -> BTreeMap<i64, u32> {
        let mut m = BTreeMap::new();
        for &(s, c) in &self.entries {
            *m.entry(s.begin).or_insert(0) += c;
        }
        m
    }

    pub fn end_count(&self, k: i64) -> u32 {
        self.entries.iter().filter(|(s, _)| s.end == k).map(|&(_, c)| c).sum()
    }

    pub fn begin_count(&self, k: i64) -> u32 {
        self.entries.iter().filter(|(s, _)| s.begin == k).map(|&(_, c)| c).sum()
    }

    /// Segments ending at `k`, with multiplicity.
    pub fn ending_at(&self, k: i64) -> Vec<(Segment, u32)> {
        self.entries.iter().copied().filter(|(s, _)| s.end == k).collect()
    }

    pub fn min_begin(&self) -> Option<i64> {
        self.entries.iter().map(|(s, _)| s.begin).min()
    }

    pub fn max_begin(&self) -> Option<i64> {
        self.entries.iter().map(|(s, _)| s.begin).max()
    }

    pub fn min_end(&self) -> Option<i64> {
        self.entries.first().map(|(s, _)| s.end)
    }

    pub fn max_end(&self) -> Option<i64> {
        self.entries.last().map(|(s, _)| s.end)
    }

    /// All beginnings distinct and all ends distinct.
    pub fn is_ordinary(&self) -> bool {
        self.begins().values().all(|&c| c == 1) && self.ends().values().all(|&c| c == 1)
    }

    /// Ordinary with every beginning at or below every end.
    pub fn is_symmetric(&self) -> bool {
        self.is_ordinary() && self.is_parabolic()
    }

    /// `max b(a) <= min e(a)`: the segments share a common point.
    pub fn is_parabolic(&self) -> bool {
        match (self.max_begin(), self.min_end()) {
            (Some(b), Some(e)) => b <= e,
            _ => true,
        }
    }

    /// Distinct pairs of segments that are linked, with the preceding one first.
    pub fn linked_pairs(&self) -> Vec<(Segment, Segment)> {
        let mut out = Vec::new();
        for (i, &(s, _)) in self.entries.iter().enumerate() {
            for &(t, _) in &self.entries[i + 1..] {
                if s.precedes(&t) {
                    out.push((s, t));
                } else if t.precedes(&s) {
                    out.push((t, s));
                }
            }
        }
        out
    }

    pub fn has_linked_pair(&self) -> bool {
        let n = self.entries.len();
        (0..n).any(|i| (i + 1..n).any(|j| self.entries[i].0.is_linked(&self.entries[j].0)))
    }
}

impl fmt::Display for Multisegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, &(s, c)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if c > 1 {
                write!(f, "{c}*")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Multisegment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Multisegment> {
        crate::cli::parse_multisegment(s)
    }
}

/// Replace one copy each of the linked pair `d1`, `d2` by their union and
/// intersection. An empty intersection is dropped.
pub fn elementary_op(a: &Multisegment, d1: &Segment, d2: &Segment) -> Result<Multisegment> {
    if !d1.is_linked(d2) {
        return Err(Error::NotLinked(*d1, *d2));
    }
    let mut out = a.clone();
    if !out.remove_one(d1) {
        return Err(Error::NotMember(*d1, a.clone()));
    }
    if !out.remove_one(d2) {
        return Err(Error::NotMember(*d2, a.clone()));
    }
    out.insert(Segment::new(d1.begin.min(d2.begin), d1.end.max(d2.end)), 1);
    if let Some(cap) = Segment::try_new(d1.begin.max(d2.begin), d1.end.min(d2.end)) {
        out.insert(cap, 1);
    }
    Ok(out)
}

pub fn weight_of(a: &Multisegment) -> Weight {
    a.weight()
}

pub fn degree_of(a: &Multisegment) -> u64 {
    a.degree()
}

/// `r_ij(a)`: the number of segments `[l,m]` of `a` with `l <= i` and `j <= m`.
pub fn rank_invariant(a: &Multisegment, i: i64, j: i64) -> Result<u64> {
    if i > j {
        return Err(Error::BadRange(i, j));
    }
    Ok(rank_unchecked(a, i, j))
}

pub(crate) fn rank_unchecked(a: &Multisegment, i: i64, j: i64) -> u64 {
    a.entries()
        .iter()
        .filter(|(s, _)| s.begin <= i && j <= s.end)
        .map(|&(_, c)| c as u64)
        .sum()
}
