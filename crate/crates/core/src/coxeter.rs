//! Symmetric groups: Bruhat order, parabolic quotients, the Φ dictionary
//! between permutations and multisegments, Zelevinsky's permutation and the
//! partition/subset maps used by the derivative formulas.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiseg::{Multisegment, Segment};

/// A permutation of `{1..n}` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    w: Vec<u8>,
}

impl Permutation {
    pub fn new(one_line: Vec<usize>) -> Result<Permutation> {
        let n = one_line.len();
        if n > 255 {
            return Err(Error::BadPermutation(format!("permutations are limited to n <= 255, got {n}")));
        }
        let mut seen = vec![false; n + 1];
        for &x in &one_line {
            if x == 0 || x > n || seen[x] {
                return Err(Error::BadPermutation(format!("{one_line:?} is not a permutation of 1..={n}")));
            }
            seen[x] = true;
        }
        Ok(Permutation { w: one_line.into_iter().map(|x| x as u8).collect() })
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation { w: (1..=n as u8).collect() }
    }

    /// The simple transposition `σ_i`, swapping `i` and `i+1`.
    pub fn simple(n: usize, i: usize) -> Permutation {
        Permutation::identity(n).right_mul_simple(i)
    }

    /// Longest element `[n, n-1, ..., 1]`.
    pub fn longest(n: usize) -> Permutation {
        Permutation { w: (1..=n as u8).rev().collect() }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// `w(i)` for `1 <= i <= n`.
    pub fn at(&self, i: usize) -> usize {
        self.w[i - 1] as usize
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.w.iter().map(|&x| x as usize).collect()
    }

    pub(crate) fn raw(&self) -> &[u8] {
        &self.w
    }

    pub(crate) fn from_raw(w: Vec<u8>) -> Permutation {
        Permutation { w }
    }

    pub fn length(&self) -> usize {
        let n = self.w.len();
        let mut inv = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.w[i] > self.w[j] {
                    inv += 1;
                }
            }
        }
        inv
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.w.len()];
        for (i, &x) in self.w.iter().enumerate() {
            inv[x as usize - 1] = i as u8 + 1;
        }
        Permutation { w: inv }
    }

    /// Functional composition `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch(self.n(), other.n()));
        }
        Ok(Permutation { w: other.w.iter().map(|&x| self.w[x as usize - 1]).collect() })
    }

    /// `σ_i ∘ self`: swaps the values `i` and `i+1`.
    pub fn left_mul_simple(&self, i: usize) -> Permutation {
        let (a, b) = (i as u8, i as u8 + 1);
        Permutation {
            w: self
                .w
                .iter()
                .map(|&x| if x == a { b } else if x == b { a } else { x })
                .collect(),
        }
    }

    /// `self ∘ σ_i`: swaps the positions `i` and `i+1`.
    pub fn right_mul_simple(&self, i: usize) -> Permutation {
        let mut w = self.w.clone();
        w.swap(i - 1, i);
        Permutation { w }
    }

    /// `σ_i w < w`, i.e. `i+1` appears before `i` in one-line notation.
    pub fn has_left_descent(&self, i: usize) -> bool {
        let pos = |v: u8| self.w.iter().position(|&x| x == v).expect("value present");
        pos(i as u8 + 1) < pos(i as u8)
    }

    /// `w σ_i < w`, i.e. `w(i) > w(i+1)`.
    pub fn has_right_descent(&self, i: usize) -> bool {
        self.w[i - 1] > self.w[i]
    }

    pub fn left_descents(&self) -> Vec<usize> {
        let inv = self.inverse();
        (1..self.n()).filter(|&i| inv.w[i - 1] > inv.w[i]).collect()
    }

    pub fn right_descents(&self) -> Vec<usize> {
        (1..self.n()).filter(|&i| self.has_right_descent(i)).collect()
    }

    /// Lower Bruhat covers `w·t` with `ℓ(w·t) = ℓ(w) − 1`.
    pub fn lower_covers(&self) -> Vec<Permutation> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (hi, lo) = (self.w[i], self.w[j]);
                if hi < lo {
                    continue;
                }
                if (i + 1..j).any(|k| lo < self.w[k] && self.w[k] < hi) {
                    continue;
                }
                let mut w = self.w.clone();
                w.swap(i, j);
                out.push(Permutation { w });
            }
        }
        out
    }

    /// Upper Bruhat covers.
    pub fn upper_covers(&self) -> Vec<Permutation> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (lo, hi) = (self.w[i], self.w[j]);
                if lo > hi {
                    continue;
                }
                if (i + 1..j).any(|k| lo < self.w[k] && self.w[k] < hi) {
                    continue;
                }
                let mut w = self.w.clone();
                w.swap(i, j);
                out.push(Permutation { w });
            }
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.w.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Bruhat order by dominance of `r_ij(w) = #{k <= i : w(k) >= j}`.
pub fn bruhat_leq(u: &Permutation, w: &Permutation) -> Result<bool> {
    if u.n() != w.n() {
        return Err(Error::SizeMismatch(u.n(), w.n()));
    }
    Ok(bruhat_leq_raw(u.raw(), w.raw()))
}

pub(crate) fn bruhat_leq_raw(u: &[u8], w: &[u8]) -> bool {
    // Compare prefix counts column by column: for each prefix length i and
    // threshold j, #{k <= i : u(k) >= j} <= #{k <= i : w(k) >= j}.
    let n = u.len();
    let mut cu = [0u8; 256];
    let mut cw = [0u8; 256];
    for i in 0..n {
        for c in &mut cu[1..=u[i] as usize] {
            *c += 1;
        }
        for c in &mut cw[1..=w[i] as usize] {
            *c += 1;
        }
        for j in 1..=n {
            if cu[j] > cw[j] {
                return false;
            }
        }
    }
    true
}

/// A subset of the simple reflections `σ_1..σ_{n−1}` of `S_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorSet {
    n: usize,
    members: BTreeSet<usize>,
}

impl GeneratorSet {
    /// Panics on indices outside `1..n`.
    pub fn new<I: IntoIterator<Item = usize>>(n: usize, members: I) -> GeneratorSet {
        let members: BTreeSet<usize> = members.into_iter().collect();
        assert!(members.iter().all(|&i| i >= 1 && i < n), "generator index out of range");
        GeneratorSet { n, members }
    }

    pub fn empty(n: usize) -> GeneratorSet {
        GeneratorSet { n, members: BTreeSet::new() }
    }

    /// The generators `σ_i` for which positions `i` and `i+1` carry the same key.
    pub fn from_equal_neighbours<T: PartialEq>(keys: &[T]) -> GeneratorSet {
        let n = keys.len();
        GeneratorSet::new(n, (1..n).filter(|&i| keys[i - 1] == keys[i]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Maximal runs of consecutive positions joined by members, as `(start, end)` with `start <= end`.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 1;
        for i in 1..=self.n {
            if i == self.n || !self.contains(i) {
                out.push((start, i));
                start = i + 1;
            }
        }
        out
    }

    /// The longest element `w_J` of `S_J`: each block reversed.
    pub fn longest_element(&self) -> Permutation {
        let mut w = Vec::with_capacity(self.n);
        for (s, e) in self.blocks() {
            w.extend((s..=e).rev());
        }
        Permutation::new(w).expect("block reversal is a permutation")
    }

    pub fn display(&self) -> String {
        let v: Vec<String> = self.members.iter().map(|i| i.to_string()).collect();
        format!("{{{}}}", v.join(","))
    }
}

/// `w ∈ S^J`: no right descent in `J`.
pub fn in_right_quotient(w: &Permutation, j: &GeneratorSet) -> bool {
    j.members().all(|i| !w.has_right_descent(i))
}

/// `v ∈ S^{J1,J2}`: no left descent in `J1` and no right descent in `J2`.
pub fn in_double_quotient(v: &Permutation, j1: &GeneratorSet, j2: &GeneratorSet) -> bool {
    j1.members().all(|i| !v.has_left_descent(i)) && in_right_quotient(v, j2)
}

/// All permutations of `S_n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=n).collect();
    loop {
        out.push(Permutation::new(cur.clone()).expect("valid"));
        // next lexicographic permutation
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// The Bruhat interval `{x : x <= t}`, generated downward by transpositions
/// that remove an inversion.
pub fn bruhat_lower_interval(t: &Permutation) -> Vec<Permutation> {
    bruhat_interval(t, |_| true)
}

/// The elements `u <= t` satisfying `keep`, where `keep` must be upward closed
/// (if it fails at `u` it fails at every `y <= u`), so the search can prune.
pub fn bruhat_interval<F: Fn(&Permutation) -> bool>(t: &Permutation, keep: F) -> Vec<Permutation> {
    if !keep(t) {
        return Vec::new();
    }
    let mut seen = HashSet::from([t.clone()]);
    let mut rejected = HashSet::new();
    let mut queue = vec![t.clone()];
    let mut out = Vec::new();
    while let Some(x) = queue.pop() {
        let n = x.w.len();
        // Bruhat covers: swap an inversion (i,j) with no value strictly between them in positions i..j.
        for i in 0..n {
            let mut ceiling = 0;
            for j in i + 1..n {
                let v = x.w[j];
                if v < x.w[i] && v > ceiling {
                    ceiling = v;
                    let mut w = x.w.clone();
                    w.swap(i, j);
                    let y = Permutation::from_raw(w);
                    if seen.contains(&y) || rejected.contains(&y) {
                        continue;
                    }
                    if keep(&y) {
                        seen.insert(y.clone());
                        queue.push(y);
                    } else {
                        rejected.insert(y);
                    }
                }
            }
        }
        out.push(x);
    }
    out
}

/// Enumerates `S^{J1,J2}` in lexicographic order.
pub fn coset_reps(j1: &GeneratorSet, j2: &GeneratorSet) -> Result<Vec<Permutation>> {
    if j1.n() != j2.n() {
        return Err(Error::SizeMismatch(j1.n(), j2.n()));
    }
    Ok(all_permutations(j1.n()).into_iter().filter(|v| in_double_quotient(v, j1, j2)).collect())
}

/// The unique maximal element of `S_{J1} v S_{J2}`, reached by climbing ascents.
pub fn max_double_coset(v: &Permutation, j1: &GeneratorSet, j2: &GeneratorSet) -> Permutation {
    let mut v = v.clone();
    loop {
        if let Some(i) = j1.members().find(|&i| !v.has_left_descent(i)) {
            v = v.left_mul_simple(i);
        } else if let Some(i) = j2.members().find(|&i| !v.has_right_descent(i)) {
            v = v.right_mul_simple(i);
        } else {
            return v;
        }
    }
}

/// The unique minimal element of `S_{J1} v S_{J2}`.
pub fn min_double_coset(v: &Permutation, j1: &GeneratorSet, j2: &GeneratorSet) -> Permutation {
    let mut v = v.clone();
    loop {
        if let Some(i) = j1.members().find(|&i| v.has_left_descent(i)) {
            v = v.left_mul_simple(i);
        } else if let Some(i) = j2.members().find(|&i| v.has_right_descent(i)) {
            v = v.right_mul_simple(i);
        } else {
            return v;
        }
    }
}

/// Begin and end sequences `β`, `ε` (both ascending) of a multisegment whose
/// beginnings all lie at or below its ends.
fn parabolic_frame(a_id: &Multisegment) -> Result<(Vec<i64>, Vec<i64>)> {
    if !a_id.is_parabolic() {
        return Err(Error::NotParabolic(a_id.clone()));
    }
    let segs = a_id.segments();
    let mut beta: Vec<i64> = segs.iter().map(|s| s.begin).collect();
    let mut eps: Vec<i64> = segs.iter().map(|s| s.end).collect();
    beta.sort_unstable();
    eps.sort_unstable();
    Ok((beta, eps))
}

/// The generator sets recording repeated ends (acting on the left) and
/// repeated beginnings (acting on the right) of a parabolic multisegment.
pub fn parabolic_type(a_id: &Multisegment) -> Result<(GeneratorSet, GeneratorSet)> {
    let (beta, eps) = parabolic_frame(a_id)?;
    Ok((GeneratorSet::from_equal_neighbours(&eps), GeneratorSet::from_equal_neighbours(&beta)))
}

/// `Φ(w) = Σ_i [β_i, ε_{w(i)}]`.
///
/// `a_id` must have every beginning at or below every end. When it has
/// repeated ends or beginnings, `w` must be the minimal representative of
/// its double coset for the corresponding generator sets.
pub fn phi(a_id: &Multisegment, w: &Permutation) -> Result<Multisegment> {
    let (beta, eps) = parabolic_frame(a_id).map_err(|_| Error::NotSymmetric(a_id.clone()))?;
    if w.n() != beta.len() {
        return Err(Error::SizeMismatch(w.n(), beta.len()));
    }
    let (j1, j2) = (GeneratorSet::from_equal_neighbours(&eps), GeneratorSet::from_equal_neighbours(&beta));
    if !in_double_quotient(w, &j1, &j2) {
        return Err(Error::NotInQuotient(format!(
            "{w} is not a minimal representative for J1={}, J2={}",
            j1.display(),
            j2.display()
        )));
    }
    Ok(phi_unchecked(&beta, &eps, w))
}

/// `Φ(w)` on any permutation, without the quotient check; constant on double cosets.
pub fn phi_any(a_id: &Multisegment, w: &Permutation) -> Result<Multisegment> {
    let (beta, eps) = parabolic_frame(a_id).map_err(|_| Error::NotSymmetric(a_id.clone()))?;
    if w.n() != beta.len() {
        return Err(Error::SizeMismatch(w.n(), beta.len()));
    }
    Ok(phi_unchecked(&beta, &eps, w))
}

fn phi_unchecked(beta: &[i64], eps: &[i64], w: &Permutation) -> Multisegment {
    Multisegment::from_segments((1..=w.n()).map(|i| Segment::new(beta[i - 1], eps[w.at(i) - 1])))
}

/// Inverse of [`phi`]: the minimal double-coset representative `w` with `Φ(w) = b`.
pub fn phi_inv(a_id: &Multisegment, b: &Multisegment) -> Result<Permutation> {
    let (beta, eps) = parabolic_frame(a_id).map_err(|_| Error::NotSymmetric(a_id.clone()))?;
    let mut segs = b.segments();
    if segs.len() != beta.len() {
        return Err(Error::NotInImage(b.clone()));
    }
    segs.sort_by_key(|s| (s.begin, s.end));
    let mut used = vec![false; eps.len()];
    let mut w = Vec::with_capacity(segs.len());
    for (i, s) in segs.iter().enumerate() {
        if s.begin != beta[i] {
            return Err(Error::NotInImage(b.clone()));
        }
        let Some(j) = (0..eps.len()).find(|&j| !used[j] && eps[j] == s.end) else {
            return Err(Error::NotInImage(b.clone()));
        };
        used[j] = true;
        w.push(j + 1);
    }
    let w = Permutation::new(w).expect("assignment is a bijection");
    debug_assert_eq!(&phi_unchecked(&beta, &eps, &w), b);
    Ok(w)
}

/// Zelevinsky's permutation `w(b)`: the longest element of `S^b ⊂ S_{deg b}`.
///
/// The support of `b` is translated to start at 1. Points `1..r` get
/// consecutive blocks `B_i` of size `φ_b(i)`; `w` sends exactly `x_ij`
/// elements of `B_i` into `B_j`.
pub fn zelevinsky_permutation(b: &Multisegment) -> Permutation {
    let x = zelevinsky_matrix(b);
    let r = x.len();
    let phi: Vec<usize> = (0..r).map(|i| x[i].iter().sum()).collect();
    let mut start = vec![0usize; r + 1];
    for i in 0..r {
        start[i + 1] = start[i] + phi[i];
    }
    let deg = start[r];
    // values[i] collects the values sent from domain block i.
    let mut values: Vec<Vec<usize>> = vec![Vec::new(); r];
    for j in 0..r {
        // Value block j, handed out from the top: domain block 0 gets the largest.
        let mut next = start[j + 1];
        for i in 0..r {
            for _ in 0..x[i][j] {
                values[i].push(next);
                next -= 1;
            }
        }
    }
    let mut w = vec![0usize; deg];
    for i in 0..r {
        let mut vals = values[i].clone();
        vals.sort_unstable_by(|p, q| q.cmp(p));
        for (t, v) in vals.into_iter().enumerate() {
            w[start[i] + t] = v;
        }
    }
    Permutation::new(w).expect("block assignment is a bijection")
}

/// The matrix `X^b` on the translated support `1..r` (0-indexed here):
/// `x_ij = b_ij` for `i <= j`, `x_{i,i-1}` = number of segments containing both
/// `i-1` and `i`, zero otherwise.
pub fn zelevinsky_matrix(b: &Multisegment) -> Vec<Vec<usize>> {
    let Some((lo, hi)) = b.weight().support() else {
        return Vec::new();
    };
    let r = (hi - lo + 1) as usize;
    let mut x = vec![vec![0usize; r]; r];
    for &(s, c) in b.entries() {
        let (i, j) = ((s.begin - lo) as usize, (s.end - lo) as usize);
        x[i][j] += c as usize;
        for p in i + 1..=j {
            x[p][p - 1] += c as usize;
        }
    }
    x
}

/// `S^b`: all permutations realising the block counts of `X^b`. Brute force;
/// intended for small degrees only.
pub fn zelevinsky_class(b: &Multisegment) -> Vec<Permutation> {
    let x = zelevinsky_matrix(b);
    let r = x.len();
    let phi: Vec<usize> = (0..r).map(|i| x[i].iter().sum()).collect();
    let mut block_of = Vec::new();
    for (i, &p) in phi.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(i, p));
    }
    all_permutations(block_of.len())
        .into_iter()
        .filter(|w| {
            let mut cnt = vec![vec![0usize; r]; r];
            for p in 1..=w.n() {
                cnt[block_of[p - 1]][block_of[w.at(p) - 1]] += 1;
            }
            cnt == x
        })
        .collect()
}

/// A partition `ℓ_1 <= ... <= ℓ_r` with parts bounded by `ell`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    pub parts: Vec<usize>,
    pub ell: usize,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>, ell: usize) -> Result<Partition> {
        parts.sort_unstable();
        if parts.iter().any(|&p| p > ell) {
            return Err(Error::ShapeMismatch(format!("a part of {parts:?} exceeds {ell}")));
        }
        Ok(Partition { parts, ell })
    }

    /// The block encoding `(a_1..a_m; b_0..b_{m-1})`: the value
    /// `b_0 + ... + b_{i-1}` occurs `a_i` times and `Σ b = ell`.
    pub fn blocks(&self) -> (Vec<usize>, Vec<usize>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut prev = 0;
        let mut i = 0;
        while i < self.parts.len() {
            let v = self.parts[i];
            let cnt = self.parts[i..].iter().take_while(|&&p| p == v).count();
            b.push(v - prev);
            a.push(cnt);
            prev = v;
            i += cnt;
        }
        if prev < self.ell || a.is_empty() {
            b.push(self.ell - prev);
            a.push(0);
        }
        (a, b)
    }

    pub fn from_blocks(a: &[usize], b: &[usize]) -> Result<Partition> {
        if a.len() != b.len() {
            return Err(Error::ShapeMismatch("block lists differ in length".into()));
        }
        let mut parts = Vec::new();
        let mut v = 0;
        for (&ai, &bi) in a.iter().zip(b) {
            v += bi;
            parts.extend(std::iter::repeat_n(v, ai));
        }
        Partition::new(parts, v)
    }

    /// `ς_2(λ) = (ℓ_1 + 1, ..., ℓ_r + r)`, an `r`-subset of `1..r+ell`.
    pub fn to_subset(&self) -> Vec<usize> {
        self.parts.iter().enumerate().map(|(i, &p)| p + i + 1).collect()
    }

    pub fn from_subset(x: &[usize], ell: usize) -> Result<Partition> {
        let parts = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| xi.checked_sub(i + 1))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::ShapeMismatch(format!("{x:?} is not increasing from 1")))?;
        if parts.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::ShapeMismatch(format!("{x:?} is not strictly increasing")));
        }
        Partition::new(parts, ell)
    }

    /// Containment of Young diagrams.
    pub fn contained_in(&self, other: &Partition) -> bool {
        self.parts.len() == other.parts.len() && self.parts.iter().zip(&other.parts).all(|(p, q)| p <= q)
    }

    /// All partitions with `r` parts bounded by `ell`.
    pub fn all(r: usize, ell: usize) -> Vec<Partition> {
        fn go(r: usize, lo: usize, ell: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if cur.len() == r {
                out.push(Partition { parts: cur.clone(), ell });
                return;
            }
            for v in lo..=ell {
                cur.push(v);
                go(r, v, ell, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(r, 0, ell, &mut Vec::new(), &mut out);
        out
    }
}

/// `(x_λ, a_λ)` for a reference multisegment with `r` segments ending at
/// `k−1` and `ell` ending at `k`: the segments, ordered by beginning, are
/// re-ended so that exactly the positions `x_λ = ς_2(λ)` end at `k−1`.
pub fn partition_maps(
    lambda: &Partition,
    r: usize,
    ell: usize,
    a_ref: &Multisegment,
) -> Result<(Vec<usize>, Multisegment)> {
    if lambda.parts.len() != r || lambda.ell != ell {
        return Err(Error::ShapeMismatch(format!("partition does not lie in the ({r},{ell}) box")));
    }
    let ends = a_ref.ends();
    let Some(&top) = ends.keys().next_back() else {
        return Err(Error::ShapeMismatch("empty reference multisegment".into()));
    };
    let k = if ell == 0 { top + 1 } else { top };
    let count = |e: i64| ends.get(&e).copied().unwrap_or(0) as usize;
    if ends.keys().any(|&e| e != k && e != k - 1) || count(k - 1) != r || count(k) != ell {
        return Err(Error::ShapeMismatch(format!(
            "{a_ref} does not have {r} segments ending at k-1 and {ell} ending at k"
        )));
    }
    let mut segs = a_ref.segments();
    segs.sort_by_key(|s| (s.begin, s.end));
    let x = lambda.to_subset();
    let mut out = Vec::with_capacity(segs.len());
    for (idx, s) in segs.iter().enumerate() {
        let e = if x.contains(&(idx + 1)) { k - 1 } else { k };
        let seg = Segment::try_new(s.begin, e)
            .ok_or_else(|| Error::ShapeMismatch(format!("segment beginning at {} cannot end at {e}", s.begin)))?;
        out.push(seg);
    }
    Ok((x, Multisegment::from_segments(out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn m(s: &str) -> Multisegment {
        s.parse().unwrap()
    }

    /// Bruhat order through the subword property: `u <= w` iff some reduced
    /// word of `w` has a subword that multiplies to `u`.
    fn subword_leq(u: &Permutation, w: &Permutation) -> bool {
        fn reduced_word(w: &Permutation) -> Vec<usize> {
            let mut w = w.clone();
            let mut word = Vec::new();
            while let Some(&i) = w.right_descents().first() {
                word.push(i);
                w = w.right_mul_simple(i);
            }
            word.reverse();
            word
        }
        let word = reduced_word(w);
        let n = w.n();
        let mut reach = std::collections::HashSet::from([Permutation::identity(n)]);
        for &i in &word {
            let next: Vec<Permutation> = reach.iter().map(|x| x.right_mul_simple(i)).collect();
            reach.extend(next);
        }
        reach.contains(u)
    }

    #[test]
    fn bruhat_matches_subword_oracle() {
        for n in 1..=5 {
            let all = all_permutations(n);
            for u in &all {
                for w in &all {
                    assert_eq!(bruhat_leq(u, w).unwrap(), subword_leq(u, w), "{u} vs {w}");
                }
            }
        }
    }

    #[test]
    fn bruhat_examples() {
        let e = Permutation::identity(4);
        assert!(bruhat_leq(&e, &p(&[3, 4, 1, 2])).unwrap());
        assert!(bruhat_leq(&p(&[1, 3, 2, 4]), &p(&[3, 4, 1, 2])).unwrap());
        assert!(!bruhat_leq(&p(&[2, 1, 3]), &p(&[1, 3, 2])).unwrap());
        assert_eq!(bruhat_leq(&e, &Permutation::identity(3)), Err(Error::SizeMismatch(4, 3)));
    }

    #[test]
    fn covers_change_length_by_one() {
        for w in all_permutations(4) {
            for u in w.lower_covers() {
                assert_eq!(u.length() + 1, w.length());
                assert!(u.upper_covers().contains(&w));
            }
        }
        assert_eq!(Permutation::longest(4).lower_covers().len(), 3);
    }

    #[test]
    fn coset_counts() {
        let n = 4;
        let empty = GeneratorSet::empty(n);
        assert_eq!(coset_reps(&empty, &empty).unwrap().len(), 24);
        let j = GeneratorSet::new(n, [1, 3]);
        assert_eq!(coset_reps(&empty, &j).unwrap().len(), 6);
        assert_eq!(coset_reps(&j, &empty).unwrap().len(), 6);
        assert_eq!(coset_reps(&j, &j).unwrap().len(), 3);
        assert_eq!(GeneratorSet::new(3, [1, 2]).longest_element(), p(&[3, 2, 1]));
        assert_eq!(j.longest_element(), p(&[2, 1, 4, 3]));
    }

    #[test]
    fn length_is_additive_on_parabolic_factorisation() {
        let j = GeneratorSet::new(4, [1, 2]);
        let sj: Vec<Permutation> =
            all_permutations(4).into_iter().filter(|x| x.raw()[3] == 4).collect();
        for w in coset_reps(&GeneratorSet::empty(4), &j).unwrap() {
            for x in &sj {
                assert_eq!(w.compose(x).unwrap().length(), w.length() + x.length());
            }
        }
    }

    #[test]
    fn max_double_coset_is_maximal() {
        let (j1, j2) = (GeneratorSet::new(4, [2]), GeneratorSet::new(4, [1, 3]));
        for v in all_permutations(4) {
            let top = max_double_coset(&v, &j1, &j2);
            let bot = min_double_coset(&v, &j1, &j2);
            assert_eq!(max_double_coset(&bot, &j1, &j2), top);
            assert!(in_double_quotient(&bot, &j1, &j2));
            assert!(bruhat_leq(&v, &top).unwrap() && bruhat_leq(&bot, &v).unwrap());
        }
    }

    #[test]
    fn phi_examples() {
        let a = m("[1,4]+[2,5]+[3,6]");
        assert_eq!(phi(&a, &p(&[2, 1, 3])).unwrap(), m("[1,5]+[2,4]+[3,6]"));
        assert_eq!(phi(&a, &Permutation::identity(3)).unwrap(), a);
        let a = m("[0,3]+[1,4]+[2,5]+[3,6]");
        assert_eq!(phi(&a, &p(&[1, 3, 2, 4])).unwrap(), m("[0,3]+[1,5]+[2,4]+[3,6]"));
        let b = m("[0,5]+[1,3]+[2,6]+[3,4]");
        assert_eq!(phi_inv(&a, &b).unwrap(), p(&[3, 1, 4, 2]));
        assert!(matches!(phi(&m("[1]+[3]"), &Permutation::identity(2)), Err(Error::NotSymmetric(_))));
        assert!(matches!(phi_inv(&a, &m("[0,3]+[1,4]+[2,5]+[3,7]")), Err(Error::NotInImage(_))));
    }

    #[test]
    fn phi_parabolic_example() {
        let a = m("[1,3]+[1,4]+[2,5]+[2,6]");
        let (j1, j2) = parabolic_type(&a).unwrap();
        assert!(j1.is_empty());
        assert_eq!(j2, GeneratorSet::new(4, [1, 3]));
        let w = p(&[2, 3, 1, 4]);
        assert_eq!(phi(&a, &w).unwrap(), m("[1,4]+[1,5]+[2,3]+[2,6]"));
        assert_eq!(phi_inv(&a, &m("[1,4]+[1,5]+[2,3]+[2,6]")).unwrap(), w);
        assert!(matches!(phi(&a, &p(&[2, 1, 3, 4])), Err(Error::NotInQuotient(_))));
    }

    #[test]
    fn phi_reverses_order() {
        use crate::poset::leq;
        for a in [m("[1,3]+[2,4]+[3,5]+[3,6]"), m("[1,4]+[1,5]+[2,6]+[3,7]"), m("[0,3]+[1,4]+[2,5]+[3,6]")] {
            let (j1, j2) = parabolic_type(&a).unwrap();
            let reps = coset_reps(&j1, &j2).unwrap();
            for u in &reps {
                for v in &reps {
                    let (pu, pv) = (phi(&a, u).unwrap(), phi(&a, v).unwrap());
                    assert_eq!(bruhat_leq(u, v).unwrap(), leq(&pv, &pu), "{u} {v} on {a}");
                    assert_eq!(phi_inv(&a, &pu).unwrap(), *u);
                }
            }
        }
    }

    #[test]
    fn zelevinsky_examples() {
        assert_eq!(zelevinsky_permutation(&m("[1,2]+[2,3]")), p(&[3, 4, 1, 2]));
        assert_eq!(zelevinsky_permutation(&m("[1,3]+[2]")), p(&[4, 3, 1, 2]));
        assert_eq!(zelevinsky_permutation(&m("[3,5]+[4]")), p(&[4, 3, 1, 2]));
    }

    #[test]
    fn zelevinsky_permutation_dominates_its_class() {
        let samples = [
            "[1,4]", "[1]+2*[2]+[3]", "[1,2]+[2,3]", "[1,3]+[2]", "[1,2]+[2]+[2,3]",
            "[0,1]+[1,2]+[2,3]", "2*[1,2]+[2,3]", "[1]+[2]+[3]+[4]+[2,3]", "[1,3]+[2,4]",
        ];
        for s in samples {
            let b = m(s);
            let w = zelevinsky_permutation(&b);
            let class = zelevinsky_class(&b);
            assert!(class.contains(&w), "{s}");
            for u in &class {
                assert!(bruhat_leq(u, &w).unwrap(), "{s}: {u} not below {w}");
            }
        }
    }

    #[test]
    fn single_segment_class_is_a_point() {
        for r in 1..=5 {
            let b = Multisegment::of(&[(1, r)]);
            assert_eq!(zelevinsky_class(&b), vec![zelevinsky_permutation(&b)]);
        }
    }

    #[test]
    fn partition_examples() {
        let lambda = Partition::from_blocks(&[1, 0], &[2, 1]).unwrap();
        assert_eq!(lambda.parts, vec![2]);
        assert_eq!(lambda.blocks(), (vec![1, 0], vec![2, 1]));
        let a_ref = m("[1,4]+[2,5]+[3,5]+[4,5]");
        let (x, a) = partition_maps(&lambda, 1, 3, &a_ref).unwrap();
        assert_eq!(x, vec![3]);
        assert_eq!(a, m("[1,5]+[2,5]+[3,4]+[4,5]"));
        let zero = Partition::new(vec![0, 0], 2).unwrap();
        assert_eq!(zero.to_subset(), vec![1, 2]);
        let (_, a) = partition_maps(&zero, 2, 2, &m("[1,4]+[2,4]+[3,5]+[4,5]")).unwrap();
        assert_eq!(a, m("[1,4]+[2,4]+[3,5]+[4,5]"));
        assert!(matches!(partition_maps(&zero, 2, 2, &a_ref), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn partition_subset_map_is_an_isomorphism() {
        for (r, ell) in [(1, 3), (2, 2), (2, 3), (3, 2)] {
            let all = Partition::all(r, ell);
            for lam in &all {
                assert_eq!(Partition::from_subset(&lam.to_subset(), ell).unwrap(), *lam);
                let (a, b) = lam.blocks();
                assert_eq!(Partition::from_blocks(&a, &b).unwrap(), *lam);
                for mu in &all {
                    let (x, y) = (lam.to_subset(), mu.to_subset());
                    let dom = x.iter().zip(&y).all(|(p, q)| p <= q);
                    assert_eq!(lam.contained_in(mu), dom);
                }
            }
            let subsets = all.iter().map(|l| l.to_subset()).collect::<BTreeSet<_>>();
            assert_eq!(subsets.len(), binomial(r + ell, r));
            assert!(subsets.iter().all(|s| s.iter().all(|&v| v >= 1 && v <= r + ell)));
        }
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}
