//! Kazhdan–Lusztig polynomials of symmetric groups and of multisegments.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use dashmap::DashMap;
use num_traits::ToPrimitive;

use crate::coxeter::{
    bruhat_leq_raw, in_double_quotient, in_right_quotient, max_double_coset, zelevinsky_permutation,
    GeneratorSet, Permutation,
};
use crate::error::{Error, Result};
use crate::multiseg::Multisegment;
use crate::poset::leq;
use crate::qpoly::QPoly;

pub const MAX_N: usize = 16;

type Key = (u64, u64, u8);

fn memo() -> &'static DashMap<Key, QPoly> {
    static MEMO: OnceLock<DashMap<Key, QPoly>> = OnceLock::new();
    MEMO.get_or_init(DashMap::new)
}

fn pack(w: &[u8]) -> u64 {
    w.iter().enumerate().fold(0u64, |acc, (i, &x)| acc | ((x as u64 - 1) << (4 * i)))
}

fn length(w: &[u8]) -> usize {
    let mut inv = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                inv += 1;
            }
        }
    }
    inv
}

fn position(w: &[u8], v: u8) -> usize {
    w.iter().position(|&x| x == v).expect("value present")
}

fn has_left_descent(w: &[u8], i: usize) -> bool {
    position(w, i as u8 + 1) < position(w, i as u8)
}

fn left_mul(w: &[u8], i: usize) -> Vec<u8> {
    let (a, b) = (i as u8, i as u8 + 1);
    w.iter().map(|&x| if x == a { b } else if x == b { a } else { x }).collect()
}

fn check_sizes(x: &Permutation, y: &Permutation) -> Result<()> {
    if x.n() != y.n() {
        return Err(Error::SizeMismatch(x.n(), y.n()));
    }
    if x.n() > MAX_N {
        return Err(Error::TooLarge(x.n()));
    }
    Ok(())
}

/// `P_{x,y}(q)`; zero unless `x <= y` in the Bruhat order.
pub fn kl_poly(x: &Permutation, y: &Permutation) -> Result<QPoly> {
    check_sizes(x, y)?;
    Ok(kl_raw(x.raw(), y.raw()))
}

/// Moves `x` up along descents of `y` on either side, which leaves `P_{x,y}` unchanged.
fn normalize(x: &[u8], y: &[u8]) -> Vec<u8> {
    let n = y.len();
    let mut x = x.to_vec();
    loop {
        let mut changed = false;
        for i in 1..n {
            if has_left_descent(y, i) && !has_left_descent(&x, i) {
                x = left_mul(&x, i);
                changed = true;
            }
            if y[i - 1] > y[i] && x[i - 1] < x[i] {
                x.swap(i - 1, i);
                changed = true;
            }
        }
        if !changed {
            return x;
        }
    }
}

fn kl_raw(x: &[u8], y: &[u8]) -> QPoly {
    if !bruhat_leq_raw(x, y) {
        return QPoly::zero();
    }
    let x = normalize(x, y);
    if x == y {
        return QPoly::one();
    }
    let key = (pack(&x), pack(y), y.len() as u8);
    if let Some(p) = memo().get(&key) {
        return p.clone();
    }
    let s = (1..y.len()).find(|&i| has_left_descent(y, i)).expect("y is not the identity");
    let v = left_mul(y, s);
    let sx = left_mul(&x, s);
    let ly = length(y);
    let mut p = &kl_raw(&sx, &v) + &kl_raw(&x, &v).shift_q(1);
    let lv = ly - 1;
    for z in interval(&x, &v) {
        if z == v || !has_left_descent(&z, s) {
            continue;
        }
        let lz = length(&z);
        if (lv - lz).is_multiple_of(2) {
            continue;
        }
        let mu = mu_raw(&z, &v, lz, lv);
        if mu == 0 {
            continue;
        }
        let term = kl_raw(&x, &z).shift_q(((ly - lz) / 2) as i32);
        p = &p - &term.scale(&mu.into());
    }
    memo().insert(key, p.clone());
    p
}

fn mu_raw(z: &[u8], v: &[u8], lz: usize, lv: usize) -> i64 {
    if lv - lz == 1 {
        return 1;
    }
    kl_raw(z, v).coeff_q(((lv - lz - 1) / 2) as i32).to_i64().expect("μ fits in i64")
}

/// The Bruhat interval `[x, v]`, walking down from `v` through lower covers.
fn interval(x: &[u8], v: &[u8]) -> Vec<Vec<u8>> {
    let n = v.len();
    let mut seen: HashSet<Vec<u8>> = HashSet::from([v.to_vec()]);
    let mut queue = VecDeque::from([v.to_vec()]);
    let mut out = Vec::new();
    while let Some(w) = queue.pop_front() {
        for i in 0..n {
            for j in i + 1..n {
                let (hi, lo) = (w[i], w[j]);
                if hi < lo || (i + 1..j).any(|k| lo < w[k] && w[k] < hi) {
                    continue;
                }
                let mut u = w.clone();
                u.swap(i, j);
                if !seen.contains(&u) && bruhat_leq_raw(x, &u) {
                    seen.insert(u.clone());
                    queue.push_back(u);
                }
            }
        }
        out.push(w);
    }
    out
}

/// `μ(x,y)`: the coefficient of `q^{(ℓ(y)−ℓ(x)−1)/2}` in `P_{x,y}`, zero for even length difference.
pub fn mu(x: &Permutation, y: &Permutation) -> Result<i64> {
    check_sizes(x, y)?;
    let (lx, ly) = (x.length(), y.length());
    if ly <= lx || (ly - lx) % 2 == 0 || !bruhat_leq_raw(x.raw(), y.raw()) {
        return Ok(0);
    }
    Ok(mu_raw(x.raw(), y.raw(), lx, ly))
}

/// `P^J_{v1,v2} = P_{v1 w_J, v2 w_J}` for `v1, v2` in `S^J`.
pub fn parabolic_kl(v1: &Permutation, v2: &Permutation, j: &GeneratorSet) -> Result<QPoly> {
    check_sizes(v1, v2)?;
    for v in [v1, v2] {
        if !in_right_quotient(v, j) {
            return Err(Error::NotInQuotient(format!("{v} is not in S^J for J={}", j.display())));
        }
    }
    let wj = j.longest_element();
    kl_poly(&v1.compose(&wj)?, &v2.compose(&wj)?)
}

/// KL polynomial of the double quotient `S^{J1,J2}`: the ordinary polynomial
/// of the maximal elements of the two double cosets.
pub fn double_parabolic_kl(
    v1: &Permutation,
    v2: &Permutation,
    j1: &GeneratorSet,
    j2: &GeneratorSet,
) -> Result<QPoly> {
    check_sizes(v1, v2)?;
    for v in [v1, v2] {
        if !in_double_quotient(v, j1, j2) {
            return Err(Error::NotInQuotient(format!(
                "{v} is not in S^{{J1,J2}} for J1={}, J2={}",
                j1.display(),
                j2.display()
            )));
        }
    }
    kl_poly(&max_double_coset(v1, j1, j2), &max_double_coset(v2, j1, j2))
}

/// `P_{a,b}(q) = P_{w(a), w(b)}(q)` for `b <= a`.
pub fn kl_multisegment(b: &Multisegment, a: &Multisegment) -> Result<QPoly> {
    if !leq(b, a) {
        return Err(Error::NotComparable { b: b.clone(), a: a.clone() });
    }
    kl_poly(&zelevinsky_permutation(a), &zelevinsky_permutation(b))
}

/// `m(b,a)`, the multiplicity of `L_b` in `π(a)`; zero unless `b <= a`.
pub fn multiplicity(b: &Multisegment, a: &Multisegment) -> Result<i64> {
    if !leq(b, a) {
        return Ok(0);
    }
    Ok(kl_multisegment(b, a)?.eval_one_i64())
}

pub fn memo_len() -> usize {
    memo().len()
}
