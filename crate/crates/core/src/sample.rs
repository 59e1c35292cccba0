//! Seeded random instances for fuzzing and the self-test.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::multiseg::{Multisegment, Segment};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random segment inside `[0, span)` of length at most `max_len`.
pub fn random_segment<R: Rng>(rng: &mut R, span: i64, max_len: i64) -> Segment {
    let len = rng.gen_range(1..=max_len.clamp(1, span));
    let begin = rng.gen_range(0..=span - len);
    Segment::new(begin, begin + len - 1)
}

/// A random non-empty multisegment of degree between `⌈max_deg/2⌉` and `max_deg`.
/// Segments live on `[0, d/2 + 1]` for the drawn degree `d` and mostly have
/// length 1 or 2 (length 3 one time in three), so they link often.
pub fn random_multisegment<R: Rng>(rng: &mut R, max_deg: u64) -> Multisegment {
    let max_deg = max_deg.max(1);
    let target = rng.gen_range(max_deg.div_ceil(2)..=max_deg) as i64;
    let span = target / 2 + 2;
    let mut out = Multisegment::empty();
    let mut deg = 0;
    while deg < target {
        let max_len = if rng.gen_ratio(1, 3) { 3 } else { 2 };
        let s = random_segment(rng, span, (target - deg).min(max_len));
        deg += s.len();
        out.insert(s, 1);
    }
    out
}

/// A random end of `a`, the points where `D^k` acts non-trivially.
pub fn random_end<R: Rng>(rng: &mut R, a: &Multisegment) -> i64 {
    let ends: Vec<i64> = a.ends().into_keys().collect();
    ends[rng.gen_range(0..ends.len())]
}
