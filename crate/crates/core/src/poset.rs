//! The poset `S(a)` of multisegments below `a`.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiseg::{elementary_op, Multisegment, Segment};

pub const DEFAULT_SIZE_LIMIT: usize = 200_000;

/// Poset size cap, read once from `MSEG_SIZE_LIMIT`.
pub fn size_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("MSEG_SIZE_LIMIT")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_SIZE_LIMIT)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosetSnapshot {
    pub root: Multisegment,
    /// Sorted by level, then canonical form. The root is always first.
    pub elements: Vec<Multisegment>,
    /// `(upper, lower)` index pairs of the Hasse diagram.
    pub cover_edges: Vec<(usize, usize)>,
    /// `levels[i]` is the length of the longest chain from `elements[i]` up to the root.
    pub levels: Vec<usize>,
}

impl PosetSnapshot {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, b: &Multisegment) -> Option<usize> {
        self.elements.iter().position(|e| e == b)
    }

    pub fn minimum(&self) -> &Multisegment {
        self.elements.last().expect("poset is never empty")
    }

    pub fn level_of(&self, b: &Multisegment) -> Option<usize> {
        self.index_of(b).map(|i| self.levels[i])
    }
}

/// `b <= a` in the Zelevinsky order, decided by rank invariants: `r_ij(b) >= r_ij(a)`
/// for all `i <= j`, with equality on the diagonal (the weights agree).
pub fn leq(b: &Multisegment, a: &Multisegment) -> bool {
    let bounds = |m: &Multisegment| Some((m.min_begin()?, m.max_end()?));
    let (lo, hi) = match (bounds(a), bounds(b)) {
        (None, None) => return true,
        (Some((l1, h1)), Some((l2, h2))) => (l1.min(l2), h1.max(h2)),
        _ => return false,
    };
    let n = (hi - lo + 1) as usize;
    // diff[i*n + j] = r_ij(a) - r_ij(b), on offsets from `lo`.
    let mut diff = vec![0i64; n * n];
    for (m, sign) in [(a, 1i64), (b, -1i64)] {
        for &(s, c) in m.entries() {
            let (sb, se) = ((s.begin - lo) as usize, (s.end - lo) as usize);
            for i in sb..=se {
                for cell in &mut diff[i * n + i..=i * n + se] {
                    *cell += sign * c as i64;
                }
            }
        }
    }
    (0..n).all(|i| diff[i * n + i] == 0 && diff[i * n + i + 1..(i + 1) * n].iter().all(|&d| d <= 0))
}

pub fn lt(b: &Multisegment, a: &Multisegment) -> bool {
    b != a && leq(b, a)
}

/// Distinct multisegments reachable from `a` by one elementary operation.
pub fn elementary_successors(a: &Multisegment) -> Vec<Multisegment> {
    let mut out: Vec<Multisegment> = a
        .linked_pairs()
        .iter()
        .map(|(d1, d2)| elementary_op(a, d1, d2).expect("linked pair of members"))
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn generate_poset(a: &Multisegment) -> Result<PosetSnapshot> {
    generate_poset_with_limit(a, size_limit())
}

pub fn generate_poset_with_limit(a: &Multisegment, limit: usize) -> Result<PosetSnapshot> {
    let mut index: HashMap<Multisegment, usize> = HashMap::new();
    let mut nodes: Vec<Multisegment> = vec![a.clone()];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    index.insert(a.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let next = elementary_successors(&nodes[i]);
        // Keep only the successors not dominated by another successor.
        let covers: Vec<&Multisegment> = next
            .iter()
            .filter(|c| !next.iter().any(|d| d != *c && leq(c, d)))
            .collect();
        let mut ids = Vec::with_capacity(covers.len());
        for c in covers {
            let id = match index.get(c) {
                Some(&id) => id,
                None => {
                    let id = nodes.len();
                    if id >= limit {
                        return Err(Error::SizeLimit(limit));
                    }
                    nodes.push(c.clone());
                    index.insert(c.clone(), id);
                    queue.push_back(id);
                    id
                }
            };
            ids.push(id);
        }
        if succ.len() <= i {
            succ.resize(i + 1, Vec::new());
        }
        succ[i] = ids;
    }
    succ.resize(nodes.len(), Vec::new());

    // Longest-path levels via Kahn's algorithm on the cover DAG.
    let n = nodes.len();
    let mut indeg = vec![0usize; n];
    for s in &succ {
        for &j in s {
            indeg[j] += 1;
        }
    }
    let mut level = vec![0usize; n];
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    while let Some(i) = ready.pop() {
        for &j in &succ[i] {
            level[j] = level[j].max(level[i] + 1);
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(j);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| level[x].cmp(&level[y]).then_with(|| nodes[x].cmp(&nodes[y])));
    let mut pos = vec![0usize; n];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    let mut cover_edges: Vec<(usize, usize)> = succ
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
        .map(|(i, j)| (pos[i], pos[j]))
        .collect();
    cover_edges.sort_unstable();
    Ok(PosetSnapshot {
        root: a.clone(),
        elements: order.iter().map(|&i| nodes[i].clone()).collect(),
        cover_edges,
        levels: order.iter().map(|&i| level[i]).collect(),
    })
}

/// The unique minimal element of `S(a)`: peel off, from the residual weight,
/// the segment with the largest end reaching as far down as the support allows.
pub fn minimal_element(a: &Multisegment) -> Multisegment {
    let mut w = a.weight().0;
    let mut segs = Vec::new();
    while let Some((&e, _)) = w.iter().next_back() {
        let mut b = e;
        while w.get(&(b - 1)).copied().unwrap_or(0) > 0 {
            b -= 1;
        }
        for k in b..=e {
            let c = w.get_mut(&k).expect("inside support");
            *c -= 1;
            if *c == 0 {
                w.remove(&k);
            }
        }
        segs.push(Segment::new(b, e));
    }
    Multisegment::from_segments(segs)
}

/// `S(a)` as a plain list (root first), without the Hasse structure.
pub fn lower_set(a: &Multisegment) -> Result<Vec<Multisegment>> {
    Ok(generate_poset(a)?.elements)
}
