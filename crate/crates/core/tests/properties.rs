//! Property tests for the invariants of the multisegment machinery.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use mseg::coxeter::{in_double_quotient, GeneratorSet};
use mseg::formulas::{derivative_closed_form, gamma_set, induce_segment, preceq_k, theta_table, DerivativePattern};
use mseg::kl::multiplicity;
use mseg::multiseg::{elementary_op, rank_invariant, Side};
use mseg::poset::{generate_poset, leq, lt, minimal_element};
use mseg::reduce::{
    in_s_a_k, psi_k, psi_k_inv, relation_type_equal, symmetrize, transport, truncate, xi_transport, TruncationStep,
};
use mseg::ring::{
    convert, decompose_product, derivative_of_standard, derivative_simple, derivative_standard, Basis, RingElement,
    Terms,
};
use mseg::{Multisegment, Segment};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn mseg_up_to(max_deg: u64) -> impl Strategy<Value = Multisegment> {
    prop::collection::vec((0i64..5, 0i64..3), 1..=4)
        .prop_map(|v| Multisegment::from_segments(v.into_iter().map(|(b, l)| Segment::new(b, b + l))))
        .prop_filter("degree bound", move |a| a.degree() <= max_deg)
}

/// `a` together with one of its end points.
fn with_end(max_deg: u64) -> impl Strategy<Value = (Multisegment, i64)> {
    mseg_up_to(max_deg).prop_flat_map(|a| {
        let ends: Vec<i64> = a.ends().into_keys().collect();
        (Just(a), prop::sample::select(ends))
    })
}

/// Every multisegment of the given weight, by peeling the segment through the
/// lowest point of the support.
fn all_with_weight(w: &BTreeMap<i64, u32>) -> BTreeSet<Multisegment> {
    let Some((&k, _)) = w.iter().next() else {
        return BTreeSet::from([Multisegment::empty()]);
    };
    let mut out = BTreeSet::new();
    let mut e = k;
    while w.get(&e).copied().unwrap_or(0) > 0 {
        let mut rest = w.clone();
        for i in k..=e {
            let c = rest.get_mut(&i).unwrap();
            *c -= 1;
            if *c == 0 {
                rest.remove(&i);
            }
        }
        for m in all_with_weight(&rest) {
            out.insert(m.with(Segment::new(k, e)));
        }
        e += 1;
    }
    out
}

fn lower(a: &Multisegment) -> Vec<Multisegment> {
    generate_poset(a).unwrap().elements
}

fn apply_all(x: &RingElement, steps: &[(i64, Side)]) -> Terms {
    let mut y = x.clone();
    for &(k, side) in steps {
        y = derivative_standard(&y, k, side).unwrap();
    }
    y.terms.into_iter().filter(|(_, c)| *c != 0).collect()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn text_round_trip(a in mseg_up_to(12)) {
        let back: Multisegment = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn elementary_operation_descends(a in mseg_up_to(10)) {
        for (d1, d2) in a.linked_pairs() {
            let c = elementary_op(&a, &d1, &d2).unwrap();
            prop_assert!(lt(&c, &a));
            prop_assert_eq!(c.weight(), a.weight());
            for (e, n) in c.ends() {
                prop_assert!(n <= a.end_count(e));
            }
            for (b, n) in c.begins() {
                prop_assert!(n <= a.begin_count(b));
            }
        }
    }

    #[test]
    fn diagonal_rank_is_weight(a in mseg_up_to(12)) {
        let (lo, hi) = a.weight().support().unwrap();
        for k in lo..=hi {
            prop_assert_eq!(rank_invariant(&a, k, k).unwrap(), a.weight().get(k) as u64);
        }
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn poset_is_the_rank_lower_set(a in mseg_up_to(7)) {
        let poset: BTreeSet<Multisegment> = lower(&a).into_iter().collect();
        let by_rank: BTreeSet<Multisegment> =
            all_with_weight(&a.weight().0).into_iter().filter(|c| leq(c, &a)).collect();
        prop_assert_eq!(&poset, &by_rank);
        let bottom = minimal_element(&a);
        prop_assert!(poset.contains(&bottom));
        prop_assert!(poset.iter().all(|c| leq(&bottom, c)));
    }

    #[test]
    fn levels_rise_along_covers(a in mseg_up_to(7)) {
        let p = generate_poset(&a).unwrap();
        for &(hi, lo) in &p.cover_edges {
            prop_assert!(p.levels[lo] > p.levels[hi]);
            prop_assert!(lt(&p.elements[lo], &p.elements[hi]));
        }
        for (i, b) in p.elements.iter().enumerate() {
            prop_assert_eq!(p.levels[i] >= 1, lt(b, &a));
        }
    }

    #[test]
    fn multiplicities_are_positive(a in mseg_up_to(6)) {
        prop_assert_eq!(multiplicity(&a, &a).unwrap(), 1);
        let p = generate_poset(&a).unwrap();
        for b in &p.elements {
            prop_assert!(multiplicity(b, &a).unwrap() >= 1);
        }
        for &(hi, lo) in &p.cover_edges {
            if hi == 0 {
                prop_assert_eq!(multiplicity(&p.elements[lo], &a).unwrap(), 1);
            }
        }
    }

    #[test]
    fn derivative_laws((a, k) in with_end(6)) {
        let d = derivative_simple(&a, k, Side::Right).unwrap();
        prop_assert!(d.values().all(|&n| n > 0));
        let top: Vec<(&Multisegment, &i64)> = d.iter().filter(|(b, _)| b.degree() == a.degree()).collect();
        prop_assert_eq!(top, vec![(&a, &1)]);
        let ak = truncate(&a, TruncationStep::right(k));
        let low: Vec<(&Multisegment, &i64)> = d.iter().filter(|(b, _)| b.degree() == ak.degree()).collect();
        if in_s_a_k(&a, &a, k) {
            prop_assert_eq!(low, vec![(&ak, &1)]);
            prop_assert!(d.keys().all(|b| b.degree() >= ak.degree()));
        } else {
            prop_assert!(low.is_empty());
        }
        let support: BTreeSet<&Multisegment> = d.keys().collect();
        let gamma = gamma_set(&a, k, None).unwrap();
        prop_assert!(support.iter().all(|b| gamma.contains(b)));
        let standard = RingElement::from_terms(Basis::Standard, derivative_of_standard(&a, k, Side::Right));
        let expanded = convert(&standard, Basis::Simple).unwrap().terms;
        prop_assert!(expanded.values().all(|&n| n > 0));
        prop_assert_eq!(expanded.into_keys().collect::<Vec<_>>(), gamma);
    }

    #[test]
    fn gamma_set_is_shaved_lower_set((a, k) in with_end(6)) {
        let mut brute = BTreeSet::new();
        for c in lower(&a) {
            brute.extend(DerivativePattern::new(&c, k).shaved(None));
        }
        prop_assert_eq!(brute.into_iter().collect::<Vec<_>>(), gamma_set(&a, k, None).unwrap());
    }

    #[test]
    fn preceq_k_is_a_partial_order((a, k) in with_end(5)) {
        let gamma = gamma_set(&a, k, None).unwrap();
        prop_assert!(preceq_k(&a, &a, k));
        prop_assert!(gamma.iter().all(|b| preceq_k(b, &a, k)));
        for b in &gamma {
            for c in &gamma {
                if b != c && preceq_k(b, c, k) {
                    prop_assert!(!preceq_k(c, b, k));
                }
                for d in &gamma {
                    if preceq_k(b, c, k) && preceq_k(c, d, k) {
                        prop_assert!(preceq_k(b, d, k), "{} {} {}", b, c, d);
                    }
                }
            }
        }
    }

    #[test]
    fn psi_k_is_an_order_isomorphism((a, k) in with_end(6)) {
        let domain: Vec<Multisegment> = lower(&a).into_iter().filter(|b| in_s_a_k(b, &a, k)).collect();
        let ak = truncate(&a, TruncationStep::right(k));
        let image: Vec<Multisegment> = domain.iter().map(|b| psi_k(b, &a, k).unwrap()).collect();
        let mut target = lower(&ak);
        target.sort();
        let mut sorted = image.clone();
        sorted.sort();
        prop_assert_eq!(&sorted, &target);
        for (b, d) in domain.iter().zip(&image) {
            prop_assert_eq!(&psi_k_inv(d, &a, k).unwrap(), b);
            for (c, e) in domain.iter().zip(&image) {
                prop_assert_eq!(leq(b, c), leq(d, e));
            }
        }
    }

    #[test]
    fn relation_type_survives_shift(a in mseg_up_to(6), t in -3i64..4) {
        let moved = a.shift(t);
        prop_assert!(relation_type_equal(&a, &moved));
        for b in lower(&a) {
            prop_assert_eq!(xi_transport(&b, &a, &moved).unwrap(), b.shift(t));
            prop_assert_eq!(multiplicity(&b, &a).unwrap(), multiplicity(&b.shift(t), &moved).unwrap());
        }
    }

    #[test]
    fn symmetrization_embeds_the_poset(a in mseg_up_to(6)) {
        let cert = symmetrize(&a).unwrap();
        prop_assert!(cert.sym.is_symmetric());
        let elems = lower(&a);
        let moved: Vec<Multisegment> = elems.iter().map(|b| transport(b, &cert).unwrap()).collect();
        prop_assert_eq!(moved.iter().collect::<BTreeSet<_>>().len(), elems.len());
        for (b, bs) in elems.iter().zip(&moved) {
            prop_assert!(leq(bs, &cert.sym));
            for (c, cs) in elems.iter().zip(&moved) {
                prop_assert_eq!(leq(b, c), leq(bs, cs));
            }
        }
    }

    #[test]
    fn derivatives_commute((a, j) in with_end(6), k in 0i64..7, left in any::<bool>()) {
        let x = RingElement::simple(a.clone());
        let side = if left { Side::Left } else { Side::Right };
        if left || (j - k).abs() != 1 {
            prop_assert_eq!(
                apply_all(&x, &[(j, Side::Right), (k, side)]),
                apply_all(&x, &[(k, side), (j, Side::Right)])
            );
        }
    }

    #[test]
    fn closed_forms_match_the_oracle((a, k) in with_end(5), left in any::<bool>(), b in (0i64..6, 0i64..2)) {
        let side = if left { Side::Left } else { Side::Right };
        let k = if left { a.min_begin().unwrap() } else { k };
        prop_assert_eq!(derivative_closed_form(&a, k, side).unwrap(), derivative_simple(&a, k, side).unwrap());
        let seg = Segment::new(b.0, b.0 + b.1);
        prop_assert_eq!(
            induce_segment(&a, &seg).unwrap(),
            decompose_product(&a, &Multisegment::from_segments([seg])).unwrap()
        );
    }
}

/// An identity model with distinct beginnings `0..n`, every end above every
/// beginning, and a chosen end `k` with nothing ending at `k+1`.
fn theta_model() -> impl Strategy<Value = (Multisegment, i64, usize)> {
    (2usize..=4)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0i64..3, n)))
        .prop_filter_map("needs an isolated end", |(n, offsets)| {
            let mut ends: Vec<i64> = offsets.iter().map(|o| n as i64 + o).collect();
            ends.sort_unstable();
            let k = *ends.iter().rev().find(|&&e| !ends.contains(&(e + 1)))?;
            let a = Multisegment::from_segments((0..n as i64).zip(ends).map(|(b, e)| Segment::new(b, e)));
            Some((a, k))
        })
        .prop_flat_map(|(a, k)| {
            let ell = a.end_count(k) as usize;
            (Just(a), Just(k), 0..=ell)
        })
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn theta_is_positive((a, k, r0) in theta_model()) {
        let table = theta_table(&a, k, r0).unwrap();
        let empty = GeneratorSet::empty(table.j.n());
        prop_assert!(table.entries.values().all(|th| th.has_nonnegative_coeffs()));
        for t in table.flats.values() {
            if in_double_quotient(t, &table.j, &empty) {
                let diag = table.entries.get(&(t.clone(), t.clone()));
                prop_assert!(diag.is_some_and(|th| th.is_one()), "θ({t:?},{t:?}) = {diag:?}");
            }
        }
    }
}
