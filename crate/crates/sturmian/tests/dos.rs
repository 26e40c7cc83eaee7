//! Density-of-states masses and fiber sampling checked against eigenvalue
//! counts of periodic approximants and a brute-force continuation count.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rug::Rational;
use sturmian::cf::{q_of, Frequency};
use sturmian::coding::{enumerate_words, Start, Word};
use sturmian::dos::{
    dos_dimension_truncated, dos_mass, dos_masses_of_order, fiber_mass, periodic_eigenvalues,
    vartheta, FiberSampler, PeriodicApproximant,
};
use sturmian::spectrum::tree::build_band_tree;

/// Number of admissible continuations after a symbol of type `t` through
/// `levels`, ending in type 2 or 3 (depth-first search on the letter rules).
fn oracle_continuations(t: u8, levels: &[u32]) -> u64 {
    match levels.split_first() {
        None => u64::from(t != 1),
        Some((&n, rest)) => {
            let next: Vec<u8> = match t {
                1 => vec![2],
                2 => [vec![1; n as usize + 1], vec![3; n as usize]].concat(),
                3 => [vec![1; n as usize], vec![3; n as usize - 1]].concat(),
                _ => unreachable!(),
            };
            next.into_iter()
                .map(|s| oracle_continuations(s, rest))
                .sum()
        }
    }
}

#[test]
fn band_masses_equal_eigenvalue_fractions_of_deeper_approximants() {
    for (f, n, m) in [
        (Frequency::constant(1).unwrap(), 3, 6),
        (Frequency::periodic(vec![], vec![1, 2]).unwrap(), 2, 4),
        (Frequency::constant(3).unwrap(), 2, 2),
    ] {
        let lambda = 24.0;
        let tree = build_band_tree(&f, lambda, n).unwrap();
        let ev = periodic_eigenvalues(&f, lambda, n + m).unwrap();
        let q = q_of(&f.prefix(n + m).unwrap());
        assert_eq!(ev.len(), q);
        for b in tree.level(n) {
            let inside = ev
                .iter()
                .filter(|&&e| b.lo.to_f64() <= e && e <= b.hi.to_f64())
                .count();
            let mass = dos_mass(&f, &b.code, m).unwrap();
            assert_eq!(
                *mass.rational(),
                Rational::from((inside, q.to_u64().unwrap())),
                "{}",
                b.code
            );
        }
    }
}

#[test]
fn masses_of_an_order_sum_to_one_and_telescope() {
    let f = Frequency::periodic(vec![2], vec![1, 3]).unwrap();
    for n in 1..=4 {
        for m in 1..=4 {
            let total: Rational = dos_masses_of_order(&f, n, m)
                .unwrap()
                .iter()
                .map(|d| d.rational().clone())
                .sum();
            assert_eq!(total, 1, "n={n} m={m}");
        }
    }
    let digits = f.prefix(3).unwrap();
    for w in enumerate_words(Start::Boundary, &digits[..2], None, 1000).unwrap() {
        let parent = dos_mass(&f, &w, 3).unwrap();
        let children: Rational =
            enumerate_words(Start::Type(w.end_type().unwrap()), &digits[2..3], None, 100)
                .unwrap()
                .into_iter()
                .map(|tail| {
                    let mut c = w.clone();
                    c.letters.extend(tail.letters);
                    dos_mass(&f, &c, 2).unwrap().rational().clone()
                })
                .sum();
        assert_eq!(*parent.rational(), children, "{w}");
    }
}

#[test]
fn transition_weights_match_the_continuation_count() {
    let f = Frequency::periodic(vec![], vec![2, 1, 3]).unwrap();
    let m = 6;
    let s = FiberSampler::new(&f, 5, m, 1, 0).unwrap();
    let digits = f.prefix(5 + m).unwrap();
    let mut prefix = Word {
        boundary: None,
        letters: Vec::new(),
    };
    for j in 1..=5 {
        let tr = s.transition(&prefix).unwrap();
        let weights: Vec<u64> = tr
            .iter()
            .map(|(e, _)| oracle_continuations(e.band_type.number(), &digits[j..j + m - 1]))
            .collect();
        let total: u64 = weights.iter().sum();
        for ((_, p), w) in tr.iter().zip(&weights) {
            assert_eq!(*p, Rational::from((*w, total)));
        }
        prefix.letters.push(tr.last().unwrap().0);
    }
}

#[test]
fn sampled_fiber_words_follow_their_exact_masses() {
    let f = Frequency::periodic(vec![], vec![1, 2]).unwrap();
    let (depth, m, n) = (4, 8, 100_000u64);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for stream in 0..n {
        let w = FiberSampler::new(&f, depth, m, 3, stream)
            .unwrap()
            .sample(depth)
            .unwrap();
        *counts.entry(w.to_string()).or_default() += 1;
    }
    let words = enumerate_words(Start::Fiber, &f.prefix(depth).unwrap(), None, 10_000).unwrap();
    let mut total = Rational::new();
    for w in &words {
        let p = fiber_mass(&f, w, m).unwrap();
        total += &p;
        let p = p.to_f64();
        let got = *counts.get(&w.to_string()).unwrap_or(&0) as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((got - p).abs() <= 5.0 * sigma + 1e-12, "{w}: {got} vs {p}");
    }
    assert_eq!(total, 1);
    assert_eq!(counts.values().sum::<u64>(), n);
    assert!(counts
        .keys()
        .all(|k| words.iter().any(|w| &w.to_string() == k)));
}

#[test]
fn vartheta_spot_values() {
    let w: Word = "2.1@3-1.2@3-3.1@1-2.1@5".parse().unwrap();
    assert_eq!(vartheta(&w), vec![2.0, 1.0, 1.0, 4.0]);
}

#[test]
fn approximant_potential_and_inertia_count() {
    let f = Frequency::periodic(vec![], vec![1, 2]).unwrap();
    let a = PeriodicApproximant::new(&f, 24.0, 5).unwrap();
    assert_eq!(a.potential.len(), a.q);
    assert!(a.potential.iter().all(|&v| v == 0.0 || v == 24.0));
    let ev = a.eigenvalues();
    for &e in &[-3.0, -1.0, 0.0, 1.5, 22.5, 25.0, 30.0] {
        let want = ev.iter().filter(|&&x| x < e).count();
        assert_eq!(
            a.count_below(&rug::Float::with_val(128, e)).unwrap(),
            want,
            "E={e}"
        );
    }
}

#[test]
fn dimension_estimate_is_reproducible_and_validates_its_look_ahead() {
    let a = dos_dimension_truncated(24.0, 6, 6, 8, 5).unwrap();
    let b = dos_dimension_truncated(24.0, 6, 6, 8, 5).unwrap();
    assert_eq!(a.d_hat, b.d_hat);
    assert_eq!(a.table.len(), 8);
    assert!(dos_dimension_truncated(24.0, 6, 5, 8, 5).is_err());
    assert!(dos_dimension_truncated(4.5, 6, 6, 8, 5).is_err());
}

proptest! {
    #[test]
    fn transition_probabilities_sum_to_one(
        period in prop::collection::vec(1u32..5, 1..4),
        m in 6usize..10,
        choices in prop::collection::vec(0usize..100, 1..6),
    ) {
        let f = Frequency::periodic(vec![], period).unwrap();
        let s = FiberSampler::new(&f, choices.len() + 1, m, 0, 0).unwrap();
        let mut prefix = Word { boundary: None, letters: Vec::new() };
        for c in choices {
            let tr = s.transition(&prefix).unwrap();
            let total: Rational = tr.iter().map(|(_, p)| p.clone()).sum();
            prop_assert_eq!(total, 1);
            prop_assert!(tr.iter().all(|(_, p)| *p >= 0));
            prefix.letters.push(tr[c % tr.len()].0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inertia_count_is_exact_at_degenerate_energies(
        period in prop::collection::vec(1u32..4, 1..3),
        n in 1usize..6,
        lambda in prop_oneof![Just(5.0), Just(24.0)],
    ) {
        let f = Frequency::periodic(vec![], period).unwrap();
        let a = PeriodicApproximant::new(&f, lambda, n).unwrap();
        let ev = a.eigenvalues();
        // Integers near the potential values make leading pivots vanish exactly.
        for k in -3..=3 {
            for base in [0.0, lambda] {
                let e = base + f64::from(k);
                if ev.iter().any(|&x| (x - e).abs() < 1e-9) {
                    continue;
                }
                let want = ev.iter().filter(|&&x| x < e).count();
                prop_assert_eq!(a.count_below(&rug::Float::with_val(128, e)).unwrap(), want, "E={}", e);
            }
        }
    }
}
