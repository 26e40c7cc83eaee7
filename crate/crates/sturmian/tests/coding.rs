//! Word counting and enumeration checked against a brute-force string oracle.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rug::Integer;
use sturmian::cf::q_of;
use sturmian::coding::{
    a_hat, a_hat_product, alphabet, child_count, children_in_order, count_words, enumerate_words,
    iota_lift, iota_unlift, pick_weighted, BandType, Letter, Start, Word,
};

/// Brute-force successor rule written from the alphabet description:
/// letters are `(type, index)` pairs, types 1..3.
fn oracle_successors(prev: Option<u8>, n: u32) -> Vec<(u8, u32)> {
    match prev {
        None => {
            let mut v: Vec<(u8, u32)> = (1..=n + 1).map(|k| (1, k)).collect();
            v.push((2, 1));
            v.extend((1..=n).map(|k| (3, k)));
            v
        }
        Some(1) => vec![(2, 1)],
        Some(2) => (1..=n + 1)
            .map(|k| (1, k))
            .chain((1..=n).map(|k| (3, k)))
            .collect(),
        Some(3) => (1..=n)
            .map(|k| (1, k))
            .chain((1..n).map(|k| (3, k)))
            .collect(),
        _ => unreachable!(),
    }
}

/// All words as strings `B.-t.k@n-...`, generated by depth-first search.
fn oracle_words(start: Start, levels: &[u32], end: Option<u8>) -> BTreeSet<String> {
    fn go(
        prefix: String,
        last: Option<u8>,
        levels: &[u32],
        end: Option<u8>,
        out: &mut BTreeSet<String>,
    ) {
        match levels.split_first() {
            None => {
                if end.is_none() || end == last {
                    out.insert(prefix);
                }
            }
            Some((&n, rest)) => {
                for (t, k) in oracle_successors(last, n) {
                    let s = if prefix.is_empty() {
                        format!("{t}.{k}@{n}")
                    } else {
                        format!("{prefix}-{t}.{k}@{n}")
                    };
                    go(s, Some(t), rest, end, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    match start {
        Start::Boundary => {
            go("B1".into(), Some(1), levels, end, &mut out);
            go("B3".into(), Some(3), levels, end, &mut out);
        }
        Start::Type(t) => go(String::new(), Some(t.number()), levels, end, &mut out),
        Start::Fiber => go(String::new(), None, levels, end, &mut out),
    }
    out
}

fn all_level_strings(len: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=max).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

fn starts() -> Vec<Start> {
    vec![
        Start::Boundary,
        Start::Fiber,
        Start::Type(BandType::One),
        Start::Type(BandType::Two),
        Start::Type(BandType::Three),
    ]
}

#[test]
fn counts_and_enumerations_match_the_brute_force_oracle() {
    let filters = [
        None,
        Some(BandType::One),
        Some(BandType::Two),
        Some(BandType::Three),
    ];
    for len in 1..=4 {
        for levels in all_level_strings(len, 4) {
            for start in starts() {
                for filter in filters {
                    let want = oracle_words(start, &levels, filter.map(|t| t.number()));
                    let got = count_words(start, &levels, filter);
                    assert_eq!(got, want.len(), "{start:?} {levels:?} {filter:?}");
                    let words: BTreeSet<String> = enumerate_words(start, &levels, filter, 1 << 20)
                        .unwrap()
                        .iter()
                        .map(|w| w.to_string())
                        .collect();
                    assert_eq!(words, want, "{start:?} {levels:?} {filter:?}");
                }
            }
        }
    }
}

#[test]
fn small_coding_spaces() {
    let words: Vec<String> = enumerate_words(Start::Boundary, &[1], None, 100)
        .unwrap()
        .iter()
        .map(|w| w.to_string())
        .collect();
    assert_eq!(words, ["B1-2.1@1", "B3-1.1@1"]);
    assert_eq!(count_words(Start::Type(BandType::Two), &[1], None), 3);
    assert_eq!(count_words(Start::Boundary, &[2], None), 4);
}

#[test]
fn count_matrix_entries() {
    for k in 1..8u32 {
        let m = a_hat(k);
        let want = [[0, 1, 0], [k + 1, 0, k], [k, 0, k - 1]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i][j], want[i][j], "k={k} ({i},{j})");
            }
        }
    }
    // Row sums are the child counts.
    for t in BandType::ALL {
        for a in 1..6 {
            assert_eq!(children_in_order(t, a).len(), child_count(t, a));
            for e in children_in_order(t, a) {
                assert!(sturmian::coding::admissible(t, &e));
            }
        }
    }
}

#[test]
fn enumeration_cap_reports_the_count() {
    let err = enumerate_words(Start::Boundary, &[3, 3, 3, 3, 3, 3], None, 10).unwrap_err();
    assert!(err
        .to_string()
        .contains(&count_words(Start::Boundary, &[3; 6], None).to_string()));
}

#[test]
fn iota_lift_is_a_bijection_onto_coded_bands() {
    let a = [2u32, 3];
    let lifted_levels = [1u32, 2, 3];
    let fiber = enumerate_words(Start::Fiber, &a, None, 1000).unwrap();
    let coded: BTreeSet<String> = enumerate_words(Start::Boundary, &lifted_levels, None, 1000)
        .unwrap()
        .iter()
        .map(|w| w.to_string())
        .collect();
    assert_eq!(fiber.len(), coded.len());
    let images: BTreeSet<String> = fiber
        .iter()
        .map(|w| {
            let l = iota_lift(w).unwrap();
            assert!(l.is_admissible());
            assert_eq!(&iota_unlift(&l).unwrap(), w);
            l.to_string()
        })
        .collect();
    assert_eq!(images, coded);
}

#[test]
fn weighted_choice_follows_the_weights() {
    let weights = [Integer::from(1), Integer::from(3), Integer::from(6)];
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let n = 60_000;
    let mut c = [0usize; 3];
    for _ in 0..n {
        c[pick_weighted(&weights, &mut rng)] += 1;
    }
    for (i, p) in [0.1, 0.3, 0.6].iter().enumerate() {
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((c[i] as f64 / n as f64 - p).abs() < 4.0 * sigma);
    }
}

fn letter_strategy() -> impl Strategy<Value = Letter> {
    (1u32..6).prop_flat_map(|level| {
        let alpha = alphabet(level);
        (0..alpha.len()).prop_map(move |i| alpha[i])
    })
}

proptest! {
    #[test]
    fn word_text_round_trips(
        boundary in prop::option::of(prop_oneof![Just(BandType::One), Just(BandType::Three)]),
        letters in prop::collection::vec(letter_strategy(), 1..8),
    ) {
        let w = Word { boundary, letters };
        let back: Word = w.to_string().parse().unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn coding_space_size_is_comparable_to_the_denominator(levels in prop::collection::vec(1u32..8, 1..20)) {
        let count = count_words(Start::Boundary, &levels, None);
        let q = q_of(&levels);
        prop_assert!(q <= count);
        prop_assert!(count <= Integer::from(&q * 5u32));
    }

    #[test]
    fn product_matrix_counts_descendants(levels in prop::collection::vec(1u32..6, 1..10)) {
        let m = a_hat_product(&levels);
        for t in BandType::ALL {
            let row: Integer = m[t.number() as usize - 1].iter().sum();
            prop_assert_eq!(row, count_words(Start::Type(t), &levels, None));
        }
    }

    #[test]
    fn level_words_are_admissible(levels in prop::collection::vec(1u32..4, 1..6)) {
        for w in enumerate_words(Start::Boundary, &levels, None, 1 << 16).unwrap() {
            prop_assert!(w.is_admissible());
            prop_assert!(w.matches_levels(&levels));
        }
    }
}
