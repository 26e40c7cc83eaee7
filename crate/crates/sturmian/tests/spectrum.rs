//! Trace polynomials, potentials, eigenvalues and band trees checked against
//! direct transfer-matrix products and characteristic polynomials.

use rug::Float;
use sturmian::cf::{golden_enclosure, q_of, ConvergentTable, Frequency, GaussSampler};
use sturmian::coding::{count_words, BandType, Start};
use sturmian::dos::periodic_eigenvalues;
use sturmian::spectrum::chebyshev::epsilon;
use sturmian::spectrum::tree::{build_band_tree, genpoly_value};
use sturmian::spectrum::{
    gaps_of_order, order_minus_one_gap, sturmian_sequence, traces, TransferState,
};

const PREC: u32 = 256;

fn fl(x: f64) -> Float {
    Float::with_val(PREC, x)
}

/// Potential of the rational rotation `p/q` at sites `1..=q`, decided with
/// integer arithmetic: `S_k = 1` iff `(k·p mod q) ≥ q − p`.
fn rational_potential(p: u64, q: u64) -> Vec<u8> {
    (1..=q).map(|k| u8::from((k * p) % q >= q - p)).collect()
}

/// Trace of the one-step transfer-matrix product over a period.
fn monodromy_trace(potential: &[u8], lambda: f64, e: f64) -> Float {
    let one = fl(1.0);
    let zero = fl(0.0);
    let mut m = [[one.clone(), zero.clone()], [zero, one]];
    for &s in potential {
        let d = fl(e) - fl(lambda * f64::from(s));
        // [[d, -1], [1, 0]] · m
        let r0 = [
            Float::with_val(PREC, &d * &m[0][0]) - &m[1][0],
            Float::with_val(PREC, &d * &m[0][1]) - &m[1][1],
        ];
        let r1 = [m[0][0].clone(), m[0][1].clone()];
        m = [r0, r1];
    }
    Float::with_val(PREC, &m[0][0] + &m[1][1])
}

#[test]
fn trace_recursion_matches_the_transfer_matrix_product() {
    for digits in [
        vec![1u32; 9],
        vec![2, 2, 2, 2, 2],
        vec![1, 2, 3, 1, 4],
        vec![5, 1, 2],
    ] {
        let t = ConvergentTable::from_digits(&digits);
        for n in 1..=digits.len() {
            let p = t.p(n as isize).to_u64().unwrap();
            let q = t.q(n as isize).to_u64().unwrap();
            let pot = rational_potential(p, q);
            for &lambda in &[5.0, 24.0] {
                for &e in &[-2.3, -0.7, 0.4, 1.9, lambda - 1.3, lambda + 0.6] {
                    let want = monodromy_trace(&pot, lambda, e);
                    let got = traces(&digits[..n], &fl(lambda), &fl(e)).x;
                    let err = Float::with_val(PREC, &got - &want).abs().to_f64();
                    let scale = want.to_f64().abs().max(1.0);
                    assert!(
                        err <= 1e-40 * scale,
                        "digits {digits:?} n={n} λ={lambda} E={e}: {got} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn initial_traces() {
    let (lam, e) = (fl(24.0), fl(3.25));
    let t = traces(&[], &lam, &e);
    assert_eq!(t.y, 2);
    assert_eq!(t.x, 3.25);
    assert_eq!(t.z, 3.25 - 24.0);
}

#[test]
fn matrix_state_matches_the_trace_recursion_and_keeps_the_invariant() {
    let digits = [1u32, 3, 1, 2, 4, 1, 1, 2];
    for &lambda in &[5.0, 24.0, 100.0] {
        for &e in &[-1.5, 0.25, lambda - 0.5, lambda + 1.75] {
            let (lam, en) = (fl(lambda), fl(e));
            let mut s = TransferState::initial(&lam, &en);
            for n in 0..digits.len() {
                let want = traces(&digits[..n], &lam, &en);
                let got = s.traces();
                for (a, b) in [(&got.x, &want.x), (&got.y, &want.y), (&got.z, &want.z)] {
                    let scale = b.to_f64().abs().max(1.0);
                    assert!(Float::with_val(PREC, a - b).abs().to_f64() <= 1e-40 * scale);
                }
                let fv = s.fricke_vogt();
                let target = s.fricke_vogt_target();
                // The invariant cancels terms of size |xyz|; allow that much rounding.
                let size = (got.x.to_f64() * got.y.to_f64() * got.z.to_f64())
                    .abs()
                    .max(lambda * lambda);
                assert!(
                    (fv.to_f64() - lambda * lambda / 4.0).abs() <= 1e-60 * size,
                    "n={n}"
                );
                assert_eq!(target.to_f64(), lambda * lambda / 4.0);
                s.advance(digits[n]);
            }
        }
    }
}

#[test]
fn golden_potential_follows_the_floor_formula() {
    let (alpha, _) = golden_enclosure(PREC);
    let seq = sturmian_sequence(&Frequency::constant(1).unwrap(), 3000).unwrap();
    assert_eq!(&seq[..3], &[1, 0, 1]);
    for (i, &s) in seq.iter().enumerate() {
        let k = i as u32 + 1;
        let a = Float::with_val(PREC, &alpha * (k + 1))
            .floor()
            .to_integer()
            .unwrap();
        let b = Float::with_val(PREC, &alpha * k)
            .floor()
            .to_integer()
            .unwrap();
        assert_eq!(a - b, s, "site {k}");
    }
}

#[test]
fn sampled_potential_follows_the_floor_formula() {
    for stream in 0..6 {
        let s = GaussSampler::new(2, stream);
        let f = s.sample(60).unwrap();
        let (alpha, _) = sturmian::cf::gauss_alpha_enclosure(s.draw(), 512);
        let seq = sturmian_sequence(&f, 400).unwrap();
        for (i, &v) in seq.iter().enumerate() {
            let k = i as u32 + 1;
            let a = Float::with_val(512, &alpha * (k + 1))
                .floor()
                .to_integer()
                .unwrap();
            let b = Float::with_val(512, &alpha * k)
                .floor()
                .to_integer()
                .unwrap();
            assert_eq!(a - b, v, "stream {stream} site {k}");
        }
    }
}

#[test]
fn rational_and_irrational_potentials_agree_before_the_period() {
    let f = Frequency::periodic(vec![2, 1], vec![3]).unwrap();
    let t = ConvergentTable::from_digits(&f.prefix(6).unwrap());
    let (p, q) = (t.p(6).to_u64().unwrap(), t.q(6).to_u64().unwrap());
    let seq = sturmian_sequence(&f, q - 1).unwrap();
    assert_eq!(seq, rational_potential(p, q)[..(q - 1) as usize].to_vec());
}

/// Roots of `det(H − E)` for `H` the 3×3 periodic matrix with diagonal `v`
/// and all couplings 1, by bisection on sign changes.
fn cubic_roots(v: [f64; 3]) -> Vec<f64> {
    let p = |e: f64| {
        let (a, b, c) = (v[0] - e, v[1] - e, v[2] - e);
        a * b * c - a - b - c + 2.0
    };
    let mut roots = Vec::new();
    let (lo, hi) = (-10.0, 40.0);
    let steps = 50_000;
    let h = (hi - lo) / steps as f64;
    for i in 0..steps {
        let (mut a, mut b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
        if p(a) == 0.0 {
            roots.push(a);
            continue;
        }
        if p(a).signum() != p(b).signum() {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if p(a).signum() == p(m).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
}

#[test]
fn smallest_golden_approximant_matches_its_characteristic_polynomial() {
    let golden = Frequency::constant(1).unwrap();
    assert_eq!(q_of(&golden.prefix(3).unwrap()), 3);
    for &lambda in &[5.0, 24.0] {
        let want = cubic_roots([lambda, 0.0, lambda]);
        assert_eq!(want.len(), 3);
        let got = periodic_eigenvalues(&golden, lambda, 3).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{got:?} vs {want:?}");
            // Periodic eigenvalues are where the period trace equals 2.
            let x = traces(&[1, 1, 1], &fl(lambda), &fl(*a)).x.to_f64();
            assert!((x - 2.0).abs() < 1e-8, "trace {x} at {a}");
        }
    }
}

#[test]
fn chebyshev_margins() {
    assert!((epsilon(5, 1) - 1.1 / 19.6).abs() < 1e-15);
    for p in 1..=4 {
        for l in 1..p {
            assert!(epsilon(p, l) > 0.0);
        }
    }
}

#[test]
fn band_endpoints_are_level_crossings_and_interiors_are_inside() {
    for (f, depth) in [
        (Frequency::constant(1).unwrap(), 7),
        (Frequency::constant(2).unwrap(), 4),
        (Frequency::periodic(vec![], vec![1, 2]).unwrap(), 5),
    ] {
        let tree = build_band_tree(&f, 24.0, depth).unwrap();
        for n in 1..=depth {
            for b in tree.level(n) {
                assert!(b.certified);
                for e in [&b.lo, &b.hi] {
                    let v = genpoly_value(&tree.digits, 24.0, b, e).to_f64();
                    assert!((v.abs() - 2.0).abs() < 1e-6, "{} at endpoint: {v}", b.code);
                }
                let mid = genpoly_value(&tree.digits, 24.0, b, &b.midpoint()).to_f64();
                assert!(mid.abs() < 2.0, "{} at midpoint: {mid}", b.code);
            }
        }
    }
}

#[test]
fn band_counts_nesting_and_disjointness() {
    let f = Frequency::periodic(vec![], vec![1, 2]).unwrap();
    let tree = build_band_tree(&f, 24.0, 6).unwrap();
    assert_eq!(tree.level(0).len(), 2);
    for n in 1..=6 {
        let level = tree.level(n);
        assert_eq!(
            count_words(Start::Boundary, &tree.digits[..n], None),
            level.len()
        );
        let mut sorted: Vec<_> = level.iter().collect();
        sorted.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        for w in sorted.windows(2) {
            assert!(w[0].hi < w[1].lo, "{} overlaps {}", w[0].code, w[1].code);
        }
        for b in level {
            let parent = &tree.level(n - 1)[b.parent.unwrap()];
            assert!(parent.lo <= b.lo && b.hi <= parent.hi);
            assert_eq!(b.code.truncated(n - 1), parent.code);
        }
    }
}

#[test]
fn type_two_child_of_a_unit_digit_keeps_the_parent_length() {
    // With a₁ = 1 the single child of [λ−2, λ+2] is the whole band, so the
    // uniform bound 2^{2−n} on |B| fails at n = 1 …
    let tree = build_band_tree(&Frequency::constant(1).unwrap(), 24.0, 8).unwrap();
    let b = tree.find(&"B1-2.1@1".parse().unwrap()).unwrap();
    assert!((b.length().to_f64() - 4.0).abs() < 1e-12);
    assert!(b.log_len > (2.0f64 - 1.0) * 2f64.ln());
    // … while 2^{2−n+r}, r counting type-2 letters at level 1, holds everywhere.
    for n in 0..=8 {
        for b in tree.level(n) {
            let r = b
                .code
                .letters
                .iter()
                .filter(|l| l.band_type == BandType::Two && l.level == 1)
                .count();
            let bound = (2.0 - n as f64 + r as f64) * 2f64.ln();
            assert!(b.log_len <= bound + 1e-12, "{}", b.code);
        }
    }
}

#[test]
fn gaps_separate_siblings_inside_their_parent() {
    let f = Frequency::constant(2).unwrap();
    let tree = build_band_tree(&f, 24.0, 4).unwrap();
    let g = order_minus_one_gap(&tree);
    assert_eq!(g.lo, 2);
    assert_eq!(g.hi, 22);
    for n in 0..4 {
        for gap in gaps_of_order(&tree, n).unwrap() {
            assert!(gap.lo < gap.hi);
            assert!(gap.ratio() > 0.0 && gap.ratio() < 1.0);
            for b in tree.level(n + 1) {
                assert!(b.hi <= gap.lo || b.lo >= gap.hi, "{} meets a gap", b.code);
            }
        }
    }
}
