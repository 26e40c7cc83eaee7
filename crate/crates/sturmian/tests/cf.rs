//! Continued fractions checked against independent big-integer and MPFR oracles.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rug::float::Round;
use rug::{Float, Integer};
use sturmian::cf::{
    cf_expand, cf_expand_enclosure, cf_expand_with, convergents, gauss_alpha_enclosure,
    golden_enclosure, levy_khinchin_estimate, q_of, ConvergentTable, Frequency, GaussSampler,
};

/// Convergent recursion on `num-bigint`, returning `(p, q)` for indices −1..=n.
fn oracle_convergents(digits: &[u32]) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut p = vec![BigInt::one(), BigInt::zero()];
    let mut q = vec![BigInt::zero(), BigInt::one()];
    for &a in digits {
        let k = p.len();
        p.push(BigInt::from(a) * &p[k - 1] + &p[k - 2]);
        q.push(BigInt::from(a) * &q[k - 1] + &q[k - 2]);
    }
    (p, q)
}

fn big(x: &Integer) -> BigInt {
    x.to_string().parse().unwrap()
}

fn gcd(mut a: BigInt, mut b: BigInt) -> BigInt {
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a.abs()
}

/// Euclid's algorithm on an exact rational `num/den ∈ (0,1)`.
fn oracle_euclid(mut num: BigInt, mut den: BigInt, n: usize) -> Vec<u32> {
    let mut out = Vec::new();
    while out.len() < n && !num.is_zero() {
        let a = &den / &num;
        let r = &den % &num;
        out.push(a.try_into().unwrap());
        den = num;
        num = r;
    }
    out
}

/// The exact dyadic value of a finite float as `(numerator, denominator)`.
fn dyadic(x: &Float) -> (BigInt, BigInt) {
    let (m, e) = x.to_integer_exp().unwrap();
    assert!(e < 0);
    (big(&m), BigInt::one() << ((-e) as usize))
}

#[test]
fn convergents_of_small_examples() {
    let t = ConvergentTable::from_digits(&[1, 1, 1, 1, 1]);
    let q: Vec<String> = t.q_all().iter().map(|x| x.to_string()).collect();
    assert_eq!(q, ["0", "1", "1", "2", "3", "5", "8"]);
    let t = ConvergentTable::from_digits(&[2, 2, 2]);
    let q: Vec<String> = t.q_all().iter().map(|x| x.to_string()).collect();
    assert_eq!(q, ["0", "1", "2", "5", "12"]);
    let t = ConvergentTable::from_digits(&[1, 2, 3]);
    assert_eq!(*t.q(3), 10);
    assert_eq!(*t.p(3), 7);
    assert_eq!(q_of(&[1, 2, 3]), 10);
}

#[test]
fn convergents_of_a_frequency_match_its_digits() {
    let f = Frequency::periodic(vec![5], vec![1, 2]).unwrap();
    let t = convergents(&f, 6).unwrap();
    let (p, q) = oracle_convergents(&[5, 1, 2, 1, 2, 1]);
    for i in -1..=6isize {
        assert_eq!(big(t.p(i)), p[(i + 1) as usize]);
        assert_eq!(big(t.q(i)), q[(i + 1) as usize]);
    }
}

proptest! {
    #[test]
    fn convergents_match_bigint_oracle(digits in prop::collection::vec(1u32..60, 1..40)) {
        let t = ConvergentTable::from_digits(&digits);
        let (p, q) = oracle_convergents(&digits);
        for i in 0..=digits.len() {
            let ii = i as isize;
            prop_assert_eq!(big(t.p(ii)), p[i + 1].clone());
            prop_assert_eq!(big(t.q(ii)), q[i + 1].clone());
            // p_i q_{i−1} − p_{i−1} q_i = (−1)^{i+1}
            let det = big(t.p(ii)) * big(t.q(ii - 1)) - big(t.p(ii - 1)) * big(t.q(ii));
            let sign = if i % 2 == 0 { -1 } else { 1 };
            prop_assert_eq!(det, BigInt::from(sign));
            prop_assert!(gcd(big(t.p(ii)), big(t.q(ii))).is_one());
        }
    }

    #[test]
    fn denominators_are_sub_and_super_multiplicative(
        digits in prop::collection::vec(1u32..20, 2..31),
        split in 1usize..30,
    ) {
        let n = split.min(digits.len() - 1).min(15);
        let m = (digits.len() - n).min(15);
        let digits = &digits[..n + m];
        let qn = big(&q_of(&digits[..n]));
        let qm = big(&q_of(&digits[n..]));
        let qnm = big(&q_of(digits));
        prop_assert!(&qn * &qm <= qnm);
        prop_assert!(qnm <= BigInt::from(2) * qn * qm);
    }

    #[test]
    fn expansion_of_dyadic_rationals_follows_euclid(num in 1u64..u64::MAX, bits in 64u32..70) {
        let x = Float::with_val(bits + 8, num) >> bits;
        let (n, d) = dyadic(&x);
        let want = oracle_euclid(n, d, 200);
        // The last Euclid quotient closes the expansion and is never certified.
        let k = want.len() - 1;
        prop_assert_eq!(cf_expand(&x, k).unwrap(), want[..k].to_vec());
        prop_assert!(cf_expand(&x, k + 1).is_err());
    }

    #[test]
    fn json_round_trip_preserves_frequencies(
        prefix in prop::collection::vec(1u32..9, 0..5),
        period in prop::collection::vec(1u32..9, 1..4),
    ) {
        let f = Frequency::periodic(prefix, period).unwrap();
        let g = Frequency::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(f.prefix(30).unwrap(), g.prefix(30).unwrap());
    }
}

#[test]
fn quadratic_irrationals_have_periodic_expansions() {
    let sqrt2_minus_1 = |prec: u32| {
        let mut lo = Float::with_val(prec, 2);
        let mut hi = Float::with_val(prec, 2);
        lo.sqrt_round(Round::Down);
        hi.sqrt_round(Round::Up);
        (lo - 1u32, hi - 1u32)
    };
    let (d, _) = cf_expand_with(sqrt2_minus_1, 120).unwrap();
    assert!(d.iter().all(|&a| a == 2));
    let (d, _) = cf_expand_with(golden_enclosure, 120).unwrap();
    assert!(d.iter().all(|&a| a == 1));
}

#[test]
fn e_minus_two_has_the_arithmetic_pattern() {
    let e_minus_2 = |prec: u32| {
        let one = Float::with_val(prec, 1);
        let mut lo = one.clone();
        let mut hi = one;
        lo.exp_round(Round::Down);
        hi.exp_round(Round::Up);
        (lo - 2u32, hi - 2u32)
    };
    let (d, _) = cf_expand_with(e_minus_2, 60).unwrap();
    let want: Vec<u32> = (0..60)
        .map(|i| {
            if i % 3 == 1 {
                2 * (i as u32 / 3 + 1)
            } else {
                1
            }
        })
        .collect();
    assert_eq!(d, want);
}

#[test]
fn sampled_digits_agree_with_a_fourfold_precision_oracle() {
    for stream in 0..24 {
        let s = GaussSampler::new(11, stream);
        let f = s.sample(25).unwrap();
        let (lo, hi) = gauss_alpha_enclosure(s.draw(), 4 * f.precision_bits());
        let (ln, ld) = dyadic(&lo);
        let (hn, hd) = dyadic(&hi);
        let a = oracle_euclid(ln, ld, 25);
        let b = oracle_euclid(hn, hd, 25);
        assert_eq!(a, b, "oracle enclosure too wide for stream {stream}");
        assert_eq!(f.prefix(25).unwrap(), a, "stream {stream}");
    }
}

#[test]
fn enclosure_expansion_round_trips_through_the_completion() {
    let f = Frequency::periodic(vec![3, 1, 4], vec![1, 5]).unwrap();
    let (lo, hi) = f.completion_enclosure(20, 256).unwrap();
    let lo = Float::with_val(256, &lo);
    let hi = Float::with_val(256, &hi);
    let d = cf_expand_enclosure(&lo, &hi, 20).unwrap();
    assert_eq!(d, f.prefix(20).unwrap());
}

#[test]
fn sampler_is_deterministic_and_stream_separated() {
    let a = GaussSampler::new(7, 3).sample(30).unwrap();
    let b = GaussSampler::new(7, 3).sample(30).unwrap();
    let c = GaussSampler::new(7, 4).sample(30).unwrap();
    assert_eq!(a.prefix(30).unwrap(), b.prefix(30).unwrap());
    assert_ne!(a.prefix(30).unwrap(), c.prefix(30).unwrap());
    let g = Frequency::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(g.prefix(30).unwrap(), a.prefix(30).unwrap());
}

#[test]
fn first_digit_follows_the_gauss_measure() {
    let n = 20_000u64;
    let mut counts = [0u64; 6];
    for stream in 0..n {
        let a = GaussSampler::new(5, stream)
            .sample(1)
            .unwrap()
            .prefix(1)
            .unwrap()[0];
        if a <= 5 {
            counts[a as usize] += 1;
        }
    }
    for k in 1..=5u32 {
        let k = f64::from(k);
        let p = ((k + 1.0) * (k + 1.0) / (k * (k + 2.0))).log2();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let got = counts[k as usize] as f64 / n as f64;
        assert!((got - p).abs() <= 4.0 * sigma, "digit {k}: {got} vs {p}");
    }
}

#[test]
fn golden_denominators_grow_at_the_golden_rate() {
    let f = Frequency::constant(1).unwrap();
    let q = q_of(&f.prefix(200).unwrap());
    let rate = sturmian::cf::ln_integer(&q) / 200.0;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((rate - phi.ln()).abs() < 5e-3, "{rate}");
}

#[test]
fn levy_estimate_is_reproducible() {
    let a = levy_khinchin_estimate(3, 50, 40).unwrap();
    let b = levy_khinchin_estimate(3, 50, 40).unwrap();
    assert_eq!(a.gamma, b.gamma);
    assert_eq!(a.kappa, b.kappa);
    assert!(a.gamma > 0.0 && a.kappa > 1.0);
}
