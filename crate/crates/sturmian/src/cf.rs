//! Continued fractions, convergents and Gauss-measure sampling.
//!
//! A frequency `α = [a₁, a₂, …] ∈ (0,1)` is handled through its digit
//! stream.  Digits are always *certified*: they are extracted from an
//! enclosure `[lo, hi]` of the real number with exact integer arithmetic, and
//! a digit is only emitted when every real in the enclosure shares it.
//!
//! Gauss-typical frequencies are produced by the exact inverse CDF of the
//! Gauss measure, `α = 2^U − 1` with `U` uniform, where `U` is an exactly
//! representable dyadic number drawn from a seeded ChaCha stream.

use std::f64::consts::{LN_2, PI};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use rug::float::Round;
use rug::ops::{AddAssignRound, SubAssignRound};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lévy's constant `π² / (12 log 2)`: the almost-sure growth rate of
/// `log q_n / n`.
pub const LEVY: f64 = PI * PI / (12.0 * LN_2);

/// Khinchin's constant: the almost-sure geometric mean of the digits.
pub const KHINCHIN: f64 = 2.685_452_001_065_306;

/// Natural logarithm of a (positive) big integer as an `f64`.
pub fn ln_integer(x: &Integer) -> f64 {
    let (m, e) = x.to_f64_exp();
    m.ln() + f64::from(e) * LN_2
}

/// Where the digits of a [`Frequency`] come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencySource {
    /// A finite, user-supplied digit list.
    Explicit,
    /// A prefix followed by an infinitely repeated block.
    Periodic,
    /// A Gauss-measure sample `α = 2^U − 1`, `U = (2k+1)/2^65`.
    Sampled {
        /// Seed of the ChaCha stream.
        seed: u64,
        /// Stream identifier.
        stream_id: u64,
        /// The 64-bit draw `k` defining `U`.
        draw: u64,
    },
}

/// A frequency given by (a prefix of) its continued-fraction digits.
///
/// Digits are 1-indexed as in `α = [a₁, a₂, …]`.  Periodic frequencies are
/// stored symbolically and have unlimited depth; sampled frequencies can be
/// re-expanded to any depth from their defining draw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frequency {
    digits: Vec<u32>,
    periodic_tail: Option<Vec<u32>>,
    source: FrequencySource,
    precision_bits: u32,
}

#[derive(Serialize, Deserialize)]
struct FrequencyJson {
    digits: Vec<u32>,
    periodic_tail: Option<Vec<u32>>,
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stream_id: Option<u64>,
}

fn check_digits(d: &[u32]) -> Result<()> {
    if d.contains(&0) {
        return Err(Error::Domain(
            "continued-fraction digits must be >= 1".into(),
        ));
    }
    Ok(())
}

impl Frequency {
    /// A finite explicit digit list.
    pub fn explicit(digits: Vec<u32>) -> Result<Self> {
        check_digits(&digits)?;
        if digits.is_empty() {
            return Err(Error::Domain(
                "explicit frequency needs at least one digit".into(),
            ));
        }
        Ok(Self {
            digits,
            periodic_tail: None,
            source: FrequencySource::Explicit,
            precision_bits: 0,
        })
    }

    /// `prefix` followed by `period` repeated forever.
    pub fn periodic(prefix: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        check_digits(&prefix)?;
        check_digits(&period)?;
        if period.is_empty() {
            return Err(Error::Domain("periodic block must be non-empty".into()));
        }
        Ok(Self {
            digits: prefix,
            periodic_tail: Some(period),
            source: FrequencySource::Periodic,
            precision_bits: 0,
        })
    }

    /// The constant frequency `[k, k, k, …]` (`k = 1` is the golden mean).
    pub fn constant(k: u32) -> Result<Self> {
        Self::periodic(Vec::new(), vec![k])
    }

    /// Where the digits come from.
    pub fn source(&self) -> &FrequencySource {
        &self.source
    }

    /// Working precision used when the digits were extracted (0 if exact).
    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Stored (non-periodic) digit prefix.
    pub fn stored_digits(&self) -> &[u32] {
        &self.digits
    }

    /// The repeated block, if any.
    pub fn periodic_tail(&self) -> Option<&[u32]> {
        self.periodic_tail.as_deref()
    }

    /// Number of digits available, or `None` when unlimited.
    pub fn known_depth(&self) -> Option<usize> {
        match self.periodic_tail {
            Some(_) => None,
            None => Some(self.digits.len()),
        }
    }

    /// Digit `a_i` (1-indexed), if available.
    pub fn digit(&self, i: usize) -> Option<u32> {
        if i == 0 {
            return None;
        }
        if i <= self.digits.len() {
            return Some(self.digits[i - 1]);
        }
        self.periodic_tail
            .as_ref()
            .map(|t| t[(i - 1 - self.digits.len()) % t.len()])
    }

    /// The prefix `a|_n = (a₁, …, a_n)`.
    pub fn prefix(&self, n: usize) -> Result<Vec<u32>> {
        (1..=n)
            .map(|i| {
                self.digit(i).ok_or(Error::InsufficientDigits {
                    available: self.digits.len(),
                    requested: n,
                })
            })
            .collect()
    }

    /// The shifted frequency `S^n a = (a_{n+1}, a_{n+2}, …)`.
    ///
    /// The result is stored as explicit/periodic digits (a shifted sample
    /// loses its defining draw).
    pub fn shift(&self, n: usize) -> Result<Self> {
        match &self.periodic_tail {
            Some(t) => {
                if n <= self.digits.len() {
                    Self::periodic(self.digits[n..].to_vec(), t.clone())
                } else {
                    let r = (n - self.digits.len()) % t.len();
                    let mut p = t[r..].to_vec();
                    p.extend_from_slice(&t[..r]);
                    Self::periodic(Vec::new(), p)
                }
            }
            None => {
                if n >= self.digits.len() {
                    return Err(Error::InsufficientDigits {
                        available: self.digits.len(),
                        requested: n + 1,
                    });
                }
                Self::explicit(self.digits[n..].to_vec())
            }
        }
    }

    /// The frequency `ǎ = 1a` obtained by prepending the digit 1.
    pub fn prepend_one(&self) -> Self {
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.push(1);
        digits.extend_from_slice(&self.digits);
        let source = match self.source {
            FrequencySource::Periodic => FrequencySource::Periodic,
            _ => FrequencySource::Explicit,
        };
        Self {
            digits,
            periodic_tail: self.periodic_tail.clone(),
            source,
            precision_bits: self.precision_bits,
        }
    }

    /// Make sure at least `n` digits are available, re-expanding a sampled
    /// frequency from its draw if necessary.
    pub fn extended(&self, n: usize) -> Result<Self> {
        match (self.known_depth(), &self.source) {
            (None, _) => Ok(self.clone()),
            (Some(k), _) if k >= n => Ok(self.clone()),
            (
                Some(_),
                FrequencySource::Sampled {
                    seed,
                    stream_id,
                    draw,
                },
            ) => sample_from_draw(*seed, *stream_id, *draw, n),
            (Some(k), _) => Err(Error::InsufficientDigits {
                available: k,
                requested: n,
            }),
        }
    }

    /// An exact rational enclosure `[A, B]` of a real number whose first
    /// `depth` digits are `a|_depth`, of width at most `2^{-bits}`.
    ///
    /// The real is `[a₁,…,a_depth, 1, 1, 1, …]`; by prefix-determinacy of
    /// the Sturmian sequence it may stand in for any frequency with that
    /// prefix.
    pub fn completion_enclosure(&self, depth: usize, bits: u32) -> Result<(Rational, Rational)> {
        let pre = self.prefix(depth)?;
        let tbl = ConvergentTable::from_digits(&pre);
        let (pn, pm) = (tbl.p(depth as isize), tbl.p(depth as isize - 1));
        let (qn, qm) = (tbl.q(depth as isize), tbl.q(depth as isize - 1));
        // Tail value g = (√5−1)/2 lies between consecutive Fibonacci ratios.
        let target = Integer::from(1) << (bits + 4);
        let (mut f0, mut f1) = (Integer::from(1), Integer::from(1));
        while Integer::from(&f0 * &f1) <= target {
            let f2 = Integer::from(&f0 + &f1);
            f0 = f1;
            f1 = f2;
        }
        let f2 = Integer::from(&f0 + &f1);
        let g1 = Rational::from((f0.clone(), f1.clone()));
        let g2 = Rational::from((f1, f2));
        let mobius = |t: &Rational| {
            let num = Rational::from(pn) + (t * Rational::from(pm));
            let den = Rational::from(qn) + (t * Rational::from(qm));
            num / den
        };
        let (x1, x2) = (mobius(&g1), mobius(&g2));
        Ok(if x1 <= x2 { (x1, x2) } else { (x2, x1) })
    }

    /// Serialise as `{"digits":[...], "periodic_tail":[...]|null, "seed":int|null}`.
    pub fn to_json(&self) -> Result<String> {
        let (seed, stream_id) = match self.source {
            FrequencySource::Sampled {
                seed, stream_id, ..
            } => (Some(seed), Some(stream_id)),
            _ => (None, None),
        };
        Ok(serde_json::to_string(&FrequencyJson {
            digits: self.digits.clone(),
            periodic_tail: self.periodic_tail.clone(),
            seed,
            stream_id,
        })?)
    }

    /// Inverse of [`Frequency::to_json`].  A seeded record is re-sampled
    /// from its stream to the stored depth.
    pub fn from_json(s: &str) -> Result<Self> {
        let j: FrequencyJson = serde_json::from_str(s)?;
        match (j.periodic_tail, j.seed) {
            (Some(t), _) => Self::periodic(j.digits, t),
            (None, Some(seed)) => {
                let f = GaussSampler::new(seed, j.stream_id.unwrap_or(0)).sample(j.digits.len())?;
                if f.digits != j.digits {
                    return Err(Error::Domain(
                        "seeded frequency does not match its stored digits".into(),
                    ));
                }
                Ok(f)
            }
            (None, None) => Self::explicit(j.digits),
        }
    }
}

/// Convergent numerators and denominators `p_n, q_n`, indexed from `−1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentTable {
    p: Vec<Integer>,
    q: Vec<Integer>,
}

impl ConvergentTable {
    /// Build `p_{-1..n}`, `q_{-1..n}` from the digits `a₁..a_n`.
    pub fn from_digits(digits: &[u32]) -> Self {
        let mut p = vec![Integer::from(1), Integer::from(0)];
        let mut q = vec![Integer::from(0), Integer::from(1)];
        for (i, &a) in digits.iter().enumerate() {
            let pn = Integer::from(&p[i + 1] * a) + &p[i];
            let qn = Integer::from(&q[i + 1] * a) + &q[i];
            p.push(pn);
            q.push(qn);
        }
        Self { p, q }
    }

    /// Largest index `n` stored.
    pub fn depth(&self) -> usize {
        self.q.len() - 2
    }

    /// `p_i` for `−1 ≤ i ≤ depth`.
    pub fn p(&self, i: isize) -> &Integer {
        &self.p[(i + 1) as usize]
    }

    /// `q_i` for `−1 ≤ i ≤ depth`.
    pub fn q(&self, i: isize) -> &Integer {
        &self.q[(i + 1) as usize]
    }

    /// All `q_{-1..n}` in order.
    pub fn q_all(&self) -> &[Integer] {
        &self.q
    }

    /// All `p_{-1..n}` in order.
    pub fn p_all(&self) -> &[Integer] {
        &self.p
    }
}

/// Convergent table of `f` up to depth `n`.
pub fn convergents(f: &Frequency, n: usize) -> Result<ConvergentTable> {
    Ok(ConvergentTable::from_digits(&f.prefix(n)?))
}

/// `q_n` of a digit prefix.
pub fn q_of(digits: &[u32]) -> Integer {
    let (mut a, mut b) = (Integer::from(0), Integer::from(1));
    for &d in digits {
        let c = Integer::from(&b * d) + &a;
        a = b;
        b = c;
    }
    b
}

fn dyadic(x: &Float) -> Result<(Integer, Integer)> {
    let (m, e) = x
        .to_integer_exp()
        .ok_or_else(|| Error::Domain("non-finite continued-fraction argument".into()))?;
    if e >= 0 {
        return Err(Error::Domain(
            "continued-fraction argument must lie in (0,1)".into(),
        ));
    }
    Ok((m, Integer::from(1) << (-e) as u32))
}

/// First `n` continued-fraction digits shared by every real in `[lo, hi]`.
///
/// The endpoints are converted to exact dyadic rationals and Euclid's
/// algorithm runs on both; a digit is emitted only when both quotients agree
/// and both remainders are non-zero, which certifies it for the whole
/// enclosure (cylinders of the Gauss map are intervals).
pub fn cf_expand_enclosure(lo: &Float, hi: &Float, n: usize) -> Result<Vec<u32>> {
    if !(*lo > 0 && *hi < 1 && lo <= hi) {
        return Err(Error::Domain(
            "enclosure must satisfy 0 < lo <= hi < 1".into(),
        ));
    }
    let (mut an, mut ad) = dyadic(lo)?;
    let (mut bn, mut bd) = dyadic(hi)?;
    let mut out = Vec::with_capacity(n);
    let exhausted = |i: usize| Error::PrecisionExhausted {
        bits: lo.prec().max(hi.prec()),
        what: format!("continued-fraction digit {} of {n}", i + 1),
    };
    for i in 0..n {
        let (qa, ra) = <(Integer, Integer)>::from(ad.div_rem_ref(&an));
        let (qb, rb) = <(Integer, Integer)>::from(bd.div_rem_ref(&bn));
        if qa != qb || ra == 0 || rb == 0 {
            return Err(exhausted(i));
        }
        let d = qa.to_u32().ok_or_else(|| exhausted(i))?;
        out.push(d);
        ad = std::mem::replace(&mut an, ra);
        bd = std::mem::replace(&mut bn, rb);
    }
    Ok(out)
}

/// First `n` digits of the (dyadic) number `x ∈ (0,1)`, taken as exact.
pub fn cf_expand(x: &Float, n: usize) -> Result<Vec<u32>> {
    cf_expand_enclosure(x, x, n)
}

/// Working precision allotted to `n` digits: `⌈3.5 n⌉ + 64` bits.
pub fn digit_precision(n: usize) -> u32 {
    (7 * n).div_ceil(2) as u32 + 64
}

/// Expand `n` digits of a real given by an enclosure oracle
/// `prec ↦ [lo, hi]`, climbing a precision ladder (start at
/// [`digit_precision`], double up to four times).
pub fn cf_expand_with<F>(enclose: F, n: usize) -> Result<(Vec<u32>, u32)>
where
    F: Fn(u32) -> (Float, Float),
{
    let mut prec = digit_precision(n);
    let mut last = None;
    for _ in 0..5 {
        let (lo, hi) = enclose(prec);
        match cf_expand_enclosure(&lo, &hi, n) {
            Ok(d) => return Ok((d, prec)),
            Err(e @ Error::PrecisionExhausted { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
        prec *= 2;
    }
    Err(last.expect("ladder ran at least once"))
}

/// Directed-rounding enclosure of `2^U − 1` for `U = (2·draw + 1)/2^65`.
pub fn gauss_alpha_enclosure(draw: u64, prec: u32) -> (Float, Float) {
    let u = Float::with_val(prec.max(80), (Integer::from(draw) << 1u32) + 1u32) >> 65u32;
    let mut lo = Float::with_val(prec, &u);
    let mut hi = Float::with_val(prec, &u);
    lo.exp2_round(Round::Down);
    hi.exp2_round(Round::Up);
    lo.sub_assign_round(1u32, Round::Down);
    hi.sub_assign_round(1u32, Round::Up);
    (lo, hi)
}

/// Seeded, stream-addressable source of Gauss-distributed frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussSampler {
    /// 64-bit seed.
    pub seed: u64,
    /// Stream identifier (one per worker or per sample).
    pub stream_id: u64,
}

impl GaussSampler {
    /// New sampler.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    fn rng(&self) -> ChaCha20Rng {
        let mut r = ChaCha20Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream_id);
        r
    }

    /// The `U`-defining draw of this stream.
    pub fn draw(&self) -> u64 {
        self.rng().next_u64()
    }

    /// A Gauss-distributed frequency expanded to `depth` certified digits.
    pub fn sample(&self, depth: usize) -> Result<Frequency> {
        sample_from_draw(self.seed, self.stream_id, self.draw(), depth)
    }
}

fn sample_from_draw(seed: u64, stream_id: u64, draw: u64, depth: usize) -> Result<Frequency> {
    if depth == 0 {
        return Err(Error::Domain("sampling depth must be >= 1".into()));
    }
    let (digits, prec) = cf_expand_with(|p| gauss_alpha_enclosure(draw, p), depth)?;
    Ok(Frequency {
        digits,
        periodic_tail: None,
        source: FrequencySource::Sampled {
            seed,
            stream_id,
            draw,
        },
        precision_bits: prec,
    })
}

/// Sample a Gauss-distributed frequency with `n` certified digits.
pub fn gauss_sample_frequency(s: &GaussSampler, n: usize) -> Result<Frequency> {
    s.sample(n)
}

/// Monte-Carlo estimate of Lévy's and Khinchin's constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyKhinchin {
    /// Mean of `log q_n / n`.
    pub gamma: f64,
    /// Standard error of `gamma`.
    pub gamma_stderr: f64,
    /// Mean of `(∏ a_i)^{1/n}`.
    pub kappa: f64,
    /// Standard error of `kappa`.
    pub kappa_stderr: f64,
}

/// Sample mean and standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimate `γ` and `κ` from `m` Gauss samples of depth `n`; sample `i`
/// uses stream `i` of `seed`.
pub fn levy_khinchin_estimate(seed: u64, m: usize, n: usize) -> Result<LevyKhinchin> {
    if m == 0 || n == 0 {
        return Err(Error::Domain(
            "need at least one sample and one digit".into(),
        ));
    }
    let per: Vec<(f64, f64)> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let f = GaussSampler::new(seed, i).sample(n)?;
            Ok(digit_statistics(f.stored_digits()))
        })
        .collect::<Result<_>>()?;
    let g: Vec<f64> = per.iter().map(|p| p.0).collect();
    let k: Vec<f64> = per.iter().map(|p| p.1).collect();
    let (gamma, gamma_stderr) = mean_stderr(&g);
    let (kappa, kappa_stderr) = mean_stderr(&k);
    Ok(LevyKhinchin {
        gamma,
        gamma_stderr,
        kappa,
        kappa_stderr,
    })
}

/// `(log q_n / n, (∏ a_i)^{1/n})` for one digit string.
pub fn digit_statistics(digits: &[u32]) -> (f64, f64) {
    let n = digits.len() as f64;
    let lq = ln_integer(&q_of(digits));
    let la: f64 = digits.iter().map(|&a| f64::from(a).ln()).sum();
    (lq / n, (la / n).exp())
}

/// Interval `[lo, hi]` (directed rounding) of the golden mean `(√5−1)/2`.
pub fn golden_enclosure(prec: u32) -> (Float, Float) {
    let mut lo = Float::with_val(prec, 5);
    let mut hi = Float::with_val(prec, 5);
    lo.sqrt_round(Round::Down);
    hi.sqrt_round(Round::Up);
    lo.add_assign_round(-1i32, Round::Down);
    hi.add_assign_round(-1i32, Round::Up);
    (lo >> 1u32, hi >> 1u32)
}
