//! The Sturmian potential `S_k(α) = χ_{[1−α,1)}(kα mod 1)`.
//!
//! Values are decided exactly: `S_k = 1` iff `(k+1)α − ⌊kα⌋ − 1 ≥ 0`, and
//! both the floor and the sign are evaluated on an exact rational
//! enclosure of a real sharing the first `m` digits of `α`, where `m` is
//! the smallest index with `q_m > k`.  Prefix-determinacy makes the value
//! independent of the digits beyond `m`.

use rug::{Integer, Rational};

use crate::cf::{ConvergentTable, Frequency};
use crate::error::{Error, Result};

/// Smallest `m` with `q_m > k_max`, extending the frequency if needed.
fn determining_depth(f: &Frequency, k_max: u64) -> Result<usize> {
    let mut m = 1;
    loop {
        let pre = f.prefix(m)?;
        let q = ConvergentTable::from_digits(&pre).q(m as isize).clone();
        if q > k_max {
            return Ok(m);
        }
        m += 1;
    }
}

/// Decide `S_k` on the enclosure `[lo, hi]`; `None` if undecided.
fn decide(lo: &Rational, hi: &Rational, k: u64) -> Option<u8> {
    let fl = |r: &Rational, k: u64| -> Integer {
        Rational::from(r * Integer::from(k)).floor().numer().clone()
    };
    let (f1, f2) = (fl(lo, k), fl(hi, k));
    if f1 != f2 {
        return None;
    }
    let s = |r: &Rational| -> std::cmp::Ordering {
        let v = Rational::from(r * Integer::from(k + 1)) - Rational::from(&f1 + 1u32);
        v.cmp0()
    };
    match (s(lo), s(hi)) {
        (a, b) if a == b && a != std::cmp::Ordering::Equal => {
            Some(u8::from(a == std::cmp::Ordering::Greater))
        }
        _ => None,
    }
}

/// `S_k(α)` for a site `k ≥ 1`.
pub fn sturmian_value(f: &Frequency, k: u64) -> Result<u8> {
    Ok(sturmian_sequence_range(f, k, k)?[0])
}

/// `(S_1, …, S_n)`.
pub fn sturmian_sequence(f: &Frequency, n: u64) -> Result<Vec<u8>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    sturmian_sequence_range(f, 1, n)
}

fn sturmian_sequence_range(f: &Frequency, from: u64, to: u64) -> Result<Vec<u8>> {
    if from == 0 {
        return Err(Error::Domain("site index must be at least 1".into()));
    }
    let m = determining_depth(f, to)?;
    let mut bits = 64 + 2 * (64 - to.leading_zeros());
    for _ in 0..8 {
        let (lo, hi) = f.completion_enclosure(m, bits)?;
        let vals: Option<Vec<u8>> = (from..=to).map(|k| decide(&lo, &hi, k)).collect();
        if let Some(v) = vals {
            return Ok(v);
        }
        bits *= 2;
    }
    Err(Error::PrecisionExhausted {
        bits,
        what: format!("Sturmian values on sites {from}..={to}"),
    })
}
