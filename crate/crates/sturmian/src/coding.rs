//! Symbolic coding of spectral bands.
//!
//! A band of order `n+1` inside a band of order `n` is labelled by a letter
//! `(t, k)_a` of the alphabet `𝒜_a`, where `a = a_{n+1}` is the *level*,
//! `t ∈ {1,2,3}` the band type and `k` its index among the siblings of the
//! same type, counted from left to right in energy.  The alphabet at level
//! `a` is
//!
//! * `(1,k)_a` for `1 ≤ k ≤ a+1`,
//! * `(2,1)_a`,
//! * `(3,k)_a` for `1 ≤ k ≤ a`,
//!
//! so `#𝒜_a = 2a + 2`.  Which letters may follow a band of type `t` is the
//! admissibility relation:
//!
//! * `1 → (2,1)`,
//! * `2 → (1,k ≤ a+1)` and `(3,k ≤ a)`,
//! * `3 → (1,k ≤ a)` and `(3,k ≤ a−1)`.
//!
//! Counting is exact: `#Ξ(t, ā) = v_t Â_{a₁} ⋯ Â_{a_n} v_*ᵀ` with
//! `Â_k = [[0,1,0],[k+1,0,k],[k,0,k−1]]`.

use std::fmt;
use std::str::FromStr;

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default enumeration cap.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Spectral band type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BandType {
    /// A band of `σ_(n,1)` inside a band of `σ_(n,0)`.
    One,
    /// A band of `σ_(n+1,0)` inside a band of `σ_(n,−1)`.
    Two,
    /// A band of `σ_(n+1,0)` inside a band of `σ_(n,0)`.
    Three,
}

impl BandType {
    /// All three types.
    pub const ALL: [BandType; 3] = [BandType::One, BandType::Two, BandType::Three];

    /// Numeric label 1, 2 or 3.
    pub fn number(self) -> u8 {
        match self {
            BandType::One => 1,
            BandType::Two => 2,
            BandType::Three => 3,
        }
    }

    /// Inverse of [`BandType::number`].
    pub fn from_number(t: u8) -> Result<Self> {
        match t {
            1 => Ok(BandType::One),
            2 => Ok(BandType::Two),
            3 => Ok(BandType::Three),
            _ => Err(Error::Domain(format!(
                "band type must be 1, 2 or 3, got {t}"
            ))),
        }
    }

    fn slot(self) -> usize {
        self.number() as usize - 1
    }
}

/// A letter `(t, k)_level` of the alphabet `𝒜_level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    /// Band type `t`.
    pub band_type: BandType,
    /// Index `k ≥ 1`.
    pub index: u32,
    /// Level (the digit `a_i` the letter sits at).
    pub level: u32,
}

impl Letter {
    /// Construct a letter, validating the index range of its type.
    pub fn new(band_type: BandType, index: u32, level: u32) -> Result<Self> {
        let max = match band_type {
            BandType::One => level + 1,
            BandType::Two => 1,
            BandType::Three => level,
        };
        if level == 0 || index == 0 || index > max {
            return Err(Error::Domain(format!(
                "letter ({}, {index}) is not in the alphabet of level {level}",
                band_type.number()
            )));
        }
        Ok(Self {
            band_type,
            index,
            level,
        })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{}@{}",
            self.band_type.number(),
            self.index,
            self.level
        )
    }
}

impl FromStr for Letter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("malformed letter '{s}', expected t.k@n"));
        let (tk, n) = s.split_once('@').ok_or_else(bad)?;
        let (t, k) = tk.split_once('.').ok_or_else(bad)?;
        let t: u8 = t.parse().map_err(|_| bad())?;
        let k: u32 = k.parse().map_err(|_| bad())?;
        let n: u32 = n.parse().map_err(|_| bad())?;
        Letter::new(BandType::from_number(t)?, k, n)
    }
}

/// The alphabet `𝒜_level`, in the order `(1,·)`, `(2,1)`, `(3,·)`.
pub fn alphabet(level: u32) -> Vec<Letter> {
    let mut v = Vec::with_capacity(2 * level as usize + 2);
    v.extend((1..=level + 1).map(|k| Letter {
        band_type: BandType::One,
        index: k,
        level,
    }));
    v.push(Letter {
        band_type: BandType::Two,
        index: 1,
        level,
    });
    v.extend((1..=level).map(|k| Letter {
        band_type: BandType::Three,
        index: k,
        level,
    }));
    v
}

/// Whether letter `next` may follow a band (or boundary symbol) of type `prev`.
pub fn admissible(prev: BandType, next: &Letter) -> bool {
    let n = next.level;
    let k = next.index;
    if n == 0 || k == 0 {
        return false;
    }
    match (prev, next.band_type) {
        (BandType::One, BandType::Two) => k == 1,
        (BandType::Two, BandType::One) => k <= n + 1,
        (BandType::Two, BandType::Three) => k <= n,
        (BandType::Three, BandType::One) => k <= n,
        (BandType::Three, BandType::Three) => k < n,
        _ => false,
    }
}

/// The admissible successors of a band of type `prev` at level `a`, in
/// increasing energy: type-1 and type-3 children interlace starting and
/// ending with type 1.
pub fn children_in_order(prev: BandType, a: u32) -> Vec<Letter> {
    let l = |t, k| Letter {
        band_type: t,
        index: k,
        level: a,
    };
    match prev {
        BandType::One => vec![l(BandType::Two, 1)],
        BandType::Two | BandType::Three => {
            let n1 = if prev == BandType::Two { a + 1 } else { a };
            let mut v = Vec::with_capacity(2 * n1 as usize);
            for k in 1..=n1 {
                v.push(l(BandType::One, k));
                if k < n1 {
                    v.push(l(BandType::Three, k));
                }
            }
            v
        }
    }
}

/// Number of children of a band of type `t` at level `a` (`1`, `2a+1`, `2a−1`).
pub fn child_count(t: BandType, a: u32) -> usize {
    match t {
        BandType::One => 1,
        BandType::Two => 2 * a as usize + 1,
        BandType::Three => 2 * a as usize - 1,
    }
}

/// A word of letters, optionally preceded by an order-0 boundary symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    /// Boundary symbol (`One` for `[λ−2,λ+2]`, `Three` for `[−2,2]`), or
    /// `None` for fiber words.
    pub boundary: Option<BandType>,
    /// The letters.
    pub letters: Vec<Letter>,
}

impl Word {
    /// A word consisting of a boundary symbol only (an order-0 band).
    pub fn root(boundary: BandType) -> Self {
        Self {
            boundary: Some(boundary),
            letters: Vec::new(),
        }
    }

    /// Number of letters (the order of the band it codes).
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Whether there are no letters.
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Type of the last symbol (`t_w`), if any.
    pub fn end_type(&self) -> Option<BandType> {
        self.letters.last().map(|l| l.band_type).or(self.boundary)
    }

    /// Append a letter (no admissibility check).
    pub fn child(&self, e: Letter) -> Self {
        let mut w = self.clone();
        w.letters.push(e);
        w
    }

    /// The prefix keeping the first `n` letters.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            boundary: self.boundary,
            letters: self.letters[..n.min(self.letters.len())].to_vec(),
        }
    }

    /// Whether all consecutive symbols are admissible (and the boundary is
    /// of type 1 or 3).
    pub fn is_admissible(&self) -> bool {
        let mut prev = match self.boundary {
            Some(BandType::Two) => return false,
            Some(t) => Some(t),
            None => None,
        };
        for l in &self.letters {
            if Letter::new(l.band_type, l.index, l.level).is_err() {
                return false;
            }
            if let Some(p) = prev {
                if !admissible(p, l) {
                    return false;
                }
            }
            prev = Some(l.band_type);
        }
        true
    }

    /// Whether letter `i` has level `digits[i]` for every letter.
    pub fn matches_levels(&self, digits: &[u32]) -> bool {
        self.letters.len() <= digits.len()
            && self.letters.iter().zip(digits).all(|(l, &d)| l.level == d)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::with_capacity(self.letters.len() + 1);
        if let Some(b) = self.boundary {
            parts.push(format!("B{}", b.number()));
        }
        parts.extend(self.letters.iter().map(|l| l.to_string()));
        write!(f, "{}", parts.join("-"))
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut boundary = None;
        let mut letters = Vec::new();
        for (i, part) in s.split('-').enumerate() {
            if i == 0 && part.starts_with('B') {
                let t: u8 = part[1..]
                    .parse()
                    .map_err(|_| Error::Domain(format!("malformed boundary symbol '{part}'")))?;
                boundary = Some(BandType::from_number(t)?);
            } else {
                letters.push(part.parse()?);
            }
        }
        Ok(Word { boundary, letters })
    }
}

/// Where an enumeration or count starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    /// Order-0 boundary symbols `B1`, `B3` (the coding space `Ω^ā_n`).
    Boundary,
    /// After a band of the given type (the descendant set `Ξ(t, ā)`).
    Type(BandType),
    /// Fiber words: any first letter (the fiber `Ω_{ā}`).
    Fiber,
}

/// A count vector indexed by band type.
pub type TypeVector = [Integer; 3];

/// The count matrix `Â_k`.
pub fn a_hat(k: u32) -> [[Integer; 3]; 3] {
    let k = Integer::from(k);
    [
        [Integer::new(), Integer::from(1), Integer::new()],
        [Integer::from(&k + 1u32), Integer::new(), k.clone()],
        [k.clone(), Integer::new(), Integer::from(&k - 1u32)],
    ]
}

/// Row vector times `Â_k`.
pub fn times_a_hat(v: &TypeVector, k: u32) -> TypeVector {
    [
        Integer::from(&v[1] * (k + 1)) + Integer::from(&v[2] * k),
        v[0].clone(),
        Integer::from(&v[1] * k) + Integer::from(&v[2] * (k - 1)),
    ]
}

/// `Â_k` times a column vector.
pub fn a_hat_times(k: u32, w: &TypeVector) -> TypeVector {
    [
        w[1].clone(),
        Integer::from(&w[0] * (k + 1)) + Integer::from(&w[2] * k),
        Integer::from(&w[0] * k) + Integer::from(&w[2] * (k - 1)),
    ]
}

/// Matrix product `Â_{a₁} ⋯ Â_{a_n}`.
pub fn a_hat_product(levels: &[u32]) -> [[Integer; 3]; 3] {
    let mut rows: [TypeVector; 3] = [
        [Integer::from(1), Integer::new(), Integer::new()],
        [Integer::new(), Integer::from(1), Integer::new()],
        [Integer::new(), Integer::new(), Integer::from(1)],
    ];
    for &k in levels {
        for r in rows.iter_mut() {
            *r = times_a_hat(r, k);
        }
    }
    rows
}

/// Unit row vector `v_t`.
pub fn unit(t: BandType) -> TypeVector {
    let mut v: TypeVector = [Integer::new(), Integer::new(), Integer::new()];
    v[t.slot()] = Integer::from(1);
    v
}

/// End-type selector: `v_*` (all ones) or `v_{t'}`.
pub fn end_vector(filter: Option<BandType>) -> TypeVector {
    match filter {
        None => [Integer::from(1), Integer::from(1), Integer::from(1)],
        Some(t) => unit(t),
    }
}

/// For every start type `t`, `Â_{a₁}⋯Â_{a_n}` applied to the end selector:
/// entry `t` is `#Ξ(t, ā, filter)`.
pub fn descendant_counts(levels: &[u32], end: &TypeVector) -> TypeVector {
    let mut w = end.clone();
    for &k in levels.iter().rev() {
        w = a_hat_times(k, &w);
    }
    w
}

fn dot(a: &TypeVector, b: &TypeVector) -> Integer {
    Integer::from(&a[0] * &b[0]) + Integer::from(&a[1] * &b[1]) + Integer::from(&a[2] * &b[2])
}

/// Exact number of admissible words (see [`Start`]) at the given levels,
/// optionally restricted to words whose final type is `end_filter`.
pub fn count_words(start: Start, levels: &[u32], end_filter: Option<BandType>) -> Integer {
    let w = descendant_counts(levels, &end_vector(end_filter));
    match start {
        Start::Type(t) => w[t.slot()].clone(),
        Start::Boundary => Integer::from(&w[0] + &w[2]),
        Start::Fiber => {
            if levels.is_empty() {
                return Integer::new();
            }
            let first = levels[0];
            let rest = descendant_counts(&levels[1..], &end_vector(end_filter));
            let v = [
                Integer::from(first + 1),
                Integer::from(1),
                Integer::from(first),
            ];
            dot(&v, &rest)
        }
    }
}

/// Enumerate the admissible words of [`count_words`] explicitly.
///
/// Fails with [`Error::CapExceeded`] (reporting the exact count) when the
/// number of words exceeds `cap`.
pub fn enumerate_words(
    start: Start,
    levels: &[u32],
    end_filter: Option<BandType>,
    cap: usize,
) -> Result<Vec<Word>> {
    let total = count_words(start, levels, None);
    if total > cap {
        return Err(Error::CapExceeded {
            cap,
            count: count_words(start, levels, end_filter).to_string(),
        });
    }
    if levels.contains(&0) {
        return Err(Error::Domain("levels must be >= 1".into()));
    }
    let mut frontier: Vec<(Word, Option<BandType>)> = match start {
        Start::Boundary => vec![
            (Word::root(BandType::One), Some(BandType::One)),
            (Word::root(BandType::Three), Some(BandType::Three)),
        ],
        Start::Type(t) => vec![(
            Word {
                boundary: None,
                letters: Vec::new(),
            },
            Some(t),
        )],
        Start::Fiber => vec![(
            Word {
                boundary: None,
                letters: Vec::new(),
            },
            None,
        )],
    };
    for &a in levels {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for (w, last) in frontier {
            let succ = match last {
                Some(t) => children_in_order(t, a),
                None => alphabet(a),
            };
            for e in succ {
                next.push((w.child(e), Some(e.band_type)));
            }
        }
        frontier = next;
    }
    Ok(frontier
        .into_iter()
        .filter(|(_, t)| end_filter.is_none() || *t == end_filter)
        .map(|(w, _)| w)
        .collect())
}

/// The lift `ι` from fiber words over `a` to coded bands over `ǎ = 1a`:
/// prepend `B1 (2,1)₁` when the first letter has type 1 or 3, and
/// `B3 (1,1)₁` when it has type 2.
pub fn iota_lift(w: &Word) -> Result<Word> {
    if w.boundary.is_some() {
        return Err(Error::Domain(
            "iota_lift expects a fiber word without boundary".into(),
        ));
    }
    let first = w
        .letters
        .first()
        .ok_or_else(|| Error::Domain("iota_lift of the empty word".into()))?;
    let (b, e) = match first.band_type {
        BandType::One | BandType::Three => (
            BandType::One,
            Letter {
                band_type: BandType::Two,
                index: 1,
                level: 1,
            },
        ),
        BandType::Two => (
            BandType::Three,
            Letter {
                band_type: BandType::One,
                index: 1,
                level: 1,
            },
        ),
    };
    let mut letters = Vec::with_capacity(w.len() + 1);
    letters.push(e);
    letters.extend_from_slice(&w.letters);
    Ok(Word {
        boundary: Some(b),
        letters,
    })
}

/// Inverse of [`iota_lift`]: drop the boundary and the first letter.
pub fn iota_unlift(w: &Word) -> Result<Word> {
    if w.boundary.is_none() || w.letters.is_empty() {
        return Err(Error::Domain(
            "iota_unlift expects a coded band of order >= 1".into(),
        ));
    }
    Ok(Word {
        boundary: None,
        letters: w.letters[1..].to_vec(),
    })
}

/// Draw an index with probability exactly proportional to the integer
/// weights (uniform integer below the total, 64 extra bits of slack).
pub fn pick_weighted<R: rand::Rng + ?Sized>(weights: &[Integer], rng: &mut R) -> usize {
    let total: Integer = weights.iter().sum();
    assert!(total > 0, "pick_weighted needs a positive total weight");
    let bits = total.significant_bits() + 64;
    let mut r = Integer::new();
    let mut got = 0;
    while got < bits {
        r <<= 64;
        r += rng.next_u64();
        got += 64;
    }
    r %= &total;
    let mut acc = Integer::new();
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return i;
        }
    }
    weights.len() - 1
}
