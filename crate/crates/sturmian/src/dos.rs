//! Density of states: periodic approximants, exact combinatorial masses,
//! fiber-measure sampling, the dimension `d(λ)` and the constants `θ`, `ϱ`.
//!
//! * The `q_n`-periodic approximant has diagonal `λ·S_k` (`k = 1..q_n`),
//!   ones on the off-diagonals and in the two corners.  Its eigenvalues are
//!   the roots of `tr M_n = 2`, one in each band of order `n` and type 2 or
//!   3.  Eigenvalues are counted per band by Sylvester inertia of
//!   `H − E` in multiprecision arithmetic at the certified outer endpoints.
//! * Masses are exact rationals `#Ξ(t_w, a_{n+1..n+m}, {2,3}) / q_{n+m}`.
//!   Because every order-`(n+m)` band of type 2 or 3 carries one eigenvalue
//!   of the `q_{n+m}`-approximant, this is exactly the fraction of those
//!   eigenvalues lying in the band `B_w`; the masses of all words of one
//!   order sum to one.
//! * Fiber paths are drawn letter by letter with the ratio of the exact
//!   masses of child and parent at a fixed look-ahead `m`.
//! * `ψ_n(x) = log|B^{ǎ}_{ι(x)}|` is the log-length of the lifted band in
//!   the band tree of `ǎ = 1a`; `L̂` averages `−ψ_n/n`, `d̂ = γ/L̂`,
//!   `θ̂` averages the weight `ϑ = 1 + (a_j − 2)·[t_j = 2]` and `ϱ̂ = e^{γ/θ̂}`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::cf::{ln_integer, mean_stderr, q_of, Frequency, GaussSampler, LEVY};
use crate::coding::{
    alphabet, children_in_order, descendant_counts, enumerate_words, iota_lift, pick_weighted,
    BandType, Start, TypeVector, Word,
};
use crate::error::{Error, Result};
use crate::spectrum::{expand_band_child, order_zero_bands, sturmian_sequence, BandTree};

/// Largest approximant handled by the dense eigensolver.
pub const DEFAULT_EIGEN_CAP: usize = 2000;
/// Default look-ahead `m` of the exact masses.
pub const DEFAULT_TRUNCATION: usize = 8;
/// Smallest look-ahead accepted by the fiber sampler.
pub const MIN_TRUNCATION: usize = 6;
/// Salt separating fiber-path streams from frequency streams.
const FIBER_SALT: u64 = 0xf1be_5a3d_0d05_0001;

fn slot(t: BandType) -> usize {
    t.number() as usize - 1
}

/// End selector for types 2 and 3.
fn end_two_three() -> TypeVector {
    [Integer::new(), Integer::from(1), Integer::from(1)]
}

/// The `q_n`-periodic restriction of the operator.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicApproximant {
    /// Order `n`.
    pub n: usize,
    /// Size `q = q_n`.
    pub q: usize,
    /// Coupling.
    pub lambda: f64,
    /// Diagonal `λ·S_k`, `k = 1..q`.
    pub potential: Vec<f64>,
}

impl PeriodicApproximant {
    /// The approximant of order `n`, refusing sizes above [`DEFAULT_EIGEN_CAP`].
    pub fn new(f: &Frequency, lambda: f64, n: usize) -> Result<Self> {
        Self::with_cap(f, lambda, n, DEFAULT_EIGEN_CAP)
    }

    /// The approximant of order `n` with an explicit size cap.
    pub fn with_cap(f: &Frequency, lambda: f64, n: usize, cap: usize) -> Result<Self> {
        let q = q_of(&f.prefix(n)?);
        if q > cap {
            return Err(Error::CapExceeded {
                cap,
                count: q.to_string(),
            });
        }
        let q = q.to_usize().expect("q below the cap fits in usize");
        let potential = sturmian_sequence(f, q as u64)?
            .into_iter()
            .map(|s| lambda * f64::from(s))
            .collect();
        Ok(Self {
            n,
            q,
            lambda,
            potential,
        })
    }

    /// The dense matrix.  Sizes 1 and 2 fold the periodic couplings onto
    /// the diagonal (`V + 2`) and the off-diagonal (`2`) respectively.
    pub fn matrix(&self) -> DMatrix<f64> {
        let q = self.q;
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.potential.clone()));
        match q {
            1 => h[(0, 0)] += 2.0,
            2 => {
                h[(0, 1)] = 2.0;
                h[(1, 0)] = 2.0;
            }
            _ => {
                for k in 0..q - 1 {
                    h[(k, k + 1)] = 1.0;
                    h[(k + 1, k)] = 1.0;
                }
                h[(0, q - 1)] = 1.0;
                h[(q - 1, 0)] = 1.0;
            }
        }
        h
    }

    /// All eigenvalues, sorted increasingly.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix())
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Working precision of the inertia count at energy `e`.
    fn inertia_bits(&self, e: &Float) -> u32 {
        e.prec().max(192) + 2 * (usize::BITS - self.q.leading_zeros()) + 64
    }

    /// Number of eigenvalues strictly below `e`: the negative inertia of
    /// `H − e` from a symmetric factorisation of the cyclic tridiagonal
    /// matrix, the corner row eliminated last.  An exactly zero leading
    /// pivot is eliminated together with the next row as a 2×2 block
    /// `[[0, 1], [1, x]]`, which carries one negative and one positive
    /// eigenvalue, so the count is exact at every energy.
    pub fn count_below(&self, e: &Float) -> Result<usize> {
        let prec = self.inertia_bits(e);
        let e = Float::with_val(prec, e);
        let d = |k: usize| Float::with_val(prec, self.potential[k] - &e);
        let negative = |p: &Float| usize::from(p.is_sign_negative() && !p.is_zero());
        match self.q {
            1 => Ok(negative(&Float::with_val(prec, d(0) + 2u32))),
            2 => {
                let p1 = d(0);
                if p1.is_zero() {
                    // [[0, 2], [2, x]] has one eigenvalue of each sign.
                    return Ok(1);
                }
                let p2 = d(1) - Float::with_val(prec, 4u32 / &p1);
                Ok(negative(&p1) + negative(&p2))
            }
            q => {
                // Rows 0..q−2 form a path; the corner row q−1 couples to rows
                // 0 and q−2.  `p` is the pivot of row i, `c` its coupling to
                // the corner row, `schur` the corner's Schur complement.
                let last = q - 2;
                let corner = |j: usize| Float::with_val(prec, u32::from(j == 0 || j == last));
                let mut neg = 0usize;
                let mut schur = d(q - 1);
                let mut p = d(0);
                let mut c = corner(0);
                let mut i = 0;
                while i <= last {
                    if !p.is_zero() {
                        neg += negative(&p);
                        let inv = Float::with_val(prec, 1u32 / &p);
                        schur -= Float::with_val(prec, c.square_ref()) * &inv;
                        if i < last {
                            c = corner(i + 1) - Float::with_val(prec, &c * &inv);
                            p = d(i + 1) - inv;
                        }
                        i += 1;
                    } else if i < last {
                        // Block of rows i, i+1: B = [[0, 1], [1, x]],
                        // B⁻¹ = [[−x, 1], [1, 0]], corner couplings u = (c, o).
                        let x = d(i + 1);
                        let o = corner(i + 1);
                        neg += 1;
                        let quad = Float::with_val(prec, &o * &c) * 2u32
                            - Float::with_val(prec, c.square_ref()) * &x;
                        schur -= quad;
                        if i + 2 <= last {
                            c = corner(i + 2) - &c;
                            p = d(i + 2);
                        }
                        i += 2;
                    } else {
                        // Zero last pivot: block [[0, c], [c, schur]] with the corner.
                        return Ok(neg + if c.is_zero() { negative(&schur) } else { 1 });
                    }
                }
                Ok(neg + negative(&schur))
            }
        }
    }
}

/// The sorted eigenvalues of the order-`n` approximant.
pub fn periodic_eigenvalues(f: &Frequency, lambda: f64, n: usize) -> Result<Vec<f64>> {
    Ok(PeriodicApproximant::new(f, lambda, n)?.eigenvalues())
}

/// Eigenvalue count of one band.
#[derive(Clone, Debug, Serialize)]
pub struct BandCount {
    /// Band code.
    pub word: String,
    /// Band type.
    pub band_type: u8,
    /// Eigenvalues inside the certified enclosure.
    pub count: usize,
}

/// Per-band eigenvalue counts at order `n`.
#[derive(Clone, Debug, Serialize)]
pub struct BandEigenCounts {
    /// Order.
    pub n: usize,
    /// Approximant size.
    pub q: usize,
    /// One entry per order-`n` band, left to right.
    pub bands: Vec<BandCount>,
    /// Sum of all counts.
    pub total: usize,
    /// Largest distance of a dense-solver eigenvalue from the band it
    /// was matched to (0 when every eigenvalue lies inside), if checked.
    pub dense_offset: Option<f64>,
}

impl BandEigenCounts {
    /// `ν_n(B_w) = count / q_n` for every band.
    pub fn masses(&self) -> Vec<(String, f64)> {
        self.bands
            .iter()
            .map(|b| (b.word.clone(), b.count as f64 / self.q as f64))
            .collect()
    }
}

/// Count approximant eigenvalues in every order-`n` band of `tree`.
///
/// Every band of type 2 or 3 must carry exactly one eigenvalue and every
/// band of type 1 none (sizes `q ≤ 2` are reported but not enforced, their
/// couplings being folded).  When `eigenvalues` (sorted) are given, each is
/// matched to the corresponding type-2/3 band and its offset recorded.
pub fn band_eigen_counts(
    tree: &BandTree,
    approx: &PeriodicApproximant,
    eigenvalues: Option<&[f64]>,
) -> Result<BandEigenCounts> {
    let n = approx.n;
    if tree.depth() < n {
        return Err(Error::Domain(format!(
            "tree depth {} is below the approximant order {n}",
            tree.depth()
        )));
    }
    if tree.lambda != approx.lambda {
        return Err(Error::Domain(
            "tree and approximant use different couplings".into(),
        ));
    }
    let level = tree.level(n);
    let bands = level
        .par_iter()
        .map(|b| {
            let count = approx.count_below(&b.hi)? - approx.count_below(&b.lo)?;
            Ok(BandCount {
                word: b.code.to_string(),
                band_type: b.band_type.number(),
                count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = bands.iter().map(|b| b.count).sum();
    if approx.q > 2 {
        if let Some(b) = bands
            .iter()
            .find(|b| (b.band_type == 1) != (b.count == 0) || b.count > 1)
        {
            return Err(Error::CountMismatch(format!(
                "band {} of type {} holds {} eigenvalues (order {n}, q = {})",
                b.word, b.band_type, b.count, approx.q
            )));
        }
        if total != approx.q {
            return Err(Error::CountMismatch(format!(
                "{total} eigenvalues located, q = {}",
                approx.q
            )));
        }
    }
    let dense_offset = eigenvalues.map(|ev| {
        let mut carriers: Vec<_> = level
            .iter()
            .filter(|b| b.band_type != BandType::One)
            .collect();
        carriers.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        ev.iter()
            .zip(carriers)
            .map(|(&e, b)| (b.lo.to_f64() - e).max(e - b.hi.to_f64()).max(0.0))
            .fold(0.0, f64::max)
    });
    Ok(BandEigenCounts {
        n,
        q: approx.q,
        bands,
        total,
        dense_offset,
    })
}

/// Exact density-of-states mass of a band at look-ahead `m`.
#[derive(Clone, Debug, Serialize)]
pub struct DosMass {
    /// The band code (or fiber word).
    pub word: String,
    /// Order `n` of the word.
    pub n: usize,
    /// Look-ahead `m`.
    pub m: usize,
    /// `#Ξ(t_w, a_{n+1..n+m}, {2,3})`, in decimal.
    pub numerator: String,
    /// `q_{n+m}`, in decimal.
    pub denominator: String,
    /// End type `t_w`.
    pub end_type: u8,
    #[serde(skip)]
    exact: Rational,
}

impl DosMass {
    /// The exact rational.
    pub fn rational(&self) -> &Rational {
        &self.exact
    }
    /// The mass as `f64`.
    pub fn value(&self) -> f64 {
        self.exact.to_f64()
    }
}

/// The `η` factor of the mass law `mass ≍ 1/(η·q_n)`.
pub fn eta(t: BandType, digits: &[u32], n: usize) -> Result<u32> {
    let need = if t == BandType::Three { n + 2 } else { n + 1 };
    if digits.len() < need {
        return Err(Error::InsufficientDigits {
            available: digits.len(),
            requested: need,
        });
    }
    Ok(match t {
        BandType::One => digits[n],
        BandType::Two => 1,
        BandType::Three if digits[n] >= 2 => 1,
        BandType::Three => digits[n + 1],
    })
}

/// Exact mass `#Ξ(t_w, S^n a|_m, {2,3}) / q_{n+m}` of the band `w`.
pub fn dos_mass(f: &Frequency, w: &Word, m: usize) -> Result<DosMass> {
    let n = w.len();
    let digits = f.prefix(n + m)?;
    if !w.matches_levels(&digits[..n]) || !w.is_admissible() {
        return Err(Error::Domain(format!(
            "word {w} is not admissible for the frequency"
        )));
    }
    let t = w
        .end_type()
        .ok_or_else(|| Error::Domain("empty fiber word has no mass".into()))?;
    let num = descendant_counts(&digits[n..], &end_two_three())[slot(t)].clone();
    let den = q_of(&digits);
    Ok(DosMass {
        word: w.to_string(),
        n,
        m,
        numerator: num.to_string(),
        denominator: den.to_string(),
        end_type: t.number(),
        exact: Rational::from((num, den)),
    })
}

/// Masses of every coded band of order `n` at look-ahead `m`.
pub fn dos_masses_of_order(f: &Frequency, n: usize, m: usize) -> Result<Vec<DosMass>> {
    let digits = f.prefix(n)?;
    enumerate_words(
        Start::Boundary,
        &digits,
        None,
        crate::coding::DEFAULT_ENUMERATION_CAP,
    )?
    .iter()
    .map(|w| dos_mass(f, w, m))
    .collect()
}

/// Sampler of fiber paths distributed by the exact masses.
#[derive(Clone, Debug, Serialize)]
pub struct FiberSampler {
    /// Digits `a₁..a_{depth+m−1}` (at least).
    pub digits: Vec<u32>,
    /// Look-ahead `m`.
    pub m: usize,
    /// Seed.
    pub seed: u64,
    /// Stream.
    pub stream: u64,
}

impl FiberSampler {
    /// Sampler for `f` with look-ahead `m ≥ 6`, prepared for paths of
    /// length up to `depth`.
    pub fn new(f: &Frequency, depth: usize, m: usize, seed: u64, stream: u64) -> Result<Self> {
        if m < MIN_TRUNCATION {
            return Err(Error::Domain(format!(
                "look-ahead must be >= {MIN_TRUNCATION}, got {m}"
            )));
        }
        Ok(Self {
            digits: f.prefix(depth + m - 1)?,
            m,
            seed,
            stream,
        })
    }

    /// Transition weights of the letters `candidates` at position `j`
    /// (1-based): `#Ξ(t_e, a_{j+1..j+m−1}, {2,3})`.
    fn weights(&self, j: usize, candidates: &[crate::coding::Letter]) -> Vec<Integer> {
        let w = descendant_counts(&self.digits[j..j + self.m - 1], &end_two_three());
        candidates
            .iter()
            .map(|e| w[slot(e.band_type)].clone())
            .collect()
    }

    /// Exact transition probabilities of the letters that may follow
    /// `prefix` (the first letter when `prefix` is empty).
    pub fn transition(&self, prefix: &Word) -> Result<Vec<(crate::coding::Letter, Rational)>> {
        let j = prefix.len() + 1;
        if j + self.m - 1 > self.digits.len() {
            return Err(Error::InsufficientDigits {
                available: self.digits.len(),
                requested: j + self.m - 1,
            });
        }
        let candidates = match prefix.end_type() {
            None => alphabet(self.digits[0]),
            Some(t) => children_in_order(t, self.digits[j - 1]),
        };
        let weights = self.weights(j, &candidates);
        let total: Integer = weights.iter().sum();
        Ok(candidates
            .into_iter()
            .zip(weights)
            .map(|(e, w)| (e, Rational::from((w, total.clone()))))
            .collect())
    }

    /// A fiber word of length `depth`.
    pub fn sample(&self, depth: usize) -> Result<Word> {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed ^ FIBER_SALT);
        rng.set_stream(self.stream);
        self.sample_with(depth, &mut rng)
    }

    fn sample_with(&self, depth: usize, rng: &mut ChaCha20Rng) -> Result<Word> {
        if depth + self.m - 1 > self.digits.len() {
            return Err(Error::InsufficientDigits {
                available: self.digits.len(),
                requested: depth + self.m - 1,
            });
        }
        let mut w = Word {
            boundary: None,
            letters: Vec::with_capacity(depth),
        };
        for j in 1..=depth {
            let candidates = match w.end_type() {
                None => alphabet(self.digits[0]),
                Some(t) => children_in_order(t, self.digits[j - 1]),
            };
            let weights = self.weights(j, &candidates);
            w.letters.push(candidates[pick_weighted(&weights, rng)]);
        }
        Ok(w)
    }
}

/// A fiber word of length `depth` drawn by `sampler`.
pub fn fiber_sample(sampler: &FiberSampler, depth: usize) -> Result<Word> {
    sampler.sample(depth)
}

/// Exact fiber mass of `w` at look-ahead `m`: the product of the
/// transition probabilities along `w`.
pub fn fiber_mass(f: &Frequency, w: &Word, m: usize) -> Result<Rational> {
    let s = FiberSampler::new(f, w.len(), m, 0, 0)?;
    let mut acc = Rational::from(1);
    let mut prefix = Word {
        boundary: None,
        letters: Vec::new(),
    };
    for e in &w.letters {
        let p = s
            .transition(&prefix)?
            .into_iter()
            .find(|(c, _)| c == e)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::Domain(format!("fiber word {w} is not admissible")))?;
        acc *= p;
        prefix.letters.push(*e);
    }
    Ok(acc)
}

/// Gauss measure of the cylinder `{α : a₁..a_n(α) = digits}`.
pub fn gauss_cylinder_mass(digits: &[u32]) -> f64 {
    let t = crate::cf::ConvergentTable::from_digits(digits);
    let n = digits.len() as isize;
    let (p, q, pp, qp) = (t.p(n), t.q(n), t.p(n - 1), t.q(n - 1));
    // Endpoints p_n/q_n and (p_n + p_{n−1})/(q_n + q_{n−1}).
    let x1 = Rational::from((p.clone(), q.clone()));
    let x2 = Rational::from((Integer::from(p + pp), Integer::from(q + qp)));
    let g = |x: &Rational| (1.0 + x.to_f64()).ln();
    (g(&x1) - g(&x2)).abs() / std::f64::consts::LN_2
}

/// `ϑ` at every position of a fiber word: `1 + (a_j − 2)` for type-2
/// letters, `1` otherwise.
pub fn vartheta(w: &Word) -> Vec<f64> {
    w.letters
        .iter()
        .map(|e| {
            if e.band_type == BandType::Two {
                f64::from(e.level) - 1.0
            } else {
                1.0
            }
        })
        .collect()
}

/// `ψ = log|B^{ǎ}_{ι(x)}|` for a fiber word `x` over the digits `a`.
pub fn psi_value(digits: &[u32], lambda: f64, x: &Word) -> Result<f64> {
    if lambda < 24.0 {
        return Err(Error::Domain(format!(
            "density-of-states estimates need lambda >= 24, got {lambda}"
        )));
    }
    if digits.len() < x.len() {
        return Err(Error::InsufficientDigits {
            available: digits.len(),
            requested: x.len(),
        });
    }
    let mut check = Vec::with_capacity(x.len() + 1);
    check.push(1);
    check.extend_from_slice(&digits[..x.len()]);
    let lifted = iota_lift(x)?;
    let b = lifted.boundary.expect("lifted words carry a boundary");
    let mut band = order_zero_bands(lambda)
        .into_iter()
        .find(|z| z.band_type == b)
        .expect("two order-0 bands");
    for (j, e) in lifted.letters.iter().enumerate() {
        let kids = children_in_order(band.band_type, check[j]);
        let pos = kids
            .iter()
            .position(|c| c == e)
            .ok_or_else(|| Error::Domain(format!("lifted word {lifted} is not admissible")))?;
        band = expand_band_child(&check, lambda, &band, pos)?;
    }
    Ok(band.log_len)
}

/// Which frequencies the estimators average over.
#[derive(Clone, Debug)]
pub enum PsiMode {
    /// Gauss-distributed frequencies, one per sample.
    Typical,
    /// A fixed frequency.
    Fixed(Frequency),
}

/// One sampled fiber path.
#[derive(Clone, Debug, Serialize)]
pub struct PathRecord {
    /// Stream (sample index).
    pub stream: u64,
    /// Digits `a₁..a_n`.
    pub digits: Vec<u32>,
    /// The fiber word.
    pub word: String,
    /// `ψ_n`, if computed.
    pub psi: Option<f64>,
    /// `log q_n(a)`.
    pub log_q: f64,
    /// Birkhoff average of `ϑ` along the path.
    pub theta: f64,
    /// Local-dimension estimate `−log q_n / ψ_n`, if `ψ_n` was computed.
    pub local_dimension: Option<f64>,
}

fn sample_path(
    mode: &PsiMode,
    n: usize,
    m: usize,
    seed: u64,
    i: u64,
    lambda: Option<f64>,
) -> Result<PathRecord> {
    let f = match mode {
        PsiMode::Typical => GaussSampler::new(seed, i).sample(n + m)?,
        PsiMode::Fixed(f) => f.clone(),
    };
    let sampler = FiberSampler::new(&f, n, m, seed, i)?;
    let x = sampler.sample(n)?;
    let digits = sampler.digits[..n].to_vec();
    let log_q = ln_integer(&q_of(&digits));
    let theta = vartheta(&x).iter().sum::<f64>() / n as f64;
    let psi = lambda.map(|l| psi_value(&digits, l, &x)).transpose()?;
    Ok(PathRecord {
        stream: i,
        word: x.to_string(),
        digits,
        psi,
        log_q,
        theta,
        local_dimension: psi.map(|p| -log_q / p),
    })
}

fn sample_paths(
    mode: &PsiMode,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
    lambda: Option<f64>,
) -> Result<Vec<PathRecord>> {
    if n == 0 || samples == 0 {
        return Err(Error::Domain("depth and samples must be positive".into()));
    }
    (0..samples as u64)
        .into_par_iter()
        .map(|i| sample_path(mode, n, m, seed, i, lambda))
        .collect()
}

/// `L̂ = −(1/n)·mean ψ_n` with its sampled paths.
#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    /// Coupling.
    pub lambda: f64,
    /// Depth.
    pub n: usize,
    /// `L̂`.
    pub l_hat: f64,
    /// Standard error of `L̂`.
    pub stderr: f64,
    /// The paths, in stream order.
    pub paths: Vec<PathRecord>,
}

/// Monte-Carlo estimate of `L̂ = −(Ψ_λ)_*` at depth `n`.
pub fn psi_lyapunov_estimate(
    lambda: f64,
    n: usize,
    samples: usize,
    seed: u64,
    mode: PsiMode,
) -> Result<LyapunovEstimate> {
    psi_lyapunov_estimate_truncated(lambda, n, DEFAULT_TRUNCATION, samples, seed, mode)
}

/// [`psi_lyapunov_estimate`] with fiber look-ahead `m` (at least [`MIN_TRUNCATION`]).
pub fn psi_lyapunov_estimate_truncated(
    lambda: f64,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
    mode: PsiMode,
) -> Result<LyapunovEstimate> {
    if lambda < 24.0 {
        return Err(Error::Domain(format!(
            "density-of-states estimates need lambda >= 24, got {lambda}"
        )));
    }
    let paths = sample_paths(&mode, n, m, samples, seed, Some(lambda))?;
    let xs: Vec<f64> = paths
        .iter()
        .map(|p| -p.psi.expect("psi computed") / n as f64)
        .collect();
    let (l_hat, stderr) = mean_stderr(&xs);
    Ok(LyapunovEstimate {
        lambda,
        n,
        l_hat,
        stderr,
        paths,
    })
}

/// `θ̂` with its standard error.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaEstimate {
    /// `θ̂`.
    pub theta: f64,
    /// Standard error.
    pub stderr: f64,
    /// Depth.
    pub n: usize,
    /// Number of paths.
    pub samples: usize,
}

/// Birkhoff average of `ϑ` along fiber paths of Gauss-distributed
/// frequencies (independent of `λ`).
pub fn theta_estimate(n: usize, samples: usize, seed: u64) -> Result<ThetaEstimate> {
    theta_estimate_with(n, samples, seed, PsiMode::Typical)
}

/// [`theta_estimate`] for a chosen frequency mode.
pub fn theta_estimate_with(
    n: usize,
    samples: usize,
    seed: u64,
    mode: PsiMode,
) -> Result<ThetaEstimate> {
    let paths = sample_paths(&mode, n, DEFAULT_TRUNCATION, samples, seed, None)?;
    let xs: Vec<f64> = paths.iter().map(|p| p.theta).collect();
    let (theta, stderr) = mean_stderr(&xs);
    Ok(ThetaEstimate {
        theta,
        stderr,
        n,
        samples,
    })
}

/// `d̂(λ)`, `θ̂`, `ϱ̂` and the per-path local dimensions.
#[derive(Clone, Debug, Serialize)]
pub struct DosDimension {
    /// Coupling.
    pub lambda: f64,
    /// Depth.
    pub n: usize,
    /// Number of paths.
    pub samples: usize,
    /// Seed.
    pub seed: u64,
    /// `L̂`.
    pub l_hat: f64,
    /// Standard error of `L̂`.
    pub l_stderr: f64,
    /// `d̂ = γ/L̂`.
    pub d_hat: f64,
    /// Delta-method standard error of `d̂`.
    pub d_stderr: f64,
    /// `γ/(L̂ + 3σ)`.
    pub d_lo: f64,
    /// `γ/(L̂ − 3σ)`.
    pub d_hi: f64,
    /// `θ̂` along the same paths.
    pub theta: f64,
    /// Standard error of `θ̂`.
    pub theta_stderr: f64,
    /// `ϱ̂ = exp(γ/θ̂)`.
    pub varrho: f64,
    /// The sampled paths with their local dimensions.
    pub table: Vec<PathRecord>,
}

/// `d̂(λ) = γ/L̂`, `ϱ̂ = exp(γ/θ̂)` and the local-dimension table, from
/// `samples` Gauss-distributed frequencies with one fiber path each.
pub fn dos_dimension(lambda: f64, n: usize, samples: usize, seed: u64) -> Result<DosDimension> {
    dos_dimension_truncated(lambda, n, DEFAULT_TRUNCATION, samples, seed)
}

/// [`dos_dimension`] with fiber look-ahead `m` (at least [`MIN_TRUNCATION`]).
pub fn dos_dimension_truncated(
    lambda: f64,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<DosDimension> {
    let est = psi_lyapunov_estimate_truncated(lambda, n, m, samples, seed, PsiMode::Typical)?;
    let thetas: Vec<f64> = est.paths.iter().map(|p| p.theta).collect();
    let (theta, theta_stderr) = mean_stderr(&thetas);
    let (l, s) = (est.l_hat, est.stderr);
    let hi = if l - 3.0 * s > 0.0 {
        LEVY / (l - 3.0 * s)
    } else {
        f64::INFINITY
    };
    Ok(DosDimension {
        lambda,
        n,
        samples,
        seed,
        l_hat: l,
        l_stderr: s,
        d_hat: LEVY / l,
        d_stderr: LEVY * s / (l * l),
        d_lo: LEVY / (l + 3.0 * s),
        d_hi: hi,
        theta,
        theta_stderr,
        varrho: (LEVY / theta).exp(),
        table: est.paths,
    })
}
