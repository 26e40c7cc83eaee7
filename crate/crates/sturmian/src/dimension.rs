//! Partition functions, pre-dimensions, relativized pressure, the zero
//! `D(λ)` of the pressure, and the Lyapunov cocycle behind `ρ`.
//!
//! * `𝒬(a,λ,t,n) = log Σ_{w∈Ω_n} |B_w|^t` is evaluated in log space.
//! * `s_n` is the root of `𝒬(a,λ,·,n) = 0`; the window minimum/maximum of
//!   `s_n` stand in for its lower/upper limits.
//! * The relativized pressure averages `𝒬/n` over Gauss-distributed
//!   frequencies.  When a frequency has more order-`n` bands than the exact
//!   budget allows, `Σ|B_w|^t` is estimated as `#Ω_n · mean |B|^t` over
//!   leaves drawn uniformly from the coding tree (exact child counts give
//!   the branching probabilities); the same leaves serve every `t`, so each
//!   sampled curve is convex and decreasing in `t`.  The logarithm of an
//!   unbiased mean is biased low by Jensen's inequality; the bias vanishes
//!   at `t = 0`, where the count is used exactly.
//! * `φ(x)` is the Lyapunov exponent of `R_{a₁}(x)⋯R_{a_n}(x)` under the
//!   Gauss measure and `ρ⁻¹` its zero.

use std::collections::HashMap;

use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;

use crate::cf::{mean_stderr, GaussSampler, LEVY};
use crate::coding::{
    child_count, count_words, descendant_counts, end_vector, pick_weighted, BandType, Start, Word,
};
use crate::error::{Error, Result};
use crate::spectrum::{build_band_tree, expand_band_child, order_zero_bands, Band, BandTree};

/// Absolute bisection tolerance for deterministic roots.
pub const ROOT_TOL: f64 = 1e-10;

/// `log Σ exp(xᵢ)` without overflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `𝒬(a, λ, t, n)` from the order-`n` bands of a tree.
pub fn partition_log(tree: &BandTree, t: f64, n: usize) -> Result<f64> {
    if n > tree.depth() {
        return Err(Error::Domain(format!(
            "order {n} exceeds tree depth {}",
            tree.depth()
        )));
    }
    let xs: Vec<f64> = tree.level(n).iter().map(|b| t * b.log_len).collect();
    Ok(log_sum_exp(&xs))
}

/// Bisection for the root of a decreasing function on `[lo, hi]`.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return None;
    }
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if f(m) > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `s_n`: the root in `t` of `𝒬(a, λ, t, n) = 0` (tolerance `10⁻¹⁰`).
pub fn solve_sn(tree: &BandTree, n: usize) -> Result<f64> {
    let lens: Vec<f64> = tree
        .level(n.min(tree.depth()))
        .iter()
        .map(|b| b.log_len)
        .collect();
    if n > tree.depth() {
        return Err(Error::Domain(format!(
            "order {n} exceeds tree depth {}",
            tree.depth()
        )));
    }
    let q = |t: f64| log_sum_exp(&lens.iter().map(|l| t * l).collect::<Vec<_>>());
    // 𝒬 is decreasing once every band is shorter than 1; at low orders
    // (e.g. the two order-0 bands of length 4) it may increase instead.
    let root = if q(-1.0) >= 0.0 {
        bisect_decreasing(q, -1.0, 1.5, ROOT_TOL)
    } else {
        bisect_decreasing(|t| -q(t), -1.0, 1.5, ROOT_TOL)
    };
    root.ok_or_else(|| Error::RootNotBracketed(format!("s_{n} not in [-1, 1.5]")))
}

/// Lower/upper pre-dimension proxies over a window of orders.
#[derive(Clone, Debug, Serialize)]
pub struct PreDimension {
    /// `min s_n` over the window (proxy for the lower limit).
    pub lower: f64,
    /// `max s_n` over the window (proxy for the upper limit).
    pub upper: f64,
    /// The window `[n₀, n₁]`.
    pub window: (usize, usize),
    /// `(n, s_n)` for every order in the window.
    pub values: Vec<(usize, f64)>,
}

/// Default window `[max(4, depth−4), depth]` (clamped to the depth).
pub fn default_window(depth: usize) -> (usize, usize) {
    (depth.saturating_sub(4).max(4).min(depth), depth)
}

/// `s_n` over a window (default [`default_window`]).
pub fn pre_dimension(tree: &BandTree, window: Option<(usize, usize)>) -> Result<PreDimension> {
    let (n0, n1) = window.unwrap_or_else(|| default_window(tree.depth()));
    if n0 > n1 || n1 > tree.depth() {
        return Err(Error::Domain(format!(
            "window [{n0}, {n1}] outside the tree depth {}",
            tree.depth()
        )));
    }
    let values: Vec<(usize, f64)> = (n0..=n1)
        .map(|n| Ok((n, solve_sn(tree, n)?)))
        .collect::<Result<_>>()?;
    let lower = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let upper = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(PreDimension {
        lower,
        upper,
        window: (n0, n1),
        values,
    })
}

/// How a pressure curve was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PressureMode {
    /// `𝒬(a,λ,t,n)/n` for one frequency from its full band tree.
    Deterministic,
    /// Monte-Carlo average over Gauss-distributed frequencies.
    Relativized,
}

/// A pressure curve on a grid of `t` values.
#[derive(Clone, Debug, Serialize)]
pub struct PressureCurve {
    /// Increasing grid in `[0, 1]`.
    pub t_grid: Vec<f64>,
    /// Pressure estimates.
    pub values: Vec<f64>,
    /// Standard errors (zero in deterministic mode).
    pub stderr: Vec<f64>,
    /// Depth.
    pub n: usize,
    /// Mode.
    pub mode: PressureMode,
    /// Coupling.
    pub lambda: f64,
}

impl PressureCurve {
    /// Strictly decreasing along the grid.
    pub fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }

    /// Decrease at least at rate `log 2` (within `3(σ₁+σ₂)`).
    pub fn has_log2_slope(&self) -> bool {
        (0..self.values.len().saturating_sub(1)).all(|i| {
            let dt = self.t_grid[i + 1] - self.t_grid[i];
            self.values[i + 1] - self.values[i]
                <= -dt * std::f64::consts::LN_2
                    + 3.0 * (self.stderr[i] + self.stderr[i + 1])
                    + 1e-12
        })
    }

    /// Midpoint convexity on consecutive grid triples within `3σ`
    /// (the grid must be uniform for this to be a midpoint test).
    pub fn is_midpoint_convex(&self) -> bool {
        (1..self.values.len().saturating_sub(1)).all(|i| {
            let mid = 0.5 * (self.values[i - 1] + self.values[i + 1]);
            let noise = 3.0
                * self.stderr[i - 1]
                    .max(self.stderr[i])
                    .max(self.stderr[i + 1]);
            self.values[i] <= mid + noise + 1e-12
        })
    }
}

/// `𝒬(a,λ,t,n)/n` on a grid from one full tree.
pub fn deterministic_pressure(tree: &BandTree, t_grid: &[f64], n: usize) -> Result<PressureCurve> {
    let values = t_grid
        .iter()
        .map(|&t| Ok(partition_log(tree, t, n)? / n as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureCurve {
        t_grid: t_grid.to_vec(),
        stderr: vec![0.0; values.len()],
        values,
        n,
        mode: PressureMode::Deterministic,
        lambda: tree.lambda,
    })
}

/// Options for the relativized pressure estimator.
#[derive(Clone, Copy, Debug)]
pub struct PressureOptions {
    /// Depth `n`.
    pub n: usize,
    /// Number of Gauss-distributed frequencies.
    pub samples: usize,
    /// Seed (frequency `i` uses stream `i`).
    pub seed: u64,
    /// Leaves drawn per frequency when the exact tree is too large.
    pub paths: usize,
    /// Build the full tree when `#Ω_n` is at most this.
    pub exact_budget: usize,
}

impl PressureOptions {
    /// Defaults: `n = 14`, 200 samples, 32 leaves, exact below 2000 bands.
    pub fn new(seed: u64) -> Self {
        Self {
            n: 14,
            samples: 200,
            seed,
            paths: 32,
            exact_budget: 2000,
        }
    }
}

/// Per-frequency band-length data.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyDraw {
    /// Digits `a₁..a_n`.
    pub digits: Vec<u32>,
    /// `log #Ω_n`.
    pub log_count: f64,
    /// Log-lengths of all order-`n` bands (`exact`) or of the sampled leaves.
    pub log_lens: Vec<f64>,
    /// Whether `log_lens` lists every band.
    pub exact: bool,
}

impl FrequencyDraw {
    /// `𝒬(a, λ, t, n)` (exact) or its estimate.
    pub fn q(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.log_count;
        }
        let xs: Vec<f64> = self.log_lens.iter().map(|l| t * l).collect();
        if self.exact {
            log_sum_exp(&xs)
        } else {
            self.log_count + log_sum_exp(&xs) - (xs.len() as f64).ln()
        }
    }
}

/// A reusable sample of frequencies and band lengths.
#[derive(Clone, Debug, Serialize)]
pub struct PressureSample {
    /// Coupling.
    pub lambda: f64,
    /// Depth.
    pub n: usize,
    /// Seed.
    pub seed: u64,
    /// One entry per frequency, in stream order.
    pub draws: Vec<FrequencyDraw>,
}

/// Log-lengths of `k` order-`n` bands drawn uniformly from `Ω_n`.
fn sample_leaves(
    digits: &[u32],
    lambda: f64,
    n: usize,
    k: usize,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<f64>> {
    let mut cache: HashMap<Word, Band> = HashMap::new();
    let roots = order_zero_bands(lambda);
    // weight(t, level) = number of leaves below a band of type t at `level`.
    let leaves_below = |t: BandType, level: usize| -> Integer {
        descendant_counts(&digits[level..n], &end_vector(None))[slot(t)].clone()
    };
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let weights: Vec<Integer> = roots.iter().map(|b| leaves_below(b.band_type, 0)).collect();
        let mut band = roots[pick_weighted(&weights, rng)].clone();
        for level in 0..n {
            let kids = crate::coding::children_in_order(band.band_type, digits[level]);
            let weights: Vec<Integer> = kids
                .iter()
                .map(|l| leaves_below(l.band_type, level + 1))
                .collect();
            let pos = pick_weighted(&weights, rng);
            let code = band.code.child(kids[pos]);
            band = match cache.get(&code) {
                Some(b) => b.clone(),
                None => {
                    let b = expand_band_child(digits, lambda, &band, pos)?;
                    cache.insert(code, b.clone());
                    b
                }
            };
        }
        out.push(band.log_len);
    }
    Ok(out)
}

fn slot(t: BandType) -> usize {
    t.number() as usize - 1
}

impl PressureSample {
    /// Draw `samples` frequencies and their band data.
    pub fn draw(lambda: f64, opts: PressureOptions) -> Result<Self> {
        if lambda < 24.0 {
            return Err(Error::Domain(format!(
                "relativized pressure needs lambda >= 24, got {lambda}"
            )));
        }
        let draws = (0..opts.samples as u64)
            .into_par_iter()
            .map(|i| Self::draw_one(lambda, &opts, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda,
            n: opts.n,
            seed: opts.seed,
            draws,
        })
    }

    /// The band data of frequency number `i` (stream `i`).
    pub fn draw_one(lambda: f64, opts: &PressureOptions, i: u64) -> Result<FrequencyDraw> {
        let n = opts.n;
        let f = GaussSampler::new(opts.seed, i).sample(n)?;
        let digits = f.prefix(n)?;
        let count = count_words(Start::Boundary, &digits, None);
        let log_count = crate::cf::ln_integer(&count);
        if count <= opts.exact_budget as u64 {
            let tree = build_band_tree(&f, lambda, n)?;
            let log_lens = tree.level(n).iter().map(|b| b.log_len).collect();
            Ok(FrequencyDraw {
                digits,
                log_count,
                log_lens,
                exact: true,
            })
        } else {
            #[allow(clippy::unusual_byte_groupings)]
            let mut rng = ChaCha20Rng::seed_from_u64(opts.seed ^ 0x5eed_0f_1ea7e5);
            rng.set_stream(i);
            let log_lens = sample_leaves(&digits, lambda, n, opts.paths, &mut rng)?;
            Ok(FrequencyDraw {
                digits,
                log_count,
                log_lens,
                exact: false,
            })
        }
    }

    /// `(P̂(t), stderr)`.
    pub fn pressure(&self, t: f64) -> (f64, f64) {
        let xs: Vec<f64> = self.draws.iter().map(|d| d.q(t) / self.n as f64).collect();
        mean_stderr(&xs)
    }

    /// The curve on a grid.
    pub fn curve(&self, t_grid: &[f64]) -> PressureCurve {
        let (values, stderr) = t_grid.iter().map(|&t| self.pressure(t)).unzip();
        PressureCurve {
            t_grid: t_grid.to_vec(),
            values,
            stderr,
            n: self.n,
            mode: PressureMode::Relativized,
            lambda: self.lambda,
        }
    }

    /// Zero of the averaged curve, with the bracket where `P̂ ∓ 3σ` vanish.
    pub fn zero(&self) -> Result<DimensionEstimate> {
        let p = |t: f64| self.pressure(t).0;
        let value = bisect_decreasing(p, 0.0, 1.0, 1e-6).ok_or_else(|| {
            Error::RootNotBracketed(format!("P̂(1) = {:.4} is not negative", p(1.0)))
        })?;
        let hi = bisect_decreasing(
            |t| {
                let (m, s) = self.pressure(t);
                m + 3.0 * s
            },
            0.0,
            1.0,
            1e-6,
        )
        .unwrap_or(1.0);
        let lo = bisect_decreasing(
            |t| {
                let (m, s) = self.pressure(t);
                m - 3.0 * s
            },
            0.0,
            1.0,
            1e-6,
        )
        .unwrap_or(0.0);
        // Standard error of the root by the delta method.
        let h = 1e-3;
        let slope = (p((value + h).min(1.0)) - p((value - h).max(0.0))) / (2.0 * h);
        let stderr = self.pressure(value).1 / slope.abs();
        Ok(DimensionEstimate {
            value,
            lo: lo.min(value),
            hi: hi.max(value),
            stderr,
            method: DimensionMethod::PressureZero,
            diagnostics: format!(
                "n={}, samples={}, seed={}, exact draws={}",
                self.n,
                self.draws.len(),
                self.seed,
                self.draws.iter().filter(|d| d.exact).count()
            ),
        })
    }
}

/// `(P̂(t), stderr)` for one `t`.
pub fn relativized_pressure(
    lambda: f64,
    t: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    let s = PressureSample::draw(
        lambda,
        PressureOptions {
            n,
            samples,
            ..PressureOptions::new(seed)
        },
    )?;
    Ok(s.pressure(t))
}

/// How a dimension estimate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DimensionMethod {
    /// Root `s_n` of a deterministic partition function.
    SnRoot,
    /// Zero of the relativized pressure.
    PressureZero,
    /// Ratio of averaged Birkhoff sums.
    Ratio,
}

/// A dimension estimate with its bracket.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    /// Point estimate.
    pub value: f64,
    /// Lower end of the bracket.
    pub lo: f64,
    /// Upper end of the bracket.
    pub hi: f64,
    /// Standard error (0 for deterministic roots).
    pub stderr: f64,
    /// Method.
    pub method: DimensionMethod,
    /// Window/sample metadata.
    pub diagnostics: String,
}

/// `D̂(λ)`: the zero of the relativized pressure.
pub fn solve_d(lambda: f64, n: usize, samples: usize, seed: u64) -> Result<DimensionEstimate> {
    PressureSample::draw(
        lambda,
        PressureOptions {
            n,
            samples,
            ..PressureOptions::new(seed)
        },
    )?
    .zero()
}

/// The matrices `R_k(x)`.
#[derive(Clone, Copy, Debug)]
pub struct LyapunovCocycle {
    /// Parameter `x ∈ [0, 1]`.
    pub x: f64,
}

impl LyapunovCocycle {
    /// `R_k(x) = [[0, x^{k−1}, 0], [(k+1)x, 0, kx], [kx, 0, (k−1)x]]`.
    pub fn matrix(&self, k: u32) -> Matrix3<f64> {
        let (x, kf) = (self.x, f64::from(k));
        Matrix3::new(
            0.0,
            x.powi(k as i32 - 1),
            0.0,
            (kf + 1.0) * x,
            0.0,
            kf * x,
            kf * x,
            0.0,
            (kf - 1.0) * x,
        )
    }

    /// `log ‖R_{a₁}(x)⋯R_{a_n}(x)‖₂`, renormalised every 32 factors.
    pub fn log_norm(&self, digits: &[u32]) -> f64 {
        let mut acc = 0.0;
        let mut m: Matrix3<f64> = Matrix3::identity();
        for (i, &a) in digits.iter().enumerate() {
            m *= self.matrix(a);
            if (i + 1) % 32 == 0 {
                let s: f64 = m.amax();
                if s == 0.0 {
                    return f64::NEG_INFINITY;
                }
                m /= s;
                acc += s.ln();
            }
        }
        let sv = m.singular_values().max();
        if sv == 0.0 {
            f64::NEG_INFINITY
        } else {
            acc + sv.ln()
        }
    }
}

/// Gauss-distributed digit strings shared by all `x` (common random numbers).
#[derive(Clone, Debug)]
pub struct CocycleSample {
    /// Digit strings.
    pub digits: Vec<Vec<u32>>,
}

impl CocycleSample {
    /// `samples` strings of length `n`.
    pub fn draw(n: usize, samples: usize, seed: u64) -> Result<Self> {
        let digits = (0..samples as u64)
            .into_par_iter()
            .map(|i| GaussSampler::new(seed, i).sample(n)?.prefix(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { digits })
    }

    /// `(φ̂(x), stderr)`; `φ̂(0) = −∞`.
    pub fn phi(&self, x: f64) -> (f64, f64) {
        if x <= 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        let c = LyapunovCocycle { x };
        let xs: Vec<f64> = self
            .digits
            .iter()
            .map(|d| c.log_norm(d) / d.len() as f64)
            .collect();
        mean_stderr(&xs)
    }
}

/// `(φ̂(x), stderr)`.
pub fn phi_estimate(x: f64, n: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1], got {x}")));
    }
    Ok(CocycleSample::draw(n, samples, seed)?.phi(x))
}

/// `ρ̂` with its statistical bracket.
#[derive(Clone, Debug, Serialize)]
pub struct RhoEstimate {
    /// `ρ̂ = 1/x̂` with `φ̂(x̂) = 0`.
    pub rho: f64,
    /// `[ρ_lo, ρ_hi]` from the zeros of `φ̂ ± 3σ`.
    pub bracket: (f64, f64),
    /// `x̂`.
    pub x: f64,
}

fn bisect_increasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// `ρ̂` from the zero of `φ̂` on `(0, 1]`.
pub fn rho_estimate(n: usize, samples: usize, seed: u64, tol: f64) -> Result<RhoEstimate> {
    let s = CocycleSample::draw(n, samples, seed)?;
    if s.phi(1.0).0 <= 0.0 {
        return Err(Error::RootNotBracketed("φ̂(1) is not positive".into()));
    }
    let x = bisect_increasing(|x| s.phi(x).0, 0.0, 1.0, tol);
    let x_lo = bisect_increasing(
        |x| {
            let (m, e) = s.phi(x);
            m + 3.0 * e
        },
        0.0,
        1.0,
        tol,
    );
    let x_hi = bisect_increasing(
        |x| {
            let (m, e) = s.phi(x);
            m - 3.0 * e
        },
        0.0,
        1.0,
        tol,
    );
    Ok(RhoEstimate {
        rho: 1.0 / x,
        bracket: (1.0 / x_hi, 1.0 / x_lo),
        x,
    })
}

/// The analytic envelope of `D(λ)` in terms of `ρ`:
/// `log ρ / (6 log 4κ² + log 2(λ+5)) ≤ D ≤ log ρ / log((λ−8)/3)`.
pub fn dimension_envelope(lambda: f64, rho: f64) -> (f64, f64) {
    let k = crate::cf::KHINCHIN;
    let lr = rho.ln();
    (
        lr / (6.0 * (4.0 * k * k).ln() + (2.0 * (lambda + 5.0)).ln()),
        lr / ((lambda - 8.0) / 3.0).ln(),
    )
}

/// `γ = π²/(12 log 2)`.
pub fn gamma() -> f64 {
    LEVY
}

/// `s_n` for a one-off frequency (builds the tree).
pub fn sn_of(f: &crate::cf::Frequency, lambda: f64, n: usize) -> Result<f64> {
    solve_sn(&build_band_tree(f, lambda, n)?, n)
}

/// Number of children of every type (re-exported helper for estimators).
pub fn children_total(t: BandType, a: u32) -> usize {
    child_count(t, a)
}
