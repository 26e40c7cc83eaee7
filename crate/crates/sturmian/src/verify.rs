//! Invariant suites shared by the command-line runner and the tests.
//!
//! Every suite returns a list of [`Check`]s: a named invariant, whether it
//! held, and the measured constants behind the verdict.  Theorem-backed
//! checks are exact (no tolerance); statistical checks use `3σ` bands and
//! trend checks record the whole sequence they judged.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rug::{Float, Integer, Rational};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cf::{
    cf_expand, convergents, levy_khinchin_estimate, Frequency, GaussSampler, KHINCHIN, LEVY,
};
use crate::coding::{
    a_hat_product, children_in_order, count_words, enumerate_words, BandType, Start,
    DEFAULT_ENUMERATION_CAP,
};
use crate::dimension::{
    dimension_envelope, partition_log, rho_estimate, solve_sn, CocycleSample, DimensionEstimate,
    PressureOptions, PressureSample,
};
use crate::dos::{
    band_eigen_counts, dos_dimension, dos_mass, dos_masses_of_order, eta, psi_lyapunov_estimate,
    theta_estimate, vartheta, PeriodicApproximant, PsiMode, DEFAULT_TRUNCATION,
};
use crate::error::{Error, Result};
use crate::spectrum::{
    build_band_tree, chebyshev_family, gap_ratio_check, gaps_of_order, genpoly_dual, BandTree,
    GapKind,
};

/// Outcome of one invariant.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    /// Suite name.
    pub suite: String,
    /// Invariant name.
    pub name: String,
    /// Verdict.
    pub passed: bool,
    /// Measured constants.
    pub measured: Value,
}

impl Check {
    fn new(suite: Suite, name: &str, passed: bool, measured: Value) -> Self {
        Self {
            suite: suite.to_string(),
            name: name.to_string(),
            passed,
            measured,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {}/{} {}",
            self.suite, self.name, self.measured
        )
    }
}

/// A named group of invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Continued fractions.
    Cf,
    /// Alphabets and counting.
    Coding,
    /// Band coverings.
    Covering,
    /// Chebyshev interval families.
    Chebyshev,
    /// Gap ratios.
    Gaps,
    /// Pressure, `D(λ)`, `φ`, `ρ`.
    Pressure,
    /// Density of states.
    Dos,
    /// Every suite above.
    All,
}

impl Suite {
    /// The individual suites, in run order.
    pub const EACH: [Suite; 7] = [
        Suite::Cf,
        Suite::Coding,
        Suite::Covering,
        Suite::Chebyshev,
        Suite::Gaps,
        Suite::Pressure,
        Suite::Dos,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Cf => "cf",
            Suite::Coding => "coding",
            Suite::Covering => "covering",
            Suite::Chebyshev => "chebyshev",
            Suite::Gaps => "gaps",
            Suite::Pressure => "pressure",
            Suite::Dos => "dos",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cf" => Suite::Cf,
            "coding" => Suite::Coding,
            "covering" => Suite::Covering,
            "chebyshev" => Suite::Chebyshev,
            "gaps" => Suite::Gaps,
            "pressure" => Suite::Pressure,
            "dos" => Suite::Dos,
            "all" => Suite::All,
            _ => return Err(Error::Domain(format!("unknown suite {s:?}"))),
        })
    }
}

/// The three frequencies used by the structural suites:
/// `[1,1,…]`, `[2,2,…]` and `[1,2,1,2,…]`.
pub fn test_frequencies() -> Vec<Frequency> {
    vec![
        Frequency::constant(1).expect("valid digit"),
        Frequency::constant(2).expect("valid digit"),
        Frequency::periodic(vec![], vec![1, 2]).expect("valid period"),
    ]
}

/// Parameters of a verification run.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Frequencies for the structural suites.
    pub frequencies: Vec<Frequency>,
    /// Coupling.
    pub lambda: f64,
    /// Tree depth for covering/gaps (`None`: suite default 8).
    pub depth: Option<usize>,
    /// Monte-Carlo samples.
    pub samples: usize,
    /// Seed.
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            frequencies: test_frequencies(),
            lambda: 24.0,
            depth: None,
            samples: 200,
            seed: 7,
        }
    }
}

/// Runs suites, sharing expensive intermediate results between them.
pub struct Verifier {
    cfg: VerifyConfig,
    bowen: OnceLock<std::result::Result<DimensionEstimate, String>>,
}

impl Verifier {
    /// New runner.
    pub fn new(cfg: VerifyConfig) -> Self {
        Self {
            cfg,
            bowen: OnceLock::new(),
        }
    }

    /// Run one suite (or all of them).
    pub fn run(&self, suite: Suite) -> Result<Vec<Check>> {
        match suite {
            Suite::All => {
                let mut out = Vec::new();
                for s in Suite::EACH {
                    out.extend(self.run(s)?);
                }
                Ok(out)
            }
            Suite::Cf => self.cf(),
            Suite::Coding => self.coding(),
            Suite::Covering => self.covering(),
            Suite::Chebyshev => Ok(chebyshev_suite(200)),
            Suite::Gaps => self.gaps(),
            Suite::Pressure => self.pressure(),
            Suite::Dos => self.dos(),
        }
    }

    fn depth(&self) -> usize {
        self.cfg.depth.unwrap_or(8)
    }

    /// `D̂(λ)` at depth 14 (computed once).
    pub fn bowen_dimension(&self) -> Result<DimensionEstimate> {
        let cfg = &self.cfg;
        self.bowen
            .get_or_init(|| {
                let opts = PressureOptions {
                    n: 14,
                    samples: cfg.samples,
                    ..PressureOptions::new(cfg.seed)
                };
                PressureSample::draw(cfg.lambda, opts)
                    .and_then(|s| s.zero())
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(Error::Verification)
    }

    fn cf(&self) -> Result<Vec<Check>> {
        let s = Suite::Cf;
        let mut out = Vec::new();
        let (ok, checked) = denominator_bounds_exhaustive(10);
        out.push(Check::new(
            s,
            "q-multiplicativity-exhaustive",
            ok,
            json!({"max_len": 10, "digits": "1..4", "triples": checked}),
        ));
        let (ok, checked) = denominator_bounds_random(15, 20_000, self.cfg.seed);
        out.push(Check::new(
            s,
            "q-multiplicativity-random",
            ok,
            json!({"max_n": 15, "max_m": 15, "triples": checked}),
        ));
        let mut rt = true;
        let mut freqs = self.cfg.frequencies.clone();
        for i in 0..16 {
            freqs.push(GaussSampler::new(self.cfg.seed, i).sample(40)?);
        }
        for f in &freqs {
            let n = 20;
            let t = convergents(f, 2 * n)?;
            let x = Float::with_val(
                512,
                Rational::from((t.p(2 * n as isize).clone(), t.q(2 * n as isize).clone())),
            );
            rt &= cf_expand(&x, n)? == f.prefix(n)?;
        }
        out.push(Check::new(
            s,
            "round-trip",
            rt,
            json!({"frequencies": freqs.len(), "digits": 20}),
        ));
        let lk = levy_khinchin_estimate(self.cfg.seed, 10_000, 200)?;
        let g_err = (lk.gamma - LEVY).abs() / LEVY;
        out.push(Check::new(
            s,
            "levy",
            g_err <= 0.01,
            json!({"gamma": lk.gamma, "stderr": lk.gamma_stderr, "rel_err": g_err}),
        ));
        let lk = levy_khinchin_estimate(self.cfg.seed ^ 1, 200, 10_000)?;
        let k_err = (lk.kappa - KHINCHIN).abs() / KHINCHIN;
        out.push(Check::new(
            s,
            "khinchin",
            k_err <= 0.02,
            json!({"kappa": lk.kappa, "stderr": lk.kappa_stderr, "rel_err": k_err}),
        ));
        Ok(out)
    }

    fn coding(&self) -> Result<Vec<Check>> {
        let s = Suite::Coding;
        let mut out = Vec::new();
        let (ok, words) = counting_oracle(5)?;
        out.push(Check::new(
            s,
            "matrix-vs-enumeration",
            ok,
            json!({"max_len": 5, "digits": "1..4", "words": words}),
        ));
        let ok = all_sequences(6, 5).all(|a| a_hat_product(&a).iter().flatten().all(|x| *x > 0));
        out.push(Check::new(
            s,
            "primitivity",
            ok,
            json!({"len": 6, "digits": "1..5"}),
        ));
        let mut ok = true;
        let mut worst = (f64::INFINITY, 0.0f64);
        for f in &self.cfg.frequencies {
            for n in 1..=20 {
                let d = f.prefix(n)?;
                let r = ratio(
                    &count_words(Start::Boundary, &d, None),
                    &crate::cf::q_of(&d),
                );
                ok &= (1.0..=5.0).contains(&r);
                worst = (worst.0.min(r), worst.1.max(r));
            }
        }
        out.push(Check::new(
            s,
            "coding-space-size",
            ok,
            json!({"min_ratio": worst.0, "max_ratio": worst.1, "bound": [1, 5]}),
        ));
        let mut ok = true;
        let mut worst = (f64::INFINITY, 0.0f64);
        for n in 1..=8 {
            for d in all_sequences(n, 4) {
                let r = ratio(&count_words(Start::Fiber, &d, None), &crate::cf::q_of(&d));
                ok &= (1.0..=10.0).contains(&r);
                worst = (worst.0.min(r), worst.1.max(r));
            }
        }
        out.push(Check::new(
            s,
            "fiber-size",
            ok,
            json!({"min_ratio": worst.0, "max_ratio": worst.1, "bound": [1, 10]}),
        ));
        let c = cardinality_asymptotics(10);
        out.push(Check::new(
            s,
            "cardinality-brackets",
            c.brackets_ok,
            json!({"len": 10, "ratios": c.ranges, "bracket": [1.0 / 64.0, 64.0]}),
        ));
        out.push(Check::new(
            s,
            "cardinality-recurrences",
            c.recurrences_ok,
            json!({"len": 10}),
        ));
        out.push(Check::new(
            s,
            "type-balance",
            c.balance_ok,
            json!({"len": 10}),
        ));
        Ok(out)
    }

    fn covering(&self) -> Result<Vec<Check>> {
        let s = Suite::Covering;
        let mut out = Vec::new();
        for f in &self.cfg.frequencies {
            let tree = build_band_tree(f, self.cfg.lambda, self.depth())?;
            let name = |x: &str| format!("{x}[{}]", short(f));
            let c = covering_report(&tree)?;
            out.push(Check::new(
                s,
                &name("children"),
                c.children_ok,
                json!({"bands": c.bands}),
            ));
            out.push(Check::new(
                s,
                &name("counts"),
                c.counts_ok,
                json!({"per_order": c.per_order}),
            ));
            out.push(Check::new(s, &name("nesting"), c.nesting_ok, json!({})));
            out.push(Check::new(
                s,
                &name("length-envelope"),
                c.envelope_ok,
                json!({"worst_slack": c.envelope_slack}),
            ));
            out.push(Check::new(
                s,
                &name("dyadic-length"),
                c.dyadic_repeat_bound_ok,
                json!({"bands_above_2^(2-n)": c.dyadic_violations}),
            ));
            let (ok, orders) = sigma_identity(&tree, 6)?;
            out.push(Check::new(
                s,
                &name("sigma-identity"),
                ok,
                json!({"orders": orders}),
            ));
            let v = bounded_variation(&tree, 4.min(tree.depth()));
            out.push(Check::new(
                s,
                &name("bounded-variation"),
                v.is_finite(),
                json!({"max_derivative_ratio": v}),
            ));
        }
        Ok(out)
    }

    fn gaps(&self) -> Result<Vec<Check>> {
        let s = Suite::Gaps;
        let mut out = Vec::new();
        let max_order = self.depth();
        for f in &self.cfg.frequencies {
            let tree = build_band_tree(f, self.cfg.lambda, max_order + 1)?;
            let name = |x: &str| format!("{x}[{}]", short(f));
            let g = gap_stability(&tree, max_order)?;
            out.push(Check::new(
                s,
                &name("ratio-positive"),
                g.global > 0.0,
                json!({"global_min": g.global, "per_order": g.per_order}),
            ));
            out.push(Check::new(
                s,
                &name("ratio-stable"),
                g.rel_change <= 0.2,
                json!({"min_upto_half": g.half, "min_upto_full": g.global, "rel_change": g.rel_change}),
            ));
            let lam = self.cfg.lambda;
            out.push(Check::new(
                s,
                &name("order-minus-one"),
                // Exact identity up to the rounding of the two logarithms.
                g.order_minus_one >= (lam - 4.0) / (lam + 4.0) * (1.0 - 1e-12),
                json!({"ratio": g.order_minus_one, "bound": (lam - 4.0) / (lam + 4.0)}),
            ));
            out.push(Check::new(
                s,
                &name("gap-counts"),
                gap_counts_ok(&tree, max_order)?,
                json!({}),
            ));
        }
        Ok(out)
    }

    fn pressure(&self) -> Result<Vec<Check>> {
        let s = Suite::Pressure;
        let cfg = &self.cfg;
        let mut out = Vec::new();
        // Deterministic anchors.
        let tree = build_band_tree(&cfg.frequencies[0], cfg.lambda, 10)?;
        let q0 = partition_log(&tree, 0.0, 10)?;
        let count = count_words(Start::Boundary, &tree.digits, None);
        let exact = (q0 - crate::cf::ln_integer(&count)).abs() < 1e-12;
        let s0 = solve_sn(&tree, 0)?;
        out.push(Check::new(
            s,
            "partition-anchors",
            exact && (s0 + 0.5).abs() < 1e-9,
            json!({"s0": s0}),
        ));
        // Relativized pressure.
        let opts = PressureOptions {
            n: 14,
            samples: cfg.samples,
            ..PressureOptions::new(cfg.seed)
        };
        let sample = PressureSample::draw(cfg.lambda, opts)?;
        let (p0, e0) = sample.pressure(0.0);
        out.push(Check::new(
            s,
            "pressure-at-zero",
            (p0 - LEVY).abs() <= 3.0 * e0,
            json!({"p0": p0, "stderr": e0, "gamma": LEVY}),
        ));
        let grid: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
        let curve = sample.curve(&grid);
        out.push(Check::new(
            s,
            "curve-shape",
            curve.is_decreasing() && curve.has_log2_slope() && curve.is_midpoint_convex(),
            json!({"values": curve.values, "stderr": curve.stderr}),
        ));
        let lo_env = curve
            .t_grid
            .iter()
            .zip(&curve.values)
            .zip(&curve.stderr)
            .all(|((&t, &v), &e)| {
                v >= -t * (8.0 * KHINCHIN * cfg.lambda).ln() - 3.0 * e
                    && v <= LEVY - t * 2f64.ln() + 3.0 * e
            });
        out.push(Check::new(s, "pressure-envelope", lo_env, json!({})));
        let d = sample.zero()?;
        let _ = self.bowen.set(Ok(d.clone()));
        out.push(Check::new(
            s,
            "dimension-range",
            d.value > 0.0 && d.value < 1.0,
            json!(d),
        ));
        // Cocycle.
        let cs = CocycleSample::draw(1000, 100, cfg.seed)?;
        let (p1, _) = cs.phi(1.0);
        let mono = [0.2, 0.5, 0.9].map(|x| cs.phi(x));
        let increasing = mono
            .windows(2)
            .all(|w| w[1].0 - w[0].0 > 3.0 * (w[0].1 + w[1].1));
        out.push(Check::new(
            s,
            "phi-monotone",
            increasing && cs.phi(0.0).0 == f64::NEG_INFINITY,
            json!({"phi": mono.map(|p| p.0)}),
        ));
        let e1 = p1.exp();
        out.push(Check::new(
            s,
            "phi-at-one",
            e1 >= KHINCHIN / 2.0 && e1 <= KHINCHIN * 2f64.sqrt(),
            json!({"exp_phi": e1}),
        ));
        let rho = rho_estimate(1000, 100, cfg.seed, 1e-6)?;
        out.push(Check::new(
            s,
            "rho-range",
            rho.rho >= KHINCHIN / 2.0 && rho.rho <= 2.0 * KHINCHIN * KHINCHIN,
            json!(rho),
        ));
        let (lo, hi) = dimension_envelope(cfg.lambda, rho.rho);
        out.push(Check::new(
            s,
            "dimension-envelope",
            d.hi >= lo && d.lo <= hi,
            json!({"envelope": [lo, hi], "estimate": [d.lo, d.value, d.hi]}),
        ));
        Ok(out)
    }

    fn dos(&self) -> Result<Vec<Check>> {
        let s = Suite::Dos;
        let cfg = &self.cfg;
        let mut out = Vec::new();
        let (ok, rows) = one_per_band(cfg.lambda)?;
        out.push(Check::new(s, "one-eigenvalue-per-band", ok, json!(rows)));
        let (ok, lo, hi) = mass_law(&cfg.frequencies, 6)?;
        out.push(Check::new(
            s,
            "mass-law",
            ok,
            json!({"min": lo, "max": hi, "bracket": [1.0 / 64.0, 64.0]}),
        ));
        let ok = mass_telescoping(&cfg.frequencies, 5)?;
        out.push(Check::new(s, "mass-telescoping", ok, json!({})));
        let (ok, dev) = counting_vs_mass(cfg.lambda)?;
        out.push(Check::new(
            s,
            "counting-vs-mass",
            ok,
            json!({"max_abs_diff": dev}),
        ));
        let dd = dos_dimension(cfg.lambda, 12, cfg.samples, cfg.seed)?;
        let bowen = self.bowen_dimension()?;
        out.push(Check::new(
            s,
            "dos-dimension",
            dd.d_hat > 0.0 && dd.d_hat < 1.0 && dd.d_hat <= bowen.value + 3.0 * bowen.stderr,
            json!({"d_hat": dd.d_hat, "d_stderr": dd.d_stderr, "bowen": bowen.value, "bowen_stderr": bowen.stderr}),
        ));
        let n = dd.n as f64;
        let psi_ok = dd.table.iter().all(|p| {
            let psi = p.psi.unwrap_or(f64::NAN);
            let tau2 = 2.0 * (cfg.lambda + 5.0);
            let sum_log_a: f64 = p.digits.iter().map(|&a| f64::from(a).ln()).sum();
            let lower = -tau2.ln() - 3.0 * sum_log_a - tau2.ln() * p.theta * n;
            psi <= (1.0 - n) * 2f64.ln() && psi >= lower - 1e-9
        });
        out.push(Check::new(
            s,
            "psi-bounds",
            psi_ok,
            json!({"paths": dd.table.len()}),
        ));
        let tau1 = (cfg.lambda - 8.0) / 3.0;
        let tau2 = 2.0 * (cfg.lambda + 5.0);
        let sig = 3.0 * dd.l_stderr;
        let env = (
            dd.theta * tau1.ln() - sig,
            dd.theta * tau2.ln() + 3.0 * KHINCHIN.ln() + sig,
        );
        out.push(Check::new(
            s,
            "lyapunov-envelope",
            dd.l_hat >= env.0 && dd.l_hat <= env.1,
            json!({"l_hat": dd.l_hat, "envelope": [env.0, env.1], "theta": dd.theta}),
        ));
        let fib = psi_lyapunov_estimate(
            1e4,
            12,
            100,
            cfg.seed,
            PsiMode::Fixed(Frequency::constant(1)?),
        )?;
        let target = 4.0 / (5.0 + 5f64.sqrt());
        let r = fib.l_hat / 1e4f64.ln();
        out.push(Check::new(
            s,
            "fibonacci-scaling",
            (r - target).abs() <= 0.15 * target,
            json!({"ratio": r, "target": target}),
        ));
        let t1 = theta_estimate(30, 4000, cfg.seed)?;
        let t2 = theta_estimate(30, 4000, cfg.seed.wrapping_add(0x9e37_79b9))?;
        let rel = (t1.theta - t2.theta).abs() / t1.theta.min(t2.theta);
        out.push(Check::new(
            s,
            "theta-stability",
            t1.theta.is_finite() && t1.theta > 0.0 && rel <= 0.05,
            json!({"theta": [t1.theta, t2.theta], "stderr": [t1.stderr, t2.stderr], "rel_diff": rel, "varrho": (LEVY / t1.theta).exp()}),
        ));
        Ok(out)
    }
}

/// Run a suite with a fresh [`Verifier`].
pub fn verify_suite(suite: Suite, cfg: VerifyConfig) -> Result<Vec<Check>> {
    Verifier::new(cfg).run(suite)
}

fn short(f: &Frequency) -> String {
    match f.periodic_tail() {
        Some(t) if f.stored_digits().is_empty() => {
            t.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
                + ",..."
        }
        _ => f.prefix(4).map(|d| format!("{d:?}")).unwrap_or_default(),
    }
}

fn ratio(a: &Integer, b: &Integer) -> f64 {
    Rational::from((a.clone(), b.clone())).to_f64()
}

/// All sequences of length `n` over `1..=k`, lexicographically.
pub fn all_sequences(n: usize, k: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (k as usize).pow(n as u32);
    (0..total).map(move |mut i| {
        let mut v = vec![1u32; n];
        for j in (0..n).rev() {
            v[j] = 1 + (i % k as usize) as u32;
            i /= k as usize;
        }
        v
    })
}

fn q_u128(d: &[u32]) -> u128 {
    let (mut a, mut b) = (0u128, 1u128);
    for &x in d {
        let c = b * u128::from(x) + a;
        a = b;
        b = c;
    }
    b
}

fn denominator_bounds_hold(d: &[u32], n: usize) -> bool {
    let (qn, qm, qnm) = (q_u128(&d[..n]), q_u128(&d[n..]), q_u128(d));
    qn * qm <= qnm && qnm <= 2 * qn * qm
}

/// `q_n·q_m(Sⁿa) ≤ q_{n+m} ≤ 2 q_n·q_m(Sⁿa)` for every split of every
/// digit string in `{1..4}^L`, `2 ≤ L ≤ max_len`.
pub fn denominator_bounds_exhaustive(max_len: usize) -> (bool, u64) {
    let mut checked = 0u64;
    let mut ok = true;
    for len in 2..=max_len {
        for d in all_sequences(len, 4) {
            for n in 1..len {
                ok &= denominator_bounds_hold(&d, n);
                checked += 1;
            }
        }
    }
    (ok, checked)
}

/// The same inequalities on seeded random strings with `n, m ≤ max`.
pub fn denominator_bounds_random(max: usize, trials: usize, seed: u64) -> (bool, u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut ok = true;
    for _ in 0..trials {
        let n = rng.gen_range(1..=max);
        let m = rng.gen_range(1..=max);
        let d: Vec<u32> = (0..n + m).map(|_| rng.gen_range(1..=4)).collect();
        ok &= denominator_bounds_hold(&d, n);
    }
    (ok, trials as u64)
}

/// Matrix counts against explicit enumeration for every start, end filter
/// and digit string in `{1..4}^k`, `k ≤ max_len`; returns the number of
/// words enumerated.
pub fn counting_oracle(max_len: usize) -> Result<(bool, u64)> {
    let starts = [
        Start::Boundary,
        Start::Fiber,
        Start::Type(BandType::One),
        Start::Type(BandType::Two),
        Start::Type(BandType::Three),
    ];
    let filters = [
        None,
        Some(BandType::One),
        Some(BandType::Two),
        Some(BandType::Three),
    ];
    let mut ok = true;
    let mut words = 0u64;
    for k in 1..=max_len {
        for d in all_sequences(k, 4) {
            for &st in &starts {
                for &fl in &filters {
                    let listed = enumerate_words(st, &d, fl, DEFAULT_ENUMERATION_CAP)?;
                    let adm = listed
                        .iter()
                        .all(|w| w.is_admissible() && w.matches_levels(&d));
                    ok &= adm && count_words(st, &d, fl) == listed.len();
                    words += listed.len() as u64;
                }
            }
        }
    }
    Ok((ok, words))
}

/// Outcome of the cardinality checks on `{1..4}^n`.
#[derive(Clone, Debug, Serialize)]
pub struct Cardinalities {
    /// `[min, max]` of `#Ξ(1)·a₁/q`, `#Ξ(2)/q`, `#Ξ(3)·η₃/q`,
    /// `#Ξ(t,{2,3})/#Ξ(t)`, `#Ξ(2,·,1)/q`.
    pub ranges: Vec<(f64, f64)>,
    /// All ratios within `[1/64, 64]`.
    pub brackets_ok: bool,
    /// The first-letter recurrences hold exactly.
    pub recurrences_ok: bool,
    /// `#Ξ(t,·,2)+#Ξ(t,·,3) ≥ #Ξ(t,·,1)/2` for every `t`.
    pub balance_ok: bool,
}

/// Counts `#Ξ(t, ā, t')` for all `t, t'` as `[t][t']`, by the first-letter
/// recurrence (independent of the matrix product).
fn xi_table(d: &[u32]) -> [[u64; 3]; 3] {
    // Row t: counts by end type for words after a band of type t.
    let mut c = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    // Empty word: end type equals the start type.
    for &a in d.iter().rev() {
        let a = u64::from(a);
        let (one, two, three) = (c[0], c[1], c[2]);
        let comb = |x: [u64; 3], p: u64, y: [u64; 3], r: u64| {
            [
                x[0] * p + y[0] * r,
                x[1] * p + y[1] * r,
                x[2] * p + y[2] * r,
            ]
        };
        c = [two, comb(one, a + 1, three, a), comb(one, a, three, a - 1)];
    }
    c
}

/// Cardinality brackets, recurrences and type balance on `{1..4}^n`.
pub fn cardinality_asymptotics(n: usize) -> Cardinalities {
    let mut ranges = vec![(f64::INFINITY, 0.0f64); 5];
    let mut upd = |i: usize, r: f64| {
        ranges[i] = (ranges[i].0.min(r), ranges[i].1.max(r));
    };
    let mut recurrences_ok = true;
    let mut balance_ok = true;
    for d in all_sequences(n, 4) {
        let c = xi_table(&d);
        let tot = |t: usize| c[t].iter().sum::<u64>() as f64;
        let q = q_u128(&d) as f64;
        upd(0, tot(0) * f64::from(d[0]) / q);
        upd(1, tot(1) / q);
        let eta3 = if d[0] >= 2 { 1.0 } else { f64::from(d[1]) };
        upd(2, tot(2) * eta3 / q);
        for (t, ct) in c.iter().enumerate() {
            upd(3, (ct[1] + ct[2]) as f64 / tot(t));
            balance_ok &= 2 * (ct[1] + ct[2]) >= ct[0];
        }
        upd(4, c[1][0] as f64 / q);
        // The matrix product must reproduce the recurrence.
        let m = a_hat_product(&d);
        recurrences_ok &= (0..3).all(|t| (0..3).all(|u| m[t][u] == c[t][u]));
    }
    let brackets_ok = ranges
        .iter()
        .all(|&(lo, hi)| lo >= 1.0 / 64.0 && hi <= 64.0);
    Cardinalities {
        ranges,
        brackets_ok,
        recurrences_ok,
        balance_ok,
    }
}

/// Structural report of a band tree.
#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    /// Total number of bands.
    pub bands: usize,
    /// Every parent has exactly the mandated children, in order.
    pub children_ok: bool,
    /// Order-`n` totals equal the word counts.
    pub counts_ok: bool,
    /// `(order, bands, words)`.
    pub per_order: Vec<(usize, usize, String)>,
    /// Children inside parents; bands of one order disjoint.
    pub nesting_ok: bool,
    /// Two-sided length envelope holds for every band (`λ ≥ 20`).
    pub envelope_ok: bool,
    /// Smallest log-slack to either side of the envelope.
    pub envelope_slack: f64,
    /// Bands longer than `2^{2−n}` (each such band repeats an ancestor
    /// through type-2 letters at level 1).
    pub dyadic_violations: usize,
    /// `|B| ≤ 2^{2−n+r}` with `r` the number of type-2 letters at level 1.
    pub dyadic_repeat_bound_ok: bool,
}

/// Children, counts, nesting and the length envelope of `tree`.
pub fn covering_report(tree: &BandTree) -> Result<CoveringReport> {
    let mut children_ok = true;
    let mut nesting_ok = true;
    let mut per_order = Vec::new();
    let mut counts_ok = true;
    let mut bands = 0;
    for n in 0..=tree.depth() {
        let lvl = tree.level(n);
        bands += lvl.len();
        let words = count_words(Start::Boundary, &tree.digits[..n], None);
        counts_ok &= words == lvl.len();
        per_order.push((n, lvl.len(), words.to_string()));
        let mut sorted: Vec<_> = lvl.iter().collect();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        nesting_ok &= sorted.windows(2).all(|w| w[0].hi < w[1].lo);
        if n < tree.depth() {
            for b in lvl {
                let kids = tree.children_of(b);
                let want = children_in_order(b.band_type, tree.digits[n]);
                children_ok &= kids.len() == want.len()
                    && kids.iter().zip(&want).all(|(k, l)| {
                        k.code.letters.last() == Some(l) && k.band_type == l.band_type
                    });
                nesting_ok &= kids
                    .iter()
                    .all(|k| k.lo >= b.lo && k.hi <= b.hi && k.lo < k.hi);
            }
        }
    }
    let lam = tree.lambda;
    let (tau1, tau2) = ((lam - 8.0) / 3.0, 2.0 * (lam + 5.0));
    let mut slack = f64::INFINITY;
    let mut dyadic_violations = 0;
    let mut dyadic_repeat_bound_ok = true;
    if lam >= 20.0 {
        for n in 0..=tree.depth() {
            for b in tree.level(n) {
                let mut lower = -(n as f64) * tau2.ln();
                let mut upper = 4f64.ln() - (n as f64) * tau1.ln();
                // Type-2 letters at level 1 repeat their parent band.
                let mut repeats = 0;
                for l in &b.code.letters {
                    lower -= 3.0 * f64::from(l.level).ln();
                    if l.band_type == BandType::Two {
                        lower += (2.0 - f64::from(l.level)) * tau2.ln();
                        upper += (2.0 - f64::from(l.level)) * tau1.ln();
                        repeats += usize::from(l.level == 1);
                    }
                }
                let dyadic = (2.0 - n as f64) * 2f64.ln();
                if b.log_len > dyadic + 1e-12 {
                    dyadic_violations += 1;
                    dyadic_repeat_bound_ok &=
                        b.log_len <= dyadic + repeats as f64 * 2f64.ln() + 1e-12;
                }
                slack = slack.min(b.log_len - lower).min(upper - b.log_len);
            }
        }
    }
    Ok(CoveringReport {
        bands,
        children_ok,
        counts_ok,
        per_order,
        nesting_ok,
        envelope_ok: slack >= -1e-12,
        envelope_slack: slack,
        dyadic_violations,
        dyadic_repeat_bound_ok,
    })
}

/// The type-2/3 bands of order `n` against `{|tr M_n| ≤ 2}` computed
/// directly: the periodic and antiperiodic approximant spectra (the roots
/// of `tr M_n = ±2`) must pair up into exactly these bands.  Orders with
/// `3 ≤ q_n ≤ 400` and `n ≤ max_order` are compared.
pub fn sigma_identity(tree: &BandTree, max_order: usize) -> Result<(bool, Vec<usize>)> {
    let mut ok = true;
    let mut orders = Vec::new();
    for n in 1..=max_order.min(tree.depth()) {
        let approx = match PeriodicApproximant::with_cap(&tree.frequency, tree.lambda, n, 400) {
            Ok(a) if a.q >= 3 => a,
            _ => continue,
        };
        let per = approx.eigenvalues();
        let mut h = approx.matrix();
        let q = approx.q;
        h[(0, q - 1)] = -1.0;
        h[(q - 1, 0)] = -1.0;
        let mut anti: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().cloned().collect();
        anti.sort_by(|a, b| a.total_cmp(b));
        let mut bands: Vec<(f64, f64)> = tree
            .level(n)
            .iter()
            .filter(|b| b.band_type != BandType::One)
            .map(|b| (b.lo.to_f64(), b.hi.to_f64()))
            .collect();
        bands.sort_by(|a, b| a.0.total_cmp(&b.0));
        ok &= bands.len() == q;
        for (i, &(lo, hi)) in bands.iter().enumerate() {
            let (a, b) = (per[i].min(anti[i]), per[i].max(anti[i]));
            ok &= (a - lo).abs() <= 1e-9 && (b - hi).abs() <= 1e-9;
        }
        orders.push(n);
    }
    Ok((ok, orders))
}

/// Largest `max|h'|/min|h'|` over a 100-point grid inside each band of
/// order `≤ max_order`.
pub fn bounded_variation(tree: &BandTree, max_order: usize) -> f64 {
    let mut worst: f64 = 1.0;
    for n in 0..=max_order {
        for b in tree.level(n) {
            let prec = b.precision_bits;
            let (lo, hi) = (&b.lo_inner, &b.hi_inner);
            let (mut mn, mut mx) = (f64::INFINITY, 0.0f64);
            for i in 0..100 {
                let t = (f64::from(i) + 0.5) / 100.0;
                let e = Float::with_val(prec, lo) + Float::with_val(prec, hi - lo) * t;
                let d = crate::spectrum::ln_float(
                    &genpoly_dual(&tree.digits, tree.lambda, b, &e).1.abs(),
                );
                mn = mn.min(d);
                mx = mx.max(d);
            }
            worst = worst.max((mx - mn).exp());
        }
    }
    worst
}

/// Gap-ratio statistics with the stability comparison.
#[derive(Clone, Debug, Serialize)]
pub struct GapStability {
    /// `(order, interior gaps, min ratio·a³)`.
    pub per_order: Vec<(i64, usize, f64)>,
    /// Minimum over orders `0..=max_order`.
    pub global: f64,
    /// Minimum over orders `0..=max_order/2`.
    pub half: f64,
    /// `|global − half| / half`.
    pub rel_change: f64,
    /// Order −1 ratio.
    pub order_minus_one: f64,
}

/// `min (|G|/|B_G|)·a_{n+1}³` over orders `≤ max_order`, compared with the
/// minimum over orders `≤ max_order/2`.
pub fn gap_stability(tree: &BandTree, max_order: usize) -> Result<GapStability> {
    let st = gap_ratio_check(tree, max_order)?;
    let half_order = (max_order / 2) as i64;
    let half = st
        .per_order
        .iter()
        .filter(|(n, k, _)| *n >= 0 && *n <= half_order && *k > 0)
        .map(|r| r.2)
        .fold(f64::INFINITY, f64::min);
    Ok(GapStability {
        per_order: st.per_order.clone(),
        global: st.global_min,
        half,
        rel_change: (st.global_min - half).abs() / half,
        order_minus_one: st.order_minus_one,
    })
}

/// Interior gaps per parent: none under type 1, `2a` under type 2,
/// `2a − 2` under type 3.
pub fn gap_counts_ok(tree: &BandTree, max_order: usize) -> Result<bool> {
    let mut ok = true;
    for n in 0..=max_order {
        let a = tree.digits[n] as usize;
        let gaps = gaps_of_order(tree, n)?;
        for b in tree.level(n) {
            let k = gaps
                .iter()
                .filter(|g| g.kind == GapKind::Interior && g.parent.as_ref() == Some(&b.code))
                .count();
            let want = match b.band_type {
                BandType::One => 0,
                BandType::Two => 2 * a,
                BandType::Three => 2 * a - 2,
            };
            ok &= k == want;
        }
    }
    Ok(ok)
}

/// Rows `(frequency, n, q)` of the approximants checked by [`one_per_band`].
pub type ApproximantRows = Vec<(String, usize, usize)>;

/// One-eigenvalue-per-band for `[1,…]` up to `q_n = 233` and `[2,…]` up
/// to `q_n ≤ 1000`; rows `(frequency, n, q)`.
pub fn one_per_band(lambda: f64) -> Result<(bool, ApproximantRows)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for (k, depth) in [(1u32, 12usize), (2, 8)] {
        let f = Frequency::constant(k)?;
        let tree = build_band_tree(&f, lambda, depth)?;
        for n in 1..=depth {
            let approx = PeriodicApproximant::new(&f, lambda, n)?;
            if approx.q <= 2 {
                continue;
            }
            let ev = approx.eigenvalues();
            match band_eigen_counts(&tree, &approx, Some(&ev)) {
                Ok(c) => ok &= c.total == c.q && c.dense_offset.map_or(true, |d| d <= 1e-10),
                Err(Error::CountMismatch(_)) => ok = false,
                Err(e) => return Err(e),
            }
            rows.push((format!("{k},..."), n, approx.q));
        }
    }
    Ok((ok, rows))
}

/// `mass·η·q_n ∈ [1/64, 64]` for every coded band of order `≤ max_order`.
pub fn mass_law(freqs: &[Frequency], max_order: usize) -> Result<(bool, f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for f in freqs {
        let digits = f.prefix(max_order + 2)?;
        for n in 0..=max_order {
            let q = crate::cf::q_of(&digits[..n]);
            for m in dos_masses_of_order(f, n, DEFAULT_TRUNCATION)? {
                let t = BandType::from_number(m.end_type)?;
                let v = m.rational().clone() * Integer::from(eta(t, &digits, n)?) * q.clone();
                let v = v.to_f64();
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    Ok((lo >= 1.0 / 64.0 && hi <= 64.0, lo, hi))
}

/// Parent mass equals the sum of child masses at matched look-ahead, and
/// the masses of every order sum to one, exactly.
pub fn mass_telescoping(freqs: &[Frequency], max_order: usize) -> Result<bool> {
    let m = DEFAULT_TRUNCATION;
    let mut ok = true;
    for f in freqs {
        for n in 0..max_order {
            let parents = enumerate_words(
                Start::Boundary,
                &f.prefix(n)?,
                None,
                DEFAULT_ENUMERATION_CAP,
            )?;
            let mut total = Rational::new();
            for w in &parents {
                let pm = dos_mass(f, w, m)?;
                total += pm.rational();
                let a = f.prefix(n + 1)?[n];
                let mut sum = Rational::new();
                for e in children_in_order(w.end_type().expect("boundary"), a) {
                    sum += dos_mass(f, &w.child(e), m - 1)?.rational();
                }
                ok &= &sum == pm.rational();
            }
            ok &= total == 1;
        }
    }
    Ok(ok)
}

/// `ν_{n+m}(X_w)` from eigenvalue counts against `dos_mass(w, m)` for
/// `f = [1,…]`, `n = 4`, `m = 8`; both are exact, so they must agree.
pub fn counting_vs_mass(lambda: f64) -> Result<(bool, f64)> {
    let f = Frequency::constant(1)?;
    let (n, m) = (4usize, 8usize);
    let tree = build_band_tree(&f, lambda, n + m)?;
    let approx = PeriodicApproximant::new(&f, lambda, n + m)?;
    let counts = band_eigen_counts(&tree, &approx, None)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for w in enumerate_words(
        Start::Boundary,
        &f.prefix(n)?,
        None,
        DEFAULT_ENUMERATION_CAP,
    )? {
        let prefix = w.to_string();
        let hits: usize = counts
            .bands
            .iter()
            .filter(|b| b.word == prefix || b.word.starts_with(&(prefix.clone() + "-")))
            .map(|b| b.count)
            .sum();
        let nu = Rational::from((hits, approx.q));
        let mass = dos_mass(&f, &w, m)?;
        ok &= &nu == mass.rational();
        worst = worst.max((nu.to_f64() - mass.value()).abs());
    }
    Ok((ok, worst))
}

/// `ϑ` spot values: weight `j − 1` for `(2,1)_j`, `1` otherwise.
pub fn vartheta_spot_ok() -> bool {
    use crate::coding::{Letter, Word};
    let w = Word {
        boundary: None,
        letters: vec![
            Letter {
                band_type: BandType::Two,
                index: 1,
                level: 5,
            },
            Letter {
                band_type: BandType::One,
                index: 2,
                level: 3,
            },
        ],
    };
    vartheta(&w) == vec![4.0, 1.0]
}

/// Checks of every Chebyshev family `𝒥_p`, `2 ≤ p ≤ max_p`.
pub fn chebyshev_suite(max_p: u32) -> Vec<Check> {
    let s = Suite::Chebyshev;
    let mut ok = true;
    let mut worst_r: f64 = 0.0;
    let mut worst_d = f64::INFINITY;
    let mut failures = Vec::new();
    for p in 2..=max_p {
        match chebyshev_family(p) {
            Ok(f) => {
                worst_r = worst_r.max(f.report.r_max);
                worst_d = worst_d.min(f.report.d_min / f.report.d_bound);
            }
            Err(e) => {
                ok = false;
                failures.push(e.to_string());
            }
        }
    }
    vec![Check::new(
        s,
        "families",
        ok,
        json!({"max_p": max_p, "max_r": worst_r, "min_d_over_bound": worst_d, "failures": failures}),
    )]
}
