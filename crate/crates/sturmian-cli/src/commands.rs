//! One function per command; each assembles a single artifact.

use std::str::FromStr;

use anyhow::{anyhow, Result};
use serde::Serialize;
use sturmian::dimension::{
    deterministic_pressure, pre_dimension, rho_estimate, solve_d, CocycleSample, PressureCurve,
    PressureOptions, PressureSample,
};
use sturmian::dos::{
    dos_dimension_truncated, dos_masses_of_order, periodic_eigenvalues, DosDimension,
};
use sturmian::spectrum::{build_band_tree, gaps_of_order, order_minus_one_gap, Gap, GapKind};
use sturmian::verify::{test_frequencies, Suite, Verifier, VerifyConfig};

use crate::config::{DosOutput, Format, LyapunovOutput, RunConfig};
use crate::output::Artifact;

/// Outcome of a successful run: whether every verification passed.
pub enum Outcome {
    Done,
    VerificationFailed(usize),
}

#[derive(Serialize)]
struct BandRow {
    order: usize,
    #[serde(rename = "type")]
    band_type: u8,
    code: String,
    lo: String,
    hi: String,
    log_len: f64,
    parent_code: String,
    certified: bool,
}

/// The band tree: JSON lines (one band per line) or the plotting CSV.
pub fn bands(cfg: &RunConfig) -> Result<Outcome> {
    let f = cfg.frequency(cfg.depth)?;
    let tree = build_band_tree(&f, cfg.lambda, cfg.depth)?;
    let mut art = Artifact::new("bands", cfg)?;
    match cfg.format {
        Format::Jsonl => art.raw_lines(&tree.to_jsonl()),
        Format::Csv => {
            for b in tree.levels.iter().flatten() {
                art.row(&BandRow {
                    order: b.order,
                    band_type: b.band_type.number(),
                    code: b.code.to_string(),
                    lo: b.lo.to_string_radix(10, Some(25)),
                    hi: b.hi.to_string_radix(10, Some(25)),
                    log_len: b.log_len,
                    parent_code: if b.order > 0 {
                        b.code.truncated(b.order - 1).to_string()
                    } else {
                        String::new()
                    },
                    certified: b.certified,
                })?;
            }
        }
    }
    eprintln!(
        "bands: {} bands through order {}",
        tree.levels.iter().map(Vec::len).sum::<usize>(),
        cfg.depth
    );
    art.emit(cfg)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct GapRow {
    order: i64,
    parent_code: String,
    kind: &'static str,
    lo: String,
    hi: String,
    log_len: f64,
    parent_log_len: f64,
    ratio: f64,
    digit: u32,
    ratio_times_digit_cubed: f64,
}

fn gap_row(order: i64, digit: u32, g: &Gap) -> GapRow {
    let ratio = g.ratio();
    GapRow {
        order,
        parent_code: g
            .parent
            .as_ref()
            .map(ToString::to_string)
            .unwrap_or_default(),
        kind: match g.kind {
            GapKind::Interior => "interior",
            GapKind::Flank => "flank",
        },
        lo: g.lo.to_string_radix(10, Some(25)),
        hi: g.hi.to_string_radix(10, Some(25)),
        log_len: g.log_len(),
        parent_log_len: g.parent_log_len,
        ratio,
        digit,
        ratio_times_digit_cubed: ratio * f64::from(digit).powi(3),
    }
}

/// Every gap of orders −1..depth−1 with its ratio to the parent band.
pub fn gaps(cfg: &RunConfig) -> Result<Outcome> {
    let f = cfg.frequency(cfg.depth)?;
    let tree = build_band_tree(&f, cfg.lambda, cfg.depth)?;
    let mut art = Artifact::new("gaps", cfg)?;
    art.row(&gap_row(-1, 1, &order_minus_one_gap(&tree)))?;
    let mut min = f64::INFINITY;
    for n in 0..cfg.depth {
        let a = tree.digits[n];
        for g in gaps_of_order(&tree, n)? {
            let row = gap_row(n as i64, a, &g);
            if g.kind == GapKind::Interior {
                min = min.min(row.ratio_times_digit_cubed);
            }
            art.row(&row)?;
        }
    }
    eprintln!(
        "gaps: min interior ratio·a³ over orders 0..{} = {min:.6}",
        cfg.depth - 1
    );
    art.emit(cfg)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct BowenRow {
    lambda: f64,
    D_hat: f64,
    lo: f64,
    hi: f64,
    seed: u64,
    n: usize,
    samples: usize,
    stderr: f64,
}

#[derive(Serialize)]
struct PreDimensionRow {
    lambda: f64,
    n: usize,
    s_n: f64,
    window_lower: f64,
    window_upper: f64,
}

/// `D̂(λ)` with its bracket, or the pre-dimensions `s_n` of one frequency.
pub fn dims(cfg: &RunConfig) -> Result<Outcome> {
    let mut art = Artifact::new(
        if cfg.freq.is_some() {
            "pre-dimension"
        } else {
            "dimension"
        },
        cfg,
    )?;
    if cfg.freq.is_some() {
        let tree = build_band_tree(&cfg.frequency(cfg.depth)?, cfg.lambda, cfg.depth)?;
        let pd = pre_dimension(&tree, None)?;
        for &(n, s_n) in &pd.values {
            art.row(&PreDimensionRow {
                lambda: cfg.lambda,
                n,
                s_n,
                window_lower: pd.lower,
                window_upper: pd.upper,
            })?;
        }
        eprintln!(
            "dims: s_n in [{:.6}, {:.6}] over orders {:?}",
            pd.lower, pd.upper, pd.window
        );
    } else {
        let d = solve_d(cfg.lambda, cfg.depth, cfg.samples, cfg.seed)?;
        eprintln!("dims: D_hat = {:.6} in [{:.6}, {:.6}]", d.value, d.lo, d.hi);
        art.row(&BowenRow {
            lambda: cfg.lambda,
            D_hat: d.value,
            lo: d.lo,
            hi: d.hi,
            seed: cfg.seed,
            n: cfg.depth,
            samples: cfg.samples,
            stderr: d.stderr,
        })?;
    }
    art.emit(cfg)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct PressureRow {
    lambda: f64,
    t: f64,
    n: usize,
    samples: usize,
    pressure: f64,
    stderr: f64,
}

fn uniform_grid(intervals: usize, from_zero: bool) -> Vec<f64> {
    let start = usize::from(!from_zero);
    (start..=intervals)
        .map(|i| i as f64 / intervals as f64)
        .collect()
}

/// The pressure curve on `[0, 1]`: relativized, or for one frequency.
pub fn pressure(cfg: &RunConfig) -> Result<Outcome> {
    let grid = uniform_grid(cfg.grid.unwrap_or(10), true);
    let (curve, samples): (PressureCurve, usize) = if cfg.freq.is_some() {
        let tree = build_band_tree(&cfg.frequency(cfg.depth)?, cfg.lambda, cfg.depth)?;
        (deterministic_pressure(&tree, &grid, cfg.depth)?, 1)
    } else {
        let opts = PressureOptions {
            n: cfg.depth,
            samples: cfg.samples,
            ..PressureOptions::new(cfg.seed)
        };
        (
            PressureSample::draw(cfg.lambda, opts)?.curve(&grid),
            cfg.samples,
        )
    };
    let mut art = Artifact::new("pressure", cfg)?;
    for ((&t, &p), &e) in curve.t_grid.iter().zip(&curve.values).zip(&curve.stderr) {
        art.row(&PressureRow {
            lambda: cfg.lambda,
            t,
            n: cfg.depth,
            samples,
            pressure: p,
            stderr: e,
        })?;
    }
    eprintln!(
        "pressure: decreasing={} midpoint-convex={}",
        curve.is_decreasing(),
        curve.is_midpoint_convex()
    );
    art.emit(cfg)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct PhiRow {
    x: f64,
    n: usize,
    samples: usize,
    phi: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct RhoRow {
    rho: f64,
    lo: f64,
    hi: f64,
    x: f64,
    n: usize,
    samples: usize,
    seed: u64,
}

/// The cocycle exponent `φ̂(x)` on `(0, 1]`, or its zero `ρ̂ = 1/x̂`.
pub fn lyapunov(cfg: &RunConfig) -> Result<Outcome> {
    let what = cfg.lyapunov_output.unwrap_or(LyapunovOutput::Curve);
    let mut art = Artifact::new(
        if what == LyapunovOutput::Rho {
            "rho"
        } else {
            "phi"
        },
        cfg,
    )?;
    match what {
        LyapunovOutput::Curve => {
            let sample = CocycleSample::draw(cfg.depth, cfg.samples, cfg.seed)?;
            for x in uniform_grid(cfg.grid.unwrap_or(10), false) {
                let (phi, stderr) = sample.phi(x);
                art.row(&PhiRow {
                    x,
                    n: cfg.depth,
                    samples: cfg.samples,
                    phi,
                    stderr,
                })?;
            }
        }
        LyapunovOutput::Rho => {
            let r = rho_estimate(cfg.depth, cfg.samples, cfg.seed, 1e-9)?;
            eprintln!(
                "lyapunov: rho_hat = {:.6} in [{:.6}, {:.6}]",
                r.rho, r.bracket.0, r.bracket.1
            );
            art.row(&RhoRow {
                rho: r.rho,
                lo: r.bracket.0,
                hi: r.bracket.1,
                x: r.x,
                n: cfg.depth,
                samples: cfg.samples,
                seed: cfg.seed,
            })?;
        }
    }
    art.emit(cfg)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct DosDimensionRow {
    lambda: f64,
    n: usize,
    samples: usize,
    L_hat: f64,
    stderr: f64,
    d_hat: f64,
    d_lo: f64,
    d_hi: f64,
    theta: f64,
    theta_stderr: f64,
    varrho: f64,
    truncation: usize,
    seed: u64,
}

impl DosDimensionRow {
    fn new(d: &DosDimension, truncation: usize) -> Self {
        Self {
            lambda: d.lambda,
            n: d.n,
            samples: d.samples,
            L_hat: d.l_hat,
            stderr: d.l_stderr,
            d_hat: d.d_hat,
            d_lo: d.d_lo,
            d_hi: d.d_hi,
            theta: d.theta,
            theta_stderr: d.theta_stderr,
            varrho: d.varrho,
            truncation,
            seed: d.seed,
        }
    }
}

#[derive(Serialize)]
struct PathRow {
    stream: u64,
    digits: String,
    word: String,
    psi: Option<f64>,
    log_q: f64,
    theta: f64,
    local_dimension: Option<f64>,
}

#[derive(Serialize)]
struct MassRow {
    word: String,
    numerator: String,
    denominator: String,
    m: usize,
    value: f64,
}

#[derive(Serialize)]
struct EigenvalueRow {
    eigenvalue: f64,
}

/// Density-of-states outputs: dimension summary, per-path table, exact
/// masses, or approximant eigenvalues.
pub fn dos(cfg: &RunConfig) -> Result<Outcome> {
    let what = cfg.dos_output.unwrap_or(DosOutput::Dimension);
    let kind = match what {
        DosOutput::Dimension => "dos-dimension",
        DosOutput::Paths => "dos-paths",
        DosOutput::Masses => "dos-masses",
        DosOutput::Eigenvalues => "eigenvalues",
    };
    let mut art = Artifact::new(kind, cfg)?;
    match what {
        DosOutput::Dimension | DosOutput::Paths => {
            let d = dos_dimension_truncated(
                cfg.lambda,
                cfg.depth,
                cfg.truncation,
                cfg.samples,
                cfg.seed,
            )?;
            eprintln!(
                "dos: d_hat = {:.6} in [{:.6}, {:.6}], varrho = {:.6}",
                d.d_hat, d.d_lo, d.d_hi, d.varrho
            );
            if what == DosOutput::Dimension {
                art.row(&DosDimensionRow::new(&d, cfg.truncation))?;
            } else {
                for p in &d.table {
                    art.row(&PathRow {
                        stream: p.stream,
                        digits: p
                            .digits
                            .iter()
                            .map(u32::to_string)
                            .collect::<Vec<_>>()
                            .join(" "),
                        word: p.word.clone(),
                        psi: p.psi,
                        log_q: p.log_q,
                        theta: p.theta,
                        local_dimension: p.local_dimension,
                    })?;
                }
            }
        }
        DosOutput::Masses => {
            let f = cfg.frequency(cfg.depth + cfg.truncation + 1)?;
            for m in dos_masses_of_order(&f, cfg.depth, cfg.truncation)? {
                art.row(&MassRow {
                    value: m.value(),
                    word: m.word,
                    numerator: m.numerator,
                    denominator: m.denominator,
                    m: m.m,
                })?;
            }
        }
        DosOutput::Eigenvalues => {
            let f = cfg.frequency(cfg.depth)?;
            for e in periodic_eigenvalues(&f, cfg.lambda, cfg.depth)? {
                art.row(&EigenvalueRow { eigenvalue: e })?;
            }
        }
    }
    art.emit(cfg)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct CheckRow {
    suite: String,
    name: String,
    passed: bool,
    measured: String,
}

/// Run a verification suite; every check is one record.
pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let suite =
        Suite::from_str(cfg.suite.as_deref().unwrap_or("all")).map_err(|e| anyhow!("{e}"))?;
    let frequencies = match &cfg.freq {
        Some(spec) => vec![spec.build(cfg.depth + 16)?],
        None => test_frequencies(),
    };
    let vcfg = VerifyConfig {
        frequencies,
        lambda: cfg.lambda,
        depth: Some(cfg.depth),
        samples: cfg.samples,
        seed: cfg.seed,
    };
    let checks = Verifier::new(vcfg).run(suite)?;
    let mut art = Artifact::new("verify", cfg)?;
    for c in &checks {
        eprintln!("{c}");
        match cfg.format {
            Format::Jsonl => art.row(c)?,
            Format::Csv => art.row(&CheckRow {
                suite: c.suite.clone(),
                name: c.name.clone(),
                passed: c.passed,
                measured: c.measured.to_string(),
            })?,
        }
    }
    art.emit(cfg)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    eprintln!("verify: {} checks, {failed} failed", checks.len());
    Ok(if failed == 0 {
        Outcome::Done
    } else {
        Outcome::VerificationFailed(failed)
    })
}
