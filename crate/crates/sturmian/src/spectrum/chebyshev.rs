//! The model interval families built from Chebyshev polynomials.
//!
//! For `p ≥ 2` and `1 ≤ l < p`,
//!
//! * `I_{p,l} = {2cos θ : |θ − lπ/p| ≤ 0.1π/p, |S_p(2cos θ)| ≤ 1/4}`,
//! * `J_{p,l} = {2cos θ : |θ − lπ/p| ≤ ε_{p,l} π/p}` with
//!   `ε_{p,l} = 0.1` for `p ≤ 4` and
//!   `ε_{p,l} = min{0.1, (l+0.1)/(3.92p), (p−l+0.1)/(3.92p)}` otherwise.
//!
//! The family `𝒥_p` collects `J_{p,l}` (`1 ≤ l < p`) and `J_{p+1,s}`
//! (`1 ≤ s ≤ p`); its members are ordered left to right as
//! `J_{p+1,p} ≺ J_{p,p−1} ≺ J_{p+1,p−1} ≺ … ≺ J_{p,1} ≺ J_{p+1,1}`.
//! For consecutive members `I ≺ J` let `d` be their distance, `D` the
//! distance between their far ends and `r = D/d`; the checks are
//! `r(𝒥_p) ≤ 40` and `d(𝒥_p) ≥ 1/(20p³)`.

use rug::float::Constant;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};

const PREC: u32 = 128;

/// A closed interval `[lo, hi]` in `x = 2cos θ` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    /// Left end.
    pub lo: f64,
    /// Right end.
    pub hi: f64,
}

impl Interval {
    /// Whether `self ⊆ other`, up to the `f64` rounding of shared ends
    /// (both are rounded from 128-bit values).
    pub fn within(&self, other: &Interval) -> bool {
        let slack = 4.0 * f64::EPSILON * 2.0;
        other.lo - slack <= self.lo && self.hi <= other.hi + slack
    }
}

/// One member `(p, l)` of a family with its `I`, `J` and `ε`.
#[derive(Clone, Debug, Serialize)]
pub struct Member {
    /// Polynomial index (`p` or `p+1`).
    pub p: u32,
    /// Zero index.
    pub l: u32,
    /// `I_{p,l}`.
    pub i: Interval,
    /// `J_{p,l}`.
    pub j: Interval,
    /// `ε_{p,l}`.
    pub eps: f64,
}

/// Verification report of a family.
#[derive(Clone, Debug, Serialize)]
pub struct ChebyshevReport {
    /// Every `I` lies in its `J`.
    pub nested: bool,
    /// The members are ordered as mandated and pairwise disjoint.
    pub ordered: bool,
    /// `r(𝒥_p)`.
    pub r_max: f64,
    /// `d(𝒥_p)`.
    pub d_min: f64,
    /// `1/(20p³)`.
    pub d_bound: f64,
}

impl ChebyshevReport {
    /// Whether all checks hold.
    pub fn passed(&self) -> bool {
        self.nested && self.ordered && self.r_max <= 40.0 && self.d_min >= self.d_bound
    }
}

/// The family `𝒥_p` with its verification report.
#[derive(Clone, Debug, Serialize)]
pub struct ChebyshevFamily {
    /// Base index.
    pub p: u32,
    /// Members in left-to-right order.
    pub members: Vec<Member>,
    /// Verification report.
    pub report: ChebyshevReport,
}

/// `ε_{p,l}`.
pub fn epsilon(p: u32, l: u32) -> f64 {
    if p <= 4 {
        return 0.1;
    }
    let (p, l) = (f64::from(p), f64::from(l));
    0.1f64
        .min((l + 0.1) / (3.92 * p))
        .min((p - l + 0.1) / (3.92 * p))
}

/// `S_p(2cos θ) = sin pθ / sin θ`.
fn s_theta(p: u32, th: &Float) -> Float {
    let num = Float::with_val(PREC, th * p).sin();
    num / Float::with_val(PREC, th.sin_ref())
}

fn quarter_excess(p: u32, th: &Float) -> Float {
    s_theta(p, th).abs() - Float::with_val(PREC, 0.25)
}

/// Edge of `{|S_p| ≤ 1/4}` between the centre `c` and the window edge `w`:
/// bisection in `f64`, then the final bracket is checked at 128 bits.
fn edge(p: u32, c: f64, w: f64) -> Float {
    let big = |t: f64| quarter_excess(p, &Float::with_val(PREC, t));
    let wf = Float::with_val(PREC, w);
    if quarter_excess(p, &wf) <= 0 {
        return wf;
    }
    let small = |t: f64| {
        let pt = f64::from(p) * t;
        (pt.sin() / t.sin()).abs() - 0.25
    };
    let (mut inside, mut outside) = (c, w);
    for _ in 0..200 {
        let m = 0.5 * (inside + outside);
        if m == inside || m == outside {
            break;
        }
        if small(m) <= 0.0 {
            inside = m;
        } else {
            outside = m;
        }
    }
    // Certify the bracket; step inward on the rare rounding disagreement.
    let step = (outside - inside).abs().max(f64::EPSILON * c.abs());
    let mut k = 0.0;
    while big(inside) > 0 || big(outside + (outside - c).signum() * k * step) <= 0 {
        k += 1.0;
        inside -= (outside - c).signum() * step;
        assert!(k < 64.0, "Chebyshev edge could not be certified");
    }
    Float::with_val(PREC, inside)
}

fn theta_to_x(lo_th: &Float, hi_th: &Float) -> Interval {
    // x = 2cos θ is decreasing in θ.
    Interval {
        lo: (Float::with_val(PREC, hi_th.cos_ref()) * 2u32).to_f64(),
        hi: (Float::with_val(PREC, lo_th.cos_ref()) * 2u32).to_f64(),
    }
}

/// `I_{p,l}` (certified bisection on `|S_p| = 1/4` within the window).
pub fn interval_i(p: u32, l: u32) -> Interval {
    let pi = std::f64::consts::PI;
    let c = pi * f64::from(l) / f64::from(p);
    let half = 0.1 * pi / f64::from(p);
    let left = edge(p, c, c - half);
    let right = edge(p, c, c + half);
    theta_to_x(&left, &right)
}

/// `J_{p,l}` (closed form).
pub fn interval_j(p: u32, l: u32) -> Interval {
    let pi = Float::with_val(PREC, Constant::Pi);
    let e = epsilon(p, l);
    let lo = Float::with_val(PREC, &pi * (f64::from(l) - e)) / p;
    let hi = Float::with_val(PREC, &pi * (f64::from(l) + e)) / p;
    theta_to_x(&lo, &hi)
}

/// Build and verify `𝒥_p`.
pub fn chebyshev_family(p: u32) -> Result<ChebyshevFamily> {
    if p < 2 {
        return Err(Error::Domain(format!(
            "Chebyshev families need p >= 2, got {p}"
        )));
    }
    // Left-to-right order: (p+1,p), (p,p−1), (p+1,p−1), …, (p,1), (p+1,1).
    let mut order = vec![(p + 1, p)];
    for l in (1..p).rev() {
        order.push((p, l));
        order.push((p + 1, l));
    }
    let members: Vec<Member> = order
        .into_iter()
        .map(|(q, l)| Member {
            p: q,
            l,
            i: interval_i(q, l),
            j: interval_j(q, l),
            eps: epsilon(q, l),
        })
        .collect();
    let nested = members.iter().all(|m| m.i.within(&m.j));
    let ordered = members.windows(2).all(|w| w[0].j.hi < w[1].j.lo);
    let mut r_max: f64 = 0.0;
    let mut d_min = f64::INFINITY;
    for w in members.windows(2) {
        let d = w[1].j.lo - w[0].j.hi;
        let big_d = w[1].j.hi - w[0].j.lo;
        d_min = d_min.min(d);
        r_max = r_max.max(big_d / d);
    }
    let d_bound = 1.0 / (20.0 * f64::from(p).powi(3));
    let report = ChebyshevReport {
        nested,
        ordered,
        r_max,
        d_min,
        d_bound,
    };
    let fam = ChebyshevFamily { p, members, report };
    if !fam.report.passed() {
        return Err(Error::Verification(format!(
            "Chebyshev family p={p}: nested={nested}, ordered={ordered}, r={r_max}, d={d_min} (bound {d_bound})"
        )));
    }
    Ok(fam)
}
