//! Construction of the nested band coverings `ℬ_n`.
//!
//! Order 0 consists of `[λ−2, λ+2]` (type 1) and `[−2, 2]` (type 3).  A band
//! `B` of order `n` and type `t` contains exactly
//!
//! * one band of order `n+1` (type 2) when `t = 1`,
//! * `2a+1` bands (`a+1` of type 1 interlaced with `a` of type 3) when `t = 2`,
//! * `2a−1` bands (`a` of type 1 interlaced with `a−1` of type 3) when `t = 3`,
//!
//! where `a = a_{n+1}`.  Type-1 bands of order `n+1` are components of
//! `{|h_(n+1,1)| ≤ 2}` and type-2/3 bands components of `{|h_(n+2,0)| ≤ 2}`;
//! each contains exactly one zero of its generating polynomial, which is
//! monotone on it with range `[−2, 2]`.
//!
//! The builder isolates the zeros on a Chebyshev-distributed grid that is
//! refined until the mandated number of sign changes appears (the known
//! count makes a missed root detectable), locates one interior point per
//! band, and brackets both endpoints with a safeguarded Illinois iteration.
//! Endpoint brackets are then certified by re-evaluating the generating
//! polynomial at doubled precision; any failure restarts the parent at a
//! doubled working precision.

use std::cell::RefCell;
use std::ops::Range;

use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;
use serde::Serialize;

use super::trace::{traces, traces_dual};
use crate::cf::Frequency;
use crate::coding::{child_count, children_in_order, BandType, Letter, Word};
use crate::error::{Error, Result};

/// Relative accuracy (in bits) of band endpoints with respect to the band.
pub const ENDPOINT_BITS: u32 = 56;
/// Maximum number of precision doublings per parent band.
const MAX_DOUBLINGS: u32 = 4;
/// Maximum number of grid refinements per parent band.
const MAX_GRID_DOUBLINGS: u32 = 14;

/// A spectral band together with its coding.
#[derive(Clone, Debug)]
pub struct Band {
    /// Order `n ≥ 0`.
    pub order: usize,
    /// Band type.
    pub band_type: BandType,
    /// Coding word (boundary symbol plus `order` letters).
    pub code: Word,
    /// Left endpoint (outer end of the certified enclosure).
    pub lo: Float,
    /// Right endpoint (outer end of the certified enclosure).
    pub hi: Float,
    /// Left endpoint, inner end of its enclosure.
    pub lo_inner: Float,
    /// Right endpoint, inner end of its enclosure.
    pub hi_inner: Float,
    /// `log |B|`.
    pub log_len: f64,
    /// Whether both endpoint enclosures passed the doubled-precision check.
    pub certified: bool,
    /// Index of the parent band in the previous level (None at order 0).
    pub parent: Option<usize>,
    /// Indices of the children in the next level.
    pub children: Range<usize>,
    /// Working precision used to locate this band.
    pub precision_bits: u32,
}

impl Band {
    /// The generating polynomial handle `(n, p)`: `h_(n,1)` for type 1,
    /// `h_(n+1,0)` for types 2 and 3.
    pub fn genpoly(&self) -> (usize, i64) {
        match self.band_type {
            BandType::One => (self.order, 1),
            _ => (self.order + 1, 0),
        }
    }

    /// `|B| = hi − lo`.
    pub fn length(&self) -> Float {
        Float::with_val(self.hi.prec(), &self.hi - &self.lo)
    }

    /// Midpoint.
    pub fn midpoint(&self) -> Float {
        Float::with_val(self.hi.prec(), &self.hi + &self.lo) / 2u32
    }

    /// Whether `e ∈ [lo, hi]`.
    pub fn contains(&self, e: &Float) -> bool {
        *e >= self.lo && *e <= self.hi
    }

    fn order_zero(lambda: f64, t: BandType) -> Self {
        let prec = 128;
        let (lo, hi) = match t {
            BandType::One => (
                Float::with_val(prec, lambda - 2.0),
                Float::with_val(prec, lambda + 2.0),
            ),
            _ => (Float::with_val(prec, -2), Float::with_val(prec, 2)),
        };
        Band {
            order: 0,
            band_type: t,
            code: Word::root(t),
            lo_inner: lo.clone(),
            hi_inner: hi.clone(),
            lo,
            hi,
            log_len: 4f64.ln(),
            certified: true,
            parent: None,
            children: 0..0,
            precision_bits: prec,
        }
    }
}

/// Value of the generating polynomial of `band` at `e`
/// (`digits` must contain at least `order` digits).
pub fn genpoly_value(digits: &[u32], lambda: f64, band: &Band, e: &Float) -> Float {
    let lam = Float::with_val(e.prec(), lambda);
    let t = traces(&digits[..band.order], &lam, e);
    match band.band_type {
        BandType::One => t.z,
        _ => t.x,
    }
}

/// Value and derivative of the generating polynomial of `band` at `e`.
pub fn genpoly_dual(digits: &[u32], lambda: f64, band: &Band, e: &Float) -> (Float, Float) {
    let lam = Float::with_val(e.prec(), lambda);
    let (_, x, z) = traces_dual(&digits[..band.order], &lam, e);
    match band.band_type {
        BandType::One => (z.v, z.d),
        _ => (x.v, x.d),
    }
}

struct Expander<'a> {
    digits: &'a [u32],
    lambda: Float,
}

impl Expander<'_> {
    /// `(g1, g3) = (h_(n+1,1), h_(n+2,0))` at `e`, i.e. `(z, x)` at depth `n+1`.
    fn pair(&self, e: &Float) -> (Float, Float) {
        let t = traces(self.digits, &self.lambda, e);
        (t.z, t.x)
    }

    fn g(&self, which: BandType, e: &Float) -> Float {
        let (g1, g3) = self.pair(e);
        if which == BandType::One {
            g1
        } else {
            g3
        }
    }
}

fn float(prec: u32, x: &Float) -> Float {
    Float::with_val(prec, x)
}

/// Safeguarded Illinois iteration on a bracket `[a, b]` where `f(a)` has
/// a strict sign and `f(b)` the opposite sign or zero.  An iterate with
/// `f = 0` joins the `b` side.  `done(a, b, c, f(c))`, called with the
/// updated bracket and the latest iterate, ends the iteration.  Returns the
/// final bracket `(a, b)` with the same side convention (possibly two
/// adjacent floats), or `None` if the iteration budget runs out.
fn illinois<F, D>(
    f: F,
    mut a: Float,
    mut fa: Float,
    mut b: Float,
    mut fb: Float,
    mut done: D,
) -> Option<(Float, Float)>
where
    F: Fn(&Float) -> Float,
    D: FnMut(&Float, &Float, &Float, &Float) -> bool,
{
    let prec = a.prec();
    let a_neg = fa.is_sign_negative();
    let on_a_side = |v: &Float| !v.is_zero() && v.is_sign_negative() == a_neg;
    let mut side = 0i8;
    let mut width = Float::with_val(prec, &b - &a).abs();
    let mut stale = 0;
    for _ in 0..4000 {
        let (left, right) = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        let mut c = if stale >= 2 || fb.is_zero() {
            stale = 0;
            Float::with_val(prec, &a + &b) / 2u32
        } else {
            let num = Float::with_val(prec, &a * &fb) - Float::with_val(prec, &b * &fa);
            let den = Float::with_val(prec, &fb - &fa);
            Float::with_val(prec, num / den)
        };
        if !c.is_finite() || c <= left || c >= right {
            c = Float::with_val(prec, &a + &b) / 2u32;
            if c <= left || c >= right {
                // Adjacent floats: the tightest bracket at this precision.
                return Some((a, b));
            }
        }
        let fc = f(&c);
        let c_keep = c.clone();
        let fc_keep = fc.clone();
        if on_a_side(&fc) {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2u32;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2u32;
            }
            side = -1;
        }
        if done(&a, &b, &c_keep, &fc_keep) {
            return Some((a, b));
        }
        let w = Float::with_val(prec, &b - &a).abs();
        if Float::with_val(prec, &w * 2u32) > width {
            stale += 1;
        } else {
            stale = 0;
        }
        width = w;
    }
    None
}

/// A located child band before it is attached to a tree.
#[derive(Clone, Debug)]
struct Located {
    letter: Letter,
    lo: (Float, Float),
    hi: (Float, Float),
}

/// Find the children of one band (all of them, or only the one at
/// position `only` in left-to-right order).  `digits` holds `a₁..a_{n+1}`.
fn expand_at(
    digits: &[u32],
    lambda: f64,
    parent_type: BandType,
    plo: &Float,
    phi: &Float,
    prec: u32,
    only: Option<usize>,
) -> std::result::Result<Vec<Located>, String> {
    let order = digits.len() - 1;
    let a = digits[order];
    let ex = Expander {
        digits,
        lambda: Float::with_val(prec, lambda),
    };
    let lo = float(prec, plo);
    let hi = float(prec, phi);
    let (want1, want3) = match parent_type {
        BandType::One => (0usize, 1usize),
        BandType::Two => (a as usize + 1, a as usize),
        BandType::Three => (a as usize, a as usize - 1),
    };
    let pattern = children_in_order(parent_type, a);

    // 1. Grid isolation of the zeros of g1 and g3.
    let mid = Float::with_val(prec, &lo + &hi) / 2u32;
    let half = Float::with_val(prec, &hi - &lo) / 2u32;
    let pi = Float::with_val(prec, Constant::Pi);
    let mut n = 4 * (want1 + want3 + 2);
    let (grid, vals, z1, z3) = 'grid: {
        for _ in 0..MAX_GRID_DOUBLINGS {
            let mut grid: Vec<Float> = (0..=n)
                .map(|j| {
                    if j == 0 {
                        lo.clone()
                    } else if j == n {
                        hi.clone()
                    } else {
                        let th = Float::with_val(prec, &pi * j as u32) / n as u32;
                        Float::with_val(prec, &mid - Float::with_val(prec, &half * th.cos()))
                    }
                })
                .collect();
            let mut vals: Vec<(Float, Float)> = grid.iter().map(|e| ex.pair(e)).collect();
            let changes =
                |vals: &[(Float, Float)], sel: fn(&(Float, Float)) -> &Float| -> Vec<usize> {
                    (0..vals.len() - 1)
                        .filter(|&j| {
                            sel(&vals[j]).is_sign_negative() != sel(&vals[j + 1]).is_sign_negative()
                        })
                        .collect()
                };
            let mut z1 = if parent_type == BandType::One {
                Vec::new()
            } else {
                changes(&vals, |v| &v.0)
            };
            let mut z3 = changes(&vals, |v| &v.1);
            if z1.len() > want1 || z3.len() > want3 {
                return Err(format!(
                    "found {} / {} sign changes, expected {} / {} (parent type {})",
                    z1.len(),
                    z3.len(),
                    want1,
                    want3,
                    parent_type.number()
                ));
            }
            if z1.len() == want1 && z3.len() == want3 {
                // Separate zeros of g1 and g3 sharing a cell by local refinement.
                for _ in 0..64 {
                    let shared: Vec<usize> = z1
                        .iter()
                        .copied()
                        .filter(|j| z3.binary_search(j).is_ok())
                        .collect();
                    if shared.is_empty() {
                        break 'grid (grid, vals, z1, z3);
                    }
                    for &j in shared.iter().rev() {
                        let step = Float::with_val(prec, &grid[j + 1] - &grid[j]) / 8u32;
                        let pts: Vec<Float> = (1..8u32)
                            .map(|m| {
                                Float::with_val(prec, &grid[j] + Float::with_val(prec, &step * m))
                            })
                            .collect();
                        let pv: Vec<(Float, Float)> = pts.iter().map(|e| ex.pair(e)).collect();
                        grid.splice(j + 1..j + 1, pts);
                        vals.splice(j + 1..j + 1, pv);
                    }
                    z1 = if parent_type == BandType::One {
                        Vec::new()
                    } else {
                        changes(&vals, |v| &v.0)
                    };
                    z3 = changes(&vals, |v| &v.1);
                    if z1.len() != want1 || z3.len() != want3 {
                        return Err("sign-change count changed under refinement".into());
                    }
                }
                return Err("could not separate interlaced zeros".into());
            }
            n *= 2;
        }
        return Err(format!("could not isolate {want1} + {want3} zeros"));
    };
    let n = grid.len() - 1;

    // 2. Interlacing check against the mandated child pattern.
    let child3 = if parent_type == BandType::One {
        BandType::Two
    } else {
        BandType::Three
    };
    let mut merged: Vec<(usize, BandType)> = z1
        .iter()
        .map(|&j| (j, BandType::One))
        .chain(z3.iter().map(|&j| (j, child3)))
        .collect();
    merged.sort();
    if merged
        .iter()
        .map(|m| m.1)
        .ne(pattern.iter().map(|l| l.band_type))
    {
        return Err("children do not interlace as mandated".into());
    }

    // 3. Endpoints, polynomial by polynomial.
    let mut out: Vec<Located> = Vec::new();
    for (which, zeros) in [(BandType::One, &z1), (BandType::Three, &z3)] {
        let sel = |v: &(Float, Float)| {
            if which == BandType::One {
                v.0.clone()
            } else {
                v.1.clone()
            }
        };
        let g = |e: &Float| ex.g(which, e);
        let k = zeros.len();
        let positions: Vec<usize> = zeros
            .iter()
            .map(|z| {
                merged
                    .iter()
                    .position(|m| m.0 == *z && (m.1 == BandType::One) == (which == BandType::One))
                    .unwrap()
            })
            .collect();
        let wanted: Vec<usize> = (0..k)
            .filter(|&i| only.map_or(true, |p| positions[i] == p))
            .collect();
        if wanted.is_empty() {
            continue;
        }
        if sel(&vals[0]).abs() <= 2 || sel(&vals[n]).abs() <= 2 {
            return Err("child band touches the parent boundary".into());
        }
        // Interior points with |g| <= 1, computed on demand.
        let inner: RefCell<Vec<Option<Float>>> = RefCell::new(vec![None; k]);
        let inner_at = |i: usize| -> std::result::Result<Float, String> {
            if let Some(c) = &inner.borrow()[i] {
                return Ok(c.clone());
            }
            let j = zeros[i];
            let (ga, gb) = (sel(&vals[j]), sel(&vals[j + 1]));
            let c = if ga.clone().abs() <= 1 {
                grid[j].clone()
            } else if gb.clone().abs() <= 1 {
                grid[j + 1].clone()
            } else {
                let mut hit = None;
                illinois(
                    g,
                    grid[j].clone(),
                    ga,
                    grid[j + 1].clone(),
                    gb,
                    |_, _, c, fc| {
                        if fc.clone().abs() <= 1 {
                            hit = Some(c.clone());
                            true
                        } else {
                            false
                        }
                    },
                );
                hit.ok_or("zero isolation stalled")?
            };
            inner.borrow_mut()[i] = Some(c.clone());
            Ok(c)
        };
        // Outer point with |g| > 2 between zeros i−1 and i (i in 0..=k).
        let outer_at = |i: usize| -> std::result::Result<Float, String> {
            if i == 0 {
                return Ok(lo.clone());
            }
            if i == k {
                return Ok(hi.clone());
            }
            let (j0, j1) = (zeros[i - 1] + 1, zeros[i]);
            let best = (j0..=j1).max_by(|&p, &q| {
                sel(&vals[p])
                    .abs()
                    .partial_cmp(&sel(&vals[q]).abs())
                    .unwrap()
            });
            if let Some(b) = best.filter(|&b| sel(&vals[b]).abs() > 2) {
                return Ok(grid[b].clone());
            }
            let (l, r) = (inner_at(i - 1)?, inner_at(i)?);
            let step = Float::with_val(prec, &r - &l) / 257u32;
            (1..257u32)
                .map(|m| Float::with_val(prec, &l + Float::with_val(prec, &step * m)))
                .find(|e| g(e).abs() > 2)
                .ok_or_else(|| "no gap point between consecutive bands".to_string())
        };

        for i in wanted {
            let c = inner_at(i)?;
            let mut ends: Vec<(Float, Float)> = Vec::with_capacity(2);
            for o in [outer_at(i)?, outer_at(i + 1)?] {
                let go = g(&o);
                let target: i32 = if go.is_sign_negative() { -2 } else { 2 };
                // Oriented so that f > 0 outside the band and f ≤ 0 inside.
                let flip = go.is_sign_negative();
                let f = |e: &Float| {
                    let v = Float::with_val(prec, g(e) - target);
                    if flip {
                        -v
                    } else {
                        v
                    }
                };
                let fo = f(&o);
                let fc = f(&c);
                let (out_pt, in_pt) = illinois(f, o.clone(), fo, c.clone(), fc, |a, b, _, _| {
                    let w = Float::with_val(prec, b - a).abs();
                    let m = Float::with_val(prec, a + b) / 2u32;
                    let d = Float::with_val(prec, m - &c).abs();
                    w <= (d >> ENDPOINT_BITS)
                })
                .ok_or("endpoint bracketing stalled (precision)")?;
                // Move both ends away from the crossing by at least the
                // bracket width so that rounding cannot flip their signs.
                let dir = Float::with_val(prec, &out_pt - &in_pt);
                let floor = Float::with_val(prec, &out_pt - &c).abs() >> (ENDPOINT_BITS + 8);
                let w = dir.abs().max(&floor);
                let w = if out_pt > c { w } else { -w };
                let out_pt = Float::with_val(prec, &out_pt + &w);
                let in_pt = Float::with_val(prec, &in_pt - &w);
                ends.push((in_pt, out_pt));
            }
            let hi_end = ends.pop().expect("two ends");
            let lo_end = ends.pop().expect("two ends");
            out.push(Located {
                letter: pattern[positions[i]],
                lo: lo_end,
                hi: hi_end,
            });
        }
    }
    out.sort_by(|p, q| p.lo.1.partial_cmp(&q.lo.1).unwrap());

    // 4. Certification at doubled precision.
    let ex2 = Expander {
        digits,
        lambda: Float::with_val(2 * prec, lambda),
    };
    for c in out.iter() {
        let which = if c.letter.band_type == BandType::One {
            BandType::One
        } else {
            BandType::Three
        };
        let ok = |inner: &Float, outer: &Float| {
            let gi = ex2.g(which, &float(2 * prec, inner));
            let go = ex2.g(which, &float(2 * prec, outer));
            gi.abs() <= 2 && go.abs() > 2
        };
        if !(ok(&c.lo.0, &c.lo.1) && ok(&c.hi.0, &c.hi.1)) {
            return Err("endpoint enclosure failed doubled-precision certification".into());
        }
    }
    // Disjointness and nesting.
    for w in out.windows(2) {
        if w[0].hi.1 >= w[1].lo.1 {
            return Err("children overlap".into());
        }
    }
    if out.first().is_some_and(|c| c.lo.1 < lo) || out.last().is_some_and(|c| c.hi.1 > hi) {
        return Err("child leaves its parent".into());
    }
    Ok(out)
}

/// Working precision for expanding a band `[lo, hi]` of the given type at
/// level `a`.  Below a type-1 band the single child shrinks like
/// `|tr M_n|^{−a}`, so the budget grows linearly in `a` there; below
/// types 2 and 3 the trace `tr M_n` stays in `[−2, 2]` and only
/// polynomial growth in `a` is needed.
pub fn expansion_precision(
    lo: &Float,
    hi: &Float,
    lambda: f64,
    parent_type: BandType,
    a: u32,
) -> u32 {
    let mag = lo
        .clone()
        .abs()
        .max(&hi.clone().abs())
        .to_f64()
        .max(1.0)
        .log2();
    let len = Float::with_val(hi.prec().max(lo.prec()), hi - lo).to_f64();
    let len_bits = if len > 0.0 {
        -len.log2()
    } else {
        f64::from(hi.prec())
    };
    let a = f64::from(a);
    let per_level = (2.0 * (lambda + 5.0)).log2();
    let growth = match parent_type {
        BandType::One => (a + 1.0) * per_level,
        _ => per_level,
    } + 3.0 * (a + 1.0).log2();
    ((mag + len_bits.max(0.0) + growth + 96.0).ceil() as u32).max(128)
}

fn to_band(parent: &Band, c: Located, prec: u32) -> Band {
    let len = Float::with_val(prec, &c.hi.1 - &c.lo.1);
    Band {
        order: parent.order + 1,
        band_type: c.letter.band_type,
        code: parent.code.child(c.letter),
        lo: c.lo.1,
        hi: c.hi.1,
        lo_inner: c.lo.0,
        hi_inner: c.hi.0,
        log_len: ln_float(&len),
        certified: true,
        parent: None,
        children: 0..0,
        precision_bits: prec,
    }
}

fn expand_impl(
    digits: &[u32],
    lambda: f64,
    parent: &Band,
    only: Option<usize>,
) -> Result<Vec<Band>> {
    let n = parent.order;
    if digits.len() < n + 1 {
        return Err(Error::InsufficientDigits {
            available: digits.len(),
            requested: n + 1,
        });
    }
    let dig = &digits[..n + 1];
    let a = dig[n];
    if let Some(p) = only {
        if p >= child_count(parent.band_type, a) {
            return Err(Error::Domain(format!("child position {p} out of range")));
        }
    }
    if parent.band_type == BandType::One && a == 1 {
        // h_(n+2,0) = h_(n,a_{n+1}) coincides with the parent's generating
        // polynomial h_(n,1): the single type-2 child is the parent itself.
        let mut child = parent.clone();
        child.order = n + 1;
        child.band_type = BandType::Two;
        child.code = parent.code.child(Letter::new(BandType::Two, 1, 1)?);
        child.parent = None;
        child.children = 0..0;
        return Ok(vec![child]);
    }
    let mut prec = expansion_precision(&parent.lo, &parent.hi, lambda, parent.band_type, a);
    let mut last = String::new();
    for _ in 0..=MAX_DOUBLINGS {
        match expand_at(
            dig,
            lambda,
            parent.band_type,
            &parent.lo,
            &parent.hi,
            prec,
            only,
        ) {
            Ok(located) => {
                return Ok(located
                    .into_iter()
                    .map(|c| to_band(parent, c, prec))
                    .collect())
            }
            Err(e) => last = e,
        }
        prec *= 2;
    }
    Err(Error::Bracketing {
        order: n,
        detail: format!(
            "type {} (code {}): {last}",
            parent.band_type.number(),
            parent.code
        ),
    })
}

/// The children of `parent` (order `n`), located with the precision ladder.
/// `digits` must contain at least `n+1` digits.
pub fn expand_band(digits: &[u32], lambda: f64, parent: &Band) -> Result<Vec<Band>> {
    expand_impl(digits, lambda, parent, None)
}

/// Only the child of `parent` at position `pos` (left to right).
pub fn expand_band_child(digits: &[u32], lambda: f64, parent: &Band, pos: usize) -> Result<Band> {
    Ok(expand_impl(digits, lambda, parent, Some(pos))?.remove(0))
}

/// Natural log of a positive Float as `f64` (no underflow).
pub fn ln_float(x: &Float) -> f64 {
    match x.to_f64_exp() {
        (m, e) if m > 0.0 => m.ln() + f64::from(e) * std::f64::consts::LN_2,
        _ => f64::NEG_INFINITY,
    }
}

/// The two bands of order 0.
pub fn order_zero_bands(lambda: f64) -> [Band; 2] {
    [
        Band::order_zero(lambda, BandType::One),
        Band::order_zero(lambda, BandType::Three),
    ]
}

/// The order `−1` band `[−2, λ+2]`.
pub fn order_minus_one(lambda: f64) -> (Float, Float) {
    (Float::with_val(128, -2), Float::with_val(128, lambda + 2.0))
}

/// The nested band covering up to a given order.
#[derive(Clone, Debug)]
pub struct BandTree {
    /// Frequency (at least `depth` digits).
    pub frequency: Frequency,
    /// Coupling constant.
    pub lambda: f64,
    /// Digits `a₁..a_depth`.
    pub digits: Vec<u32>,
    /// `levels[n]` = bands of order `n`, sorted by energy.
    pub levels: Vec<Vec<Band>>,
}

/// Options for [`build_band_tree`].
#[derive(Clone, Copy, Debug)]
pub struct TreeOptions {
    /// Refuse to build more than this many bands in total.
    pub max_bands: usize,
    /// Accept `4 < λ` (covering only); otherwise nothing is enforced here.
    pub covering_only: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        Self {
            max_bands: 2_000_000,
            covering_only: true,
        }
    }
}

/// Build the band tree of `f` at coupling `lambda` down to order `depth`.
pub fn build_band_tree(f: &Frequency, lambda: f64, depth: usize) -> Result<BandTree> {
    build_band_tree_with(f, lambda, depth, TreeOptions::default())
}

/// [`build_band_tree`] with explicit options.
pub fn build_band_tree_with(
    f: &Frequency,
    lambda: f64,
    depth: usize,
    opts: TreeOptions,
) -> Result<BandTree> {
    // Written negated so that NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(lambda > 4.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "band coverings need lambda > 4, got {lambda}"
        )));
    }
    let digits = f.prefix(depth)?;
    let total = crate::coding::count_words(crate::coding::Start::Boundary, &digits, None);
    let mut budget = Float::with_val(64, 0);
    for n in 0..=depth {
        budget += Float::with_val(
            64,
            &crate::coding::count_words(crate::coding::Start::Boundary, &digits[..n], None),
        );
    }
    if budget > opts.max_bands as f64 {
        return Err(Error::Budget(format!(
            "tree would hold about {budget} bands (order {depth}: {total})"
        )));
    }
    let mut levels: Vec<Vec<Band>> = vec![order_zero_bands(lambda).to_vec()];
    for n in 0..depth {
        let kids: Vec<Vec<Band>> = levels[n]
            .par_iter()
            .map(|b| expand_band(&digits, lambda, b))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (i, mut ch) in kids.into_iter().enumerate() {
            let start = next.len();
            for c in ch.iter_mut() {
                c.parent = Some(i);
            }
            next.append(&mut ch);
            levels[n][i].children = start..next.len();
        }
        levels.push(next);
    }
    Ok(BandTree {
        frequency: f.clone(),
        lambda,
        digits,
        levels,
    })
}

impl BandTree {
    /// Deepest order present.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Bands of order `n`.
    pub fn level(&self, n: usize) -> &[Band] {
        &self.levels[n]
    }

    /// Look a band up by its code.
    pub fn find(&self, w: &Word) -> Option<&Band> {
        let b0 = w.boundary?;
        let mut band = self.levels[0].iter().find(|b| b.band_type == b0)?;
        for (n, l) in w.letters.iter().enumerate() {
            if n + 1 >= self.levels.len() {
                return None;
            }
            band = self.levels[n + 1][band.children.clone()]
                .iter()
                .find(|c| c.code.letters[n] == *l)?;
        }
        Some(band)
    }

    /// Children of `band` (which must belong to this tree).
    pub fn children_of(&self, band: &Band) -> &[Band] {
        if band.order + 1 >= self.levels.len() {
            return &[];
        }
        &self.levels[band.order + 1][band.children.clone()]
    }

    /// JSON-lines export, one band per line.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line {
            order: usize,
            #[serde(rename = "type")]
            band_type: u8,
            code: String,
            lo: String,
            hi: String,
            log_len: f64,
            parent_code: Option<String>,
            certified: bool,
        }
        let mut s = String::new();
        for lvl in &self.levels {
            for b in lvl {
                let line = Line {
                    order: b.order,
                    band_type: b.band_type.number(),
                    code: b.code.to_string(),
                    lo: b.lo.to_string_radix(10, Some(25)),
                    hi: b.hi.to_string_radix(10, Some(25)),
                    log_len: b.log_len,
                    parent_code: (b.order > 0).then(|| b.code.truncated(b.order - 1).to_string()),
                    certified: b.certified,
                };
                s.push_str(&serde_json::to_string(&line).expect("serialisable"));
                s.push('\n');
            }
        }
        s
    }
}

/// Length of the band coded by `w`: `(|B|, log|B|, proxy_flag)`.
///
/// Uses the certified endpoints when available; otherwise the derivative
/// proxy `4 / |h'_w(mid)|` is returned with the flag set.
pub fn band_length(tree: &BandTree, w: &Word) -> Result<(f64, f64, bool)> {
    let b = tree
        .find(w)
        .ok_or_else(|| Error::Domain(format!("word {w} is not in the tree")))?;
    if b.certified {
        return Ok((b.log_len.exp(), b.log_len, false));
    }
    let (_, d) = genpoly_dual(&tree.digits, tree.lambda, b, &b.midpoint());
    let ll = 4f64.ln() - ln_float(&d.abs());
    Ok((ll.exp(), ll, true))
}
