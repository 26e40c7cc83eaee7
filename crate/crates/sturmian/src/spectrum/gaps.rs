//! Spectral gaps of each order and gap-to-band ratios.
//!
//! A gap of order `n` is an open interval between two consecutive children
//! of one order-`n` band.  The slack between a parent endpoint and its
//! outermost child is reported separately as a flank: it is contiguous
//! with a gap of lower order and is not counted at order `n`.

use rug::Float;
use serde::Serialize;

use super::tree::{ln_float, BandTree};
use crate::coding::Word;
use crate::error::{Error, Result};

/// Whether a gap lies between two children or beside the outermost one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GapKind {
    /// Between two consecutive children.
    Interior,
    /// Between a parent endpoint and its outermost child.
    Flank,
}

/// An open gap inside a parent band.
#[derive(Clone, Debug)]
pub struct Gap {
    /// Left end (right endpoint of the left child, or parent start).
    pub lo: Float,
    /// Right end.
    pub hi: Float,
    /// Code of the parent band `B_G` (`None` for the order −1 gap).
    pub parent: Option<Word>,
    /// `log |B_G|`.
    pub parent_log_len: f64,
    /// Interior or flank.
    pub kind: GapKind,
}

impl Gap {
    /// `log |G|`.
    pub fn log_len(&self) -> f64 {
        ln_float(&Float::with_val(self.hi.prec(), &self.hi - &self.lo))
    }
    /// `|G| / |B_G|`.
    pub fn ratio(&self) -> f64 {
        (self.log_len() - self.parent_log_len).exp()
    }
}

/// The order −1 gap `(2, λ−2)` inside `[−2, λ+2]`.
pub fn order_minus_one_gap(tree: &BandTree) -> Gap {
    let b = &tree.levels[0];
    let (t3, t1) = if b[0].lo < b[1].lo {
        (&b[0], &b[1])
    } else {
        (&b[1], &b[0])
    };
    Gap {
        lo: t3.hi.clone(),
        hi: t1.lo.clone(),
        parent: None,
        parent_log_len: (tree.lambda + 4.0).ln(),
        kind: GapKind::Interior,
    }
}

/// All gaps (interior and flank) of order `n` (requires depth ≥ n+1).
pub fn gaps_of_order(tree: &BandTree, n: usize) -> Result<Vec<Gap>> {
    if tree.depth() < n + 1 {
        return Err(Error::Domain(format!(
            "gaps of order {n} need a tree of depth {}",
            n + 1
        )));
    }
    let mut out = Vec::new();
    for b in tree.level(n) {
        let kids = tree.children_of(b);
        let mk = |lo: &Float, hi: &Float, kind| Gap {
            lo: lo.clone(),
            hi: hi.clone(),
            parent: Some(b.code.clone()),
            parent_log_len: b.log_len,
            kind,
        };
        if let (Some(first), Some(last)) = (kids.first(), kids.last()) {
            if first.lo > b.lo {
                out.push(mk(&b.lo, &first.lo, GapKind::Flank));
            }
            for w in kids.windows(2) {
                out.push(mk(&w[0].hi, &w[1].lo, GapKind::Interior));
            }
            if last.hi < b.hi {
                out.push(mk(&last.hi, &b.hi, GapKind::Flank));
            }
        }
    }
    Ok(out)
}

/// Per-order gap ratio statistics `min |G|/|B_G| · a_{n+1}³`.
#[derive(Clone, Debug, Serialize)]
pub struct GapRatioStats {
    /// `(order, number of interior gaps, min ratio·a³)`; order −1 first.
    pub per_order: Vec<(i64, usize, f64)>,
    /// Minimum over orders `0..=max_order` (order −1 excluded).
    pub global_min: f64,
    /// Order −1 ratio `|G|/|[−2,λ+2]|`.
    pub order_minus_one: f64,
}

/// Gap ratios for orders `−1..=max_order` (requires depth ≥ max_order+1).
pub fn gap_ratio_check(tree: &BandTree, max_order: usize) -> Result<GapRatioStats> {
    let g = order_minus_one_gap(tree);
    let r_m1 = g.ratio();
    let mut per_order = vec![(-1, 1, r_m1)];
    let mut global = f64::INFINITY;
    for n in 0..=max_order {
        let a = f64::from(tree.digits[n]);
        let gaps: Vec<Gap> = gaps_of_order(tree, n)?
            .into_iter()
            .filter(|g| g.kind == GapKind::Interior)
            .collect();
        let m = gaps
            .iter()
            .map(|g| g.ratio() * a.powi(3))
            .fold(f64::INFINITY, f64::min);
        if !gaps.is_empty() {
            global = global.min(m);
        }
        per_order.push((n as i64, gaps.len(), m));
    }
    Ok(GapRatioStats {
        per_order,
        global_min: global,
        order_minus_one: r_m1,
    })
}
