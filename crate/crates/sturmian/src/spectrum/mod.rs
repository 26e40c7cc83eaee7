//! Spectral side: trace polynomials, band coverings, gaps, the Sturmian
//! potential and the Chebyshev model families.

pub mod chebyshev;
pub mod gaps;
pub mod sequence;
pub mod trace;
pub mod tree;

pub use chebyshev::{chebyshev_family, ChebyshevFamily, ChebyshevReport, Interval};
pub use gaps::{gap_ratio_check, gaps_of_order, order_minus_one_gap, Gap, GapKind, GapRatioStats};
pub use sequence::{sturmian_sequence, sturmian_value};
pub use trace::{chebyshev_triple, h_np, traces, traces_dual, Dual, Mat2, Traces, TransferState};
pub use tree::{
    band_length, build_band_tree, build_band_tree_with, expand_band, expand_band_child,
    expansion_precision, genpoly_dual, genpoly_value, ln_float, order_zero_bands, Band, BandTree,
    TreeOptions,
};
