//! Numerical laboratory for Sturmian Hamiltonians.
//!
//! The crate builds the nested spectral-band coverings of the Sturmian
//! Schrödinger operator with potential `λ·χ_{[1−α,1)}(kα mod 1)`, codes the
//! bands symbolically, and estimates the Bowen-type dimension of the spectrum
//! and the dimension of its density of states.
//!
//! Modules:
//! * [`cf`] — continued fractions, convergents, Gauss-measure sampling;
//! * [`coding`] — alphabets, admissible words and exact word counting;
//! * [`spectrum`] — trace polynomials, band trees, gaps, Chebyshev families;
//! * [`dimension`] — partition functions, pressure, `D(λ)`, `φ`, `ρ`;
//! * [`dos`] — periodic approximants, density-of-states masses, `d(λ)`, `θ`, `ϱ`;
//! * [`verify`] — invariant suites shared by the CLI and the tests.

pub mod cf;
pub mod coding;
pub mod dimension;
pub mod dos;
pub mod error;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};

/// Library version, recorded in every artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
