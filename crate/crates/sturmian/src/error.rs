//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the numerical laboratory.
///
/// Every variant names the violated precondition or the failed
/// postcondition; none of them is ever silently swallowed.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Certified arithmetic could not decide a quantity at the largest
    /// precision on the ladder.
    #[error("precision exhausted after {bits} bits: {what}")]
    PrecisionExhausted {
        /// Largest precision attempted.
        bits: u32,
        /// What could not be certified.
        what: String,
    },

    /// A frequency does not carry enough digits for the request.
    #[error("frequency has {available} digits but {requested} are required")]
    InsufficientDigits {
        /// Digits available.
        available: usize,
        /// Digits requested.
        requested: usize,
    },

    /// Enumeration refused because the exact count exceeds the cap.
    #[error("enumeration cap {cap} exceeded: exact count is {count}")]
    CapExceeded {
        /// Configured cap.
        cap: usize,
        /// Exact number of words, as a decimal string.
        count: String,
    },

    /// The band-tree builder did not isolate the mandated number of
    /// sub-bands; this signals a structural or precision bug.
    #[error("bracketing failure at order {order}: {detail}")]
    Bracketing {
        /// Order of the parent band.
        order: usize,
        /// Description of the mismatch.
        detail: String,
    },

    /// A work budget (bands, tree size, matrix size) was exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Eigenvalue-to-band assignment did not give one eigenvalue per band.
    #[error("count mismatch: {0}")]
    CountMismatch(String),

    /// A Monte-Carlo root search found no sign change.
    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    /// A theorem-backed verification failed (implementation bug signal).
    #[error("verification failure: {0}")]
    Verification(String),

    /// JSON (de)serialisation problem.
    #[error("serialisation error: {0}")]
    Serde(#[from] serde_json::Error),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
