//! Criterion benchmarks of the numerical kernels; see `benches/kernels.rs`.
//!
//! The fixtures shared by the benchmark groups live here so that they are
//! type-checked by `cargo test` as well.

use sturmian::cf::Frequency;

/// The three structural test frequencies `[1,…]`, `[2,…]`, `[1,2,1,2,…]`
/// with short labels.
pub fn frequencies() -> Vec<(&'static str, Frequency)> {
    vec![
        ("golden", Frequency::constant(1).expect("valid digit")),
        ("silver", Frequency::constant(2).expect("valid digit")),
        (
            "one-two",
            Frequency::periodic(vec![], vec![1, 2]).expect("valid period"),
        ),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_are_valid() {
        let f = super::frequencies();
        assert_eq!(f.len(), 3);
        assert_eq!(f[2].1.prefix(4).unwrap(), vec![1, 2, 1, 2]);
    }
}
