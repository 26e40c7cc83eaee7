//! Reference values at λ = 24.  Closed forms are checked exactly; the rest
//! are regression baselines recorded from the certified band trees.

use sturmian::cf::Frequency;
use sturmian::dimension::solve_sn;
use sturmian::spectrum::gap_ratio_check;
use sturmian::spectrum::tree::build_band_tree;

const LAMBDA: f64 = 24.0;

#[test]
fn golden_order_one_bands_in_closed_form() {
    // h_(1,1)(E) = E(E − λ) − 2 on [−2, 2] and h_(2,0)(E) = E − λ on [λ−2, λ+2].
    let tree = build_band_tree(&Frequency::constant(1).unwrap(), LAMBDA, 1).unwrap();
    let b = tree.find(&"B3-1.1@1".parse().unwrap()).unwrap();
    let lo = (LAMBDA - (LAMBDA * LAMBDA + 16.0).sqrt()) / 2.0;
    assert!((b.lo.to_f64() - lo).abs() < 1e-12);
    assert!(b.hi.to_f64().abs() < 1e-12);
    let b = tree.find(&"B1-2.1@1".parse().unwrap()).unwrap();
    assert!((b.lo.to_f64() - (LAMBDA - 2.0)).abs() < 1e-12);
    assert!((b.hi.to_f64() - (LAMBDA + 2.0)).abs() < 1e-12);
}

#[test]
fn golden_zeros_of_the_partition_function() {
    let want = [
        0.6588537344432552,
        0.4561258891262696,
        0.3826677050747094,
        0.3445757088265964,
        0.325230307666061,
        0.3101594319959986,
        0.30090401875349926,
        0.2930430275082472,
    ];
    let tree = build_band_tree(&Frequency::constant(1).unwrap(), LAMBDA, 9).unwrap();
    for (i, w) in want.iter().enumerate() {
        let got = solve_sn(&tree, i + 2).unwrap();
        assert!((got - w).abs() < 1e-8, "s_{}: {got} vs {w}", i + 2);
    }
}

#[test]
fn gap_ratio_baselines() {
    let cases = [
        (Frequency::constant(1).unwrap(), 9, 0.2086187348508902),
        (Frequency::constant(2).unwrap(), 6, 0.6995181108814048),
        (
            Frequency::periodic(vec![], vec![1, 2]).unwrap(),
            8,
            0.2183002504109585,
        ),
        (Frequency::constant(3).unwrap(), 5, 1.1572133498174588),
    ];
    for (f, depth, want) in cases {
        let tree = build_band_tree(&f, LAMBDA, depth).unwrap();
        let stats = gap_ratio_check(&tree, depth - 1).unwrap();
        assert!(
            (stats.global_min - want).abs() < 1e-8,
            "{:?}: {} vs {want}",
            f.prefix(3),
            stats.global_min
        );
        // The order −1 gap (2, λ−2) inside [−2, λ+2].
        assert!((stats.order_minus_one - (LAMBDA - 4.0) / (LAMBDA + 4.0)).abs() < 1e-12);
    }
}
