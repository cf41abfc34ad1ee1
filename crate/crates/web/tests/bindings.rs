use std::f64::consts::PI;

use powertriad_web::{bedrosian_impl, decompose_impl, pythagoras_gap_impl};

#[test]
fn decomposition_matches_the_sinusoidal_triangle() {
    let d = decompose_impl(PI / 3.0, 256).unwrap();
    let s = d.summary();
    assert!((s[0] - 0.5).abs() < 1e-12);
    assert!((s[1] - 0.25).abs() < 1e-12);
    assert!((s[2] - 0.75_f64.sqrt() / 2.0).abs() < 1e-12);
    let (p, a, n) = (d.p(), d.active(), d.nonactive());
    assert_eq!(p.len(), 256);
    for k in 0..p.len() {
        assert!((a[k] + n[k] - p[k]).abs() < 1e-12);
        assert!((d.tip_re()[k] - p[k]).abs() < 1e-12);
        assert!((d.positive()[k] + d.negative()[k] - p[k]).abs() < 1e-15);
    }
}

#[test]
fn equal_harmonics_leave_a_gap_of_twice_the_square() {
    let out = pythagoras_gap_impl(&[1.0, 1.0], &[1.0, 1.0], 0.0).unwrap();
    assert!((out[2] - 0.5).abs() < 1e-12, "{out:?}");
    let single = pythagoras_gap_impl(&[1.0], &[2.0], 0.7).unwrap();
    assert!(single[2].abs() < 1e-12);
    assert!(pythagoras_gap_impl(&[1.0], &[], 0.0).is_err());
}

#[test]
fn slow_envelopes_obey_the_product_rule_and_fast_ones_do_not() {
    assert!(bedrosian_impl(0.05, 0.5).unwrap() < 1e-9);
    assert!(bedrosian_impl(1.5, 0.5).unwrap() > 1e-2);
}
