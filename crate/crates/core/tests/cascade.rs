use feigen2d::cascade::*;
use feigen2d::ExecPolicy;

/// Period-two orbit in closed form. From `x₁ + x₂ = 2/a` and
/// `2x₁ = 1 − a x₂²`, `x₂` is a root of `a x² − 2x + (4/a − 1)`.
fn period_two(a: f64) -> (f64, f64) {
    let s = 2.0 / a;
    let disc = 4.0 - 4.0 * a * (2.0 * s - 1.0);
    let x2 = (2.0 - disc.sqrt()) / (2.0 * a);
    (s - x2, x2)
}

#[test]
fn henon_is_area_preserving_and_invertible() {
    let h = henon(3.7);
    for &p in &[[0.1, 0.2], [-0.3, 0.05], [0.4, -0.4]] {
        let q = h.inverse(h.apply(p));
        assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
        let j = h.jacobian(p);
        assert!((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs() < 1e-14);
    }
}

#[test]
fn fixed_point_formula() {
    let h = henon(3.0);
    let p = h.fixed_point();
    assert!((p[0] - 1.0 / 3.0).abs() < 1e-15);
    let q = h.apply(p);
    assert!((q[0] - p[0]).abs() < 1e-15 && (q[1] - p[1]).abs() < 1e-15);
}

#[test]
fn newton_finds_the_closed_form_period_two_orbit() {
    let a = 3.5;
    let (x1, x2) = period_two(a);
    let h = henon(a);
    let p = periodic_point(&h, [x1 + 0.01, x2 - 0.01], 2).unwrap();
    let hit = (p[0] - x1).abs() < 1e-12 || (p[0] - x2).abs() < 1e-12;
    assert!(hit, "{p:?} vs ({x1}, {x2})");
    // the orbit flips at a = 4 where x₂ = 0 and x₁ = 1/2
    let (y1, y2) = period_two(4.0);
    assert!((y1 - 0.5).abs() < 1e-15 && y2.abs() < 1e-15);
}

#[test]
fn first_bifurcations_are_exact() {
    let recs = cascade(3, Precision::Double, ExecPolicy::available()).unwrap();
    assert_eq!(recs.len(), 3);
    assert!((recs[0].a_k - 3.0).abs() < 1e-9, "{}", recs[0].a_k);
    assert!((recs[1].a_k - 4.0).abs() < 1e-6, "{}", recs[1].a_k);
    for r in &recs {
        assert!(r.alpha_k > r.a_k);
        assert!(r.residual < 1e-12 && r.det_drift < 1e-9);
    }
    assert!(recs.windows(2).all(|w| w[1].a_k > w[0].a_k && w[1].d_k < w[0].d_k));
}

#[test]
fn ratios_need_four_levels() {
    let recs = cascade(3, Precision::Double, ExecPolicy::Sequential).unwrap();
    assert!(matches!(universal_ratio(&recs), Err(CascadeError::Insufficient { need: 4, got: 3 })));
    assert!(cascade(0, Precision::Auto, ExecPolicy::Sequential).is_err());
}
