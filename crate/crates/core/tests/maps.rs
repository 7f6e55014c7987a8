use feigen2d::apmap::{eig2, GeneratingMap};
use feigen2d::renorm::{solve_fixed_point, NewtonOptions};
use feigen2d::{FuncBall, IVec2, Series};

fn linear() -> GeneratingMap {
    let mut f = GeneratingMap::from_series(&Series::from_monomials(1, &[(1, 0, 1.0), (0, 1, 1.0)]));
    // F²(1, 1) passes through y = 3
    f.y_bracket = (-5.0, 5.0);
    f
}

#[test]
fn linear_generating_function_by_hand() {
    // s = x + y gives F(x, u) = (−x − u, −u)
    let f = linear();
    let p = f.apply_f([1.0, -3.0]).unwrap();
    assert!((p[0] - 2.0).abs() < 1e-12 && (p[1] - 3.0).abs() < 1e-12);
    let q = f.inverse_apply_f([2.0, 3.0]).unwrap();
    assert!((q[0] - 1.0).abs() < 1e-12 && (q[1] + 3.0).abs() < 1e-12);
    let (r, _) = f.compose_iterate_f(2, [1.0, 1.0]).unwrap();
    assert!((r[0] - 3.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    let d = f.derivative_f([0.3, -0.7]).unwrap();
    assert_eq!(d, [[-1.0, -1.0], [0.0, -1.0]]);
    let z = f.find_fixed_point_f([0.1, 0.0]).unwrap();
    assert!(z[0].abs() < 1e-12 && z[1].abs() < 1e-12);
}

#[test]
fn zero_iterate_is_identity() {
    let f = linear();
    let (p, m) = f.compose_iterate_f(0, [0.25, -0.5]).unwrap();
    assert_eq!(p, [0.25, -0.5]);
    assert_eq!(m, [[1.0, 0.0], [0.0, 1.0]]);
}

#[test]
fn fixed_point_of_the_universal_map() {
    let reps = solve_fixed_point(16, &NewtonOptions::default()).unwrap();
    let s = &reps.last().unwrap().s;
    let g = GeneratingMap::from_ball(&FuncBall::from_series(s)).unwrap();
    let p = g.find_fixed_point(&IVec2::point(0.58, 0.0)).unwrap();
    assert!(p.x.lo() > 0.577 && p.x.hi() < 0.5785, "{:?}", p);
    assert!(p.y.contains(0.0));
    // G = F³ fixes it too
    let (q, _) = g.compose_iterate(3, &p).unwrap();
    assert!(q.overlaps(&p));
    let d = g.derivative(&p).unwrap();
    assert!(d.det().contains(1.0));
    let (big, small) = d.real_eigenvalues().unwrap();
    assert!(big.hi() < -2.0 && small.hi() < 0.0 && small.lo() > -0.5);
    assert!((big * small).contains(1.0));
    // float route agrees with the enclosure
    let pf = g.find_fixed_point_f([0.58, 0.0]).unwrap();
    let (e1, e2) = eig2(&g.derivative_f(pf).unwrap()).unwrap();
    assert!((e1 * e2 - 1.0).abs() < 1e-9);
    assert!(p.contains(pf));
}

#[test]
fn reversibility_on_the_fixed_point_map() {
    let reps = solve_fixed_point(12, &NewtonOptions::default()).unwrap();
    let g = GeneratingMap::from_series(&reps.last().unwrap().s);
    for &p in &[[0.1, 0.02], [0.4, -0.05], [-0.2, 0.01]] {
        let fp = g.apply_f(p).unwrap();
        let back = g.apply_f([fp[0], -fp[1]]).unwrap();
        // T∘F∘T∘F = Id
        assert!((back[0] - p[0]).abs() < 1e-10 && (-back[1] - p[1]).abs() < 1e-10);
    }
}
