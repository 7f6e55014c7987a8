use feigen2d::regions::{FixedPointSetting, InclusionOptions};
use feigen2d::renorm::{solve_fixed_point, NewtonOptions};
use feigen2d::stableset::*;
use feigen2d::{ExecPolicy, Interval, Mode, Verdict};

fn setting(mode: Mode) -> FixedPointSetting {
    let reps = solve_fixed_point(20, &NewtonOptions::default()).unwrap();
    FixedPointSetting::new(&reps.last().unwrap().s, mode).unwrap()
}

#[test]
fn successor_is_binary_increment() {
    for n in 1..=6 {
        let m = 1u64 << n;
        for v in 0..m {
            let w = Word::from_value(v, n);
            assert_eq!(w.value(), v);
            assert_eq!(w.successor().value(), (v + 1) % m);
        }
    }
    // v = a + 2v': the first letter is the least significant bit
    let w = Word::from_value(6, 3);
    assert_eq!(w.bits(), &[0, 1, 1]);
    assert_eq!(w.prefix().unwrap().value(), 6 % 4);
}

#[test]
fn dimension_bound_arithmetic() {
    let d = dimension_upper_bound(Interval::point(0.272)).unwrap();
    let oracle = 2f64.ln() / (1.0 / 0.272f64).ln();
    assert!(d.contains(oracle));
    assert!(d.hi() < 0.5324);
}

#[test]
fn presentation_inclusions_certify_every_word() {
    let set = setting(Mode::Interval);
    let pres = presentation_certificates(&set, &InclusionOptions::default());
    assert!(pres.iter().all(|c| c.verdict == Verdict::Verified), "{pres:#?}");
    let s = structural_certificate(&pres, Mode::Interval);
    assert_eq!(s.verdict, Verdict::Verified);
    // a float run can never produce the structural claim as verified
    let f = structural_certificate(&pres[..2], Mode::Interval);
    assert_eq!(f.verdict, Verdict::Failed);
}

#[test]
fn pieces_at_depth_five() {
    let set = setting(Mode::Float);
    let h = build_pieces(&set, 5, 2, ExecPolicy::available()).unwrap();
    for n in 1..=5 {
        assert_eq!(h.level(n).len(), 1 << n);
    }
    let certs = piece_certificates(&h, &set, 5, ExecPolicy::available()).unwrap();
    for c in &certs {
        assert_eq!(c.verdict, Verdict::Observed, "{c:#?}");
    }
    // content at the dimension bound shrinks with depth
    let c4 = hausdorff_content(h.level(4), 0.5324);
    let c5 = hausdorff_content(h.level(5), 0.5324);
    assert!(c5.hi() < c4.hi());
}

#[test]
fn orbit_of_zero_follows_the_odometer() {
    let set = setting(Mode::Float);
    let h = build_pieces(&set, 4, 2, ExecPolicy::Sequential).unwrap();
    let rep = orbit_closure_check(&h, &set, 4, ExecPolicy::Sequential).unwrap();
    assert_eq!(rep.points.len(), 16);
    assert!(rep.in_order);
    assert!(rep.discrepancy < ORBIT_TOL);
    let odo = odometer_check(&h, &set, 4, ExecPolicy::Sequential).unwrap();
    assert!(odo.verified);
}

#[test]
fn markov_partition_cells_are_disjoint() {
    let part = MarkovPartition::default();
    assert!(part.disjoint());
    assert!(part.contains_f(part.centers[0]) && part.contains_f(part.centers[1]));
    assert!(!part.contains_f([0.0, 0.0]));
}
