use feigen2d::regions::FixedPointSetting;
use feigen2d::renorm::{linearization_spectrum, newton_fixed_point, renorm_step_f, solve_fixed_point, NewtonOptions, RenormOptions};
use feigen2d::Mode;

#[test]
fn scalings_at_moderate_degree() {
    let reps = solve_fixed_point(12, &NewtonOptions::default()).unwrap();
    let last = reps.last().unwrap();
    assert!(last.defect < 1e-9);
    assert!((last.lambda + 0.248875).abs() < 5e-5, "{}", last.lambda);
    assert!((last.mu - 0.06111).abs() < 5e-5, "{}", last.mu);
}

#[test]
fn converged_seed_needs_no_steps() {
    let opts = NewtonOptions { tol: 1e-6, ..NewtonOptions::default() };
    let reps = solve_fixed_point(8, &opts).unwrap();
    let again = newton_fixed_point(&reps.last().unwrap().s, &opts).unwrap();
    assert_eq!(again.steps, 0);
}

#[test]
fn operator_fixes_its_fixed_point() {
    let reps = solve_fixed_point(12, &NewtonOptions::default()).unwrap();
    let s = &reps.last().unwrap().s;
    let st = renorm_step_f(s, None, &RenormOptions::default()).unwrap();
    assert!(st.s_new.max_abs_diff(s) < 1e-9);
}

#[test]
fn spectrum_has_two_expanding_directions() {
    let reps = solve_fixed_point(12, &NewtonOptions::default()).unwrap();
    let sp = linearization_spectrum(&reps.last().unwrap().s, &NewtonOptions::default()).unwrap();
    assert_eq!(sp.expanding_count, 2);
    assert!((sp.delta1() - 8.721).abs() < 0.05, "{}", sp.delta1());
    assert!(sp.contraction_bound < 0.9);
}

#[test]
fn interval_setting_encloses_float_scalings() {
    let reps = solve_fixed_point(20, &NewtonOptions::default()).unwrap();
    let last = reps.last().unwrap();
    let set = FixedPointSetting::new(&last.s, Mode::Interval).unwrap();
    assert!(set.scaling.lambda.contains(last.lambda));
    assert!(set.scaling.mu.contains(last.mu));
    assert!(set.widening > 0.0 && set.widening < 1e-6);
}
