use approx::assert_relative_eq;

use tendon_hand::calibration::{
    calibrate_damping, calibrate_stiffness, fit_variant_factors, CalibrationDataset, ModelKind,
};
use tendon_hand::hand_model::{build_default_hand, FingerName};
use tendon_hand::statics::{equilibrium_tension, ActuationCommand};

const MEASURED: [(bool, bool, f64); 4] = [
    (true, true, 52.7),
    (false, true, 63.9),
    (true, false, 57.6),
    (false, false, 87.8),
];

#[test]
fn exact4_reproduces_every_variant() {
    let f = fit_variant_factors(&CalibrationDataset::table_one(), ModelKind::Exact4).unwrap();
    for (h, w, t) in MEASURED {
        assert_relative_eq!(f.predict(h, w), t, max_relative = 4.0 * f64::EPSILON);
    }
    let proposed = f.predict(true, true);
    // Holes and wrinkles, holes only, wrinkles only, bare skin.
    let order = [
        proposed,
        f.predict(true, false),
        f.predict(false, true),
        f.predict(false, false),
    ];
    assert!(order.windows(2).all(|p| p[0] < p[1]), "{order:?}");
    assert!((f.predict(false, false) / proposed - 1.666).abs() <= 1e-3);
}

#[test]
fn multiplicative3_is_the_log_space_least_squares_fit() {
    let f = fit_variant_factors(&CalibrationDataset::table_one(), ModelKind::Multiplicative3).unwrap();
    let ln = |i: usize| MEASURED[i].2.ln();
    // Balanced 2×2 design: each main effect is the mean of its two contrasts.
    let xh = 0.5 * ((ln(1) - ln(0)) + (ln(3) - ln(2)));
    let xw = 0.5 * ((ln(2) - ln(0)) + (ln(3) - ln(1)));
    let b = (ln(0) + ln(1) + ln(2) + ln(3)) / 4.0 - 0.5 * xh - 0.5 * xw;
    assert_relative_eq!(f.base_tension, b.exp(), max_relative = 1e-12);
    assert_relative_eq!(f.hole_absent_factor, xh.exp(), max_relative = 1e-12);
    assert_relative_eq!(f.wrinkle_absent_factor, xw.exp(), max_relative = 1e-12);
    assert_eq!(f.interaction_factor, 1.0);
    // Without an interaction term the bare skin is underpredicted.
    let interaction = 0.25 * (ln(3) - ln(1) - ln(2) + ln(0));
    assert_relative_eq!(f.predict(false, false), 87.8 * (-interaction).exp(), max_relative = 1e-12);
    assert!(f.predict(false, false) < 87.8 - 4.0);
    assert!(f.residual > 0.1);
}

#[test]
fn calibrated_index_reaches_its_limits_and_half_range() {
    let data = CalibrationDataset::table_one();
    let hand = calibrate_stiffness(&build_default_hand(), &data).unwrap();
    let flexor = hand.tendon_index("index_flexor").unwrap();
    let first = hand.axis_by_name(FingerName::Index, "MP", 0).unwrap();
    let tol = 0.1f64.to_radians();

    let mut t = vec![0.0; hand.tendons.len()];
    t[flexor] = 52.7;
    let full = equilibrium_tension(&hand, &ActuationCommand::tension(t.clone()), None).unwrap();
    t[flexor] = 26.35;
    let half = equilibrium_tension(&hand, &ActuationCommand::tension(t), None).unwrap();
    for j in first..first + 3 {
        let a = hand.axes().nth(j).unwrap();
        assert!((full.posture.0[j] - a.limits.1).abs() <= tol);
        assert!((half.posture.0[j] - 0.5 * (a.rest + a.limits.1)).abs() <= tol);
    }
}

#[test]
fn damping_calibration_meets_the_settle_target() {
    let data = CalibrationDataset::table_one();
    let stiff = calibrate_stiffness(&build_default_hand(), &data).unwrap();
    let (hand, worst) = calibrate_damping(&stiff, &data).unwrap();
    assert!(worst > 0.0 && worst <= data.settle_time_target, "{worst}");
    assert!(hand.axes().all(|a| a.damping > 0.0));
}
