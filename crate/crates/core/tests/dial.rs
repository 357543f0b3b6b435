use nalgebra::Vector3;

use tendon_hand::calibration::calibrated_default_hand;
use tendon_hand::contact_world::{detect_contacts, Shape};
use tendon_hand::grasp_taxonomy::{dial_scenario, run_dial, run_dial_scenario, DIAL_EXCURSIONS};
use tendon_hand::hand_model::{FingerName, Posture};
use tendon_hand::statics::ActuationCommand;
use tendon_hand::HandError;

#[test]
fn shipped_dial_turns_counterclockwise_without_slip() {
    let hand = calibrated_default_hand().unwrap();
    let out = run_dial(&hand, &DIAL_EXCURSIONS).unwrap();
    assert!(!out.slip);
    assert!(out.rotation_deg > 0.0, "{}", out.rotation_deg);
    assert!(out.trace.len() >= 10);
    assert_eq!(out.trace.last().copied(), Some(out.rotation_deg));
}

#[test]
fn trace_increments_match_contact_travel() {
    let hand = calibrated_default_hand().unwrap();
    let scene = dial_scenario(&hand).unwrap();
    let out = run_dial_scenario(&hand, &scene, &DIAL_EXCURSIONS).unwrap();
    let dial = &scene.world.objects[0];
    let Shape::DiscDial { axis, .. } = dial.shape else { panic!() };
    let axis = (dial.pose.rotation * axis).normalize();
    let centre = dial.pose.translation.vector;
    // Any in-plane reference works for differences of angles.
    let u = axis.cross(&Vector3::new(0.3, 0.5, 0.1)).normalize();
    let v = axis.cross(&u);
    let angles = |q: &Posture| -> Vec<f64> {
        let contacts = detect_contacts(&hand, q, &scene.world, 0.25);
        [FingerName::Thumb, FingerName::Index]
            .iter()
            .map(|f| {
                let c = contacts
                    .iter()
                    .filter(|c| c.link.finger() == Some(*f))
                    .min_by(|a, b| a.gap.total_cmp(&b.gap))
                    .unwrap();
                let r = c.point.coords - centre;
                r.dot(&v).atan2(r.dot(&u))
            })
            .collect()
    };
    let wrap = |a: f64| (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    for k in 1..out.postures.len() {
        let (a, b) = (angles(&out.postures[k - 1]), angles(&out.postures[k]));
        let mean = 0.5 * (wrap(b[0] - a[0]) + wrap(b[1] - a[1]));
        assert!((mean.to_degrees() - (out.trace[k] - out.trace[k - 1])).abs() < 1e-9, "substep {k}");
    }
}

#[test]
fn reversing_the_axis_negates_the_rotation() {
    let hand = calibrated_default_hand().unwrap();
    let scene = dial_scenario(&hand).unwrap();
    let a = run_dial_scenario(&hand, &scene, &DIAL_EXCURSIONS).unwrap();
    let b = run_dial_scenario(&hand, &scene.mirrored(), &DIAL_EXCURSIONS).unwrap();
    assert!((a.rotation_deg + b.rotation_deg).abs() < 1e-9);
    assert_eq!(a.slip, b.slip);
}

#[test]
fn open_hand_does_not_hold_the_dial() {
    let hand = calibrated_default_hand().unwrap();
    let mut scene = dial_scenario(&hand).unwrap();
    scene.hold = ActuationCommand::excursion(vec![0.0; hand.tendons.len()]);
    assert!(matches!(run_dial_scenario(&hand, &scene, &DIAL_EXCURSIONS), Err(HandError::Dial(_))));
}
