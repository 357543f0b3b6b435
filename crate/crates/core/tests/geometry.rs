use approx::assert_relative_eq;
use proptest::prelude::*;

use tendon_hand::hand_model::{build_default_hand, validate, FingerName, JointRef, Posture, RoutingCrossing, Side};
use tendon_hand::tendon_geometry::{excursion, limit_excursion, moment_arm, moment_arm_vector};

fn dip(offset: f64, angle_deg: f64) -> RoutingCrossing {
    RoutingCrossing {
        joint: JointRef {
            finger: FingerName::Index,
            joint: 2,
        },
        axis: 0,
        base_arm: 5.6,
        offset,
        guide_angle: angle_deg.to_radians(),
        side: Side::Flexion,
    }
}

#[test]
fn structure_of_the_default_hand() {
    let hand = build_default_hand();
    assert_eq!(hand.dof(), 15);
    assert_eq!(hand.tendons.len(), 7);
    assert!(validate(&hand).is_empty());
    for f in hand.fingers.iter().filter(|f| f.name != FingerName::Thumb) {
        let l: Vec<f64> = f.links.iter().map(|l| l.length).collect();
        // Distal : middle : proximal.
        assert_relative_eq!(l[2] / l[0], 2.0 / 5.0, max_relative = 0.01);
        assert_relative_eq!(l[1] / l[0], 3.0 / 5.0, max_relative = 0.01);
    }
}

#[test]
fn composite_dip_arm() {
    let r = moment_arm(&dip(3.0, 30.0)).unwrap();
    assert_relative_eq!(r, 5.6 + 3.0 / 3f64.sqrt(), epsilon = 1e-12);
    assert!((6.9..=7.4).contains(&r));
    assert_eq!(moment_arm(&dip(3.0, 0.0)).unwrap(), 5.6);
    assert!(moment_arm(&dip(3.0, 90.0)).is_err());
    let mut ext = dip(3.0, 30.0);
    ext.side = Side::Extension;
    assert_eq!(moment_arm(&ext).unwrap(), -r);
}

#[test]
fn index_flexor_limit_excursion() {
    let hand = build_default_hand();
    let t = &hand.tendons[hand.tendon_index("index_flexor").unwrap()];
    let arms = moment_arm_vector(t, &hand).unwrap();
    // Each joint from rest to its flexion stop: 55°, 70°, 65°.
    let c = 3.0 * 30f64.to_radians().tan();
    let expected = (6.5 + c) * 55f64.to_radians() + (6.0 + c) * 70f64.to_radians() + (5.6 + c) * 65f64.to_radians();
    assert_relative_eq!(limit_excursion(&arms, &hand, &[]), expected, max_relative = 1e-12);
}

proptest! {
    #[test]
    fn excursion_is_linear_in_joint_offsets(
        a in proptest::collection::vec(-0.5..0.5f64, 15),
        b in proptest::collection::vec(-0.5..0.5f64, 15),
        s in -2.0..2.0f64,
    ) {
        let hand = build_default_hand();
        let rest = hand.rest_posture();
        let at = |d: &[f64]| Posture(rest.0.iter().zip(d).map(|(r, d)| r + d).collect());
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        for t in &hand.tendons {
            let lhs = excursion(t, &at(&sum), &hand).unwrap();
            let rhs = excursion(t, &at(&a), &hand).unwrap() + s * excursion(t, &at(&b), &hand).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }
}
