use approx::assert_relative_eq;
use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tendon_hand::contact_world::{
    fingertip, forward_kinematics, point_sdf, signed_distance, Capsule, LinkRef, Object, Shape,
};
use tendon_hand::hand_model::{build_default_hand, scale_hand, FingerName, Posture};

fn index_posture(mp: f64, pip: f64, dip: f64) -> Posture {
    let hand = build_default_hand();
    let mut q = hand.rest_posture();
    let i = hand.axis_by_name(FingerName::Index, "MP", 0).unwrap();
    q.0[i] = mp;
    q.0[i + 1] = pip;
    q.0[i + 2] = dip;
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Planar three-link chain written out by hand.
    #[test]
    fn index_tip_matches_planar_chain(mp in 0.0..1.57f64, pip in 0.0..1.9f64, dip in 0.0..1.39f64) {
        let hand = build_default_hand();
        let lengths: Vec<f64> = hand.finger(FingerName::Index).unwrap().links.iter().map(|l| l.length).collect();
        let mut p = Vector3::new(24.0, 90.0, 0.0);
        let mut phi = 0.0;
        for (l, q) in lengths.iter().zip([mp, pip, dip]) {
            phi += q;
            p += *l * Vector3::new(0.0, phi.cos(), phi.sin());
        }
        let tip = fingertip(&hand, &index_posture(mp, pip, dip), FingerName::Index).unwrap();
        prop_assert!((tip.coords - p).norm() < 1e-9);
    }

    #[test]
    fn links_keep_length_and_stay_connected(seed in any::<u64>()) {
        let hand = build_default_hand();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = Posture(hand.axes().map(|a| rng.gen_range(a.limits.0..=a.limits.1)).collect());
        let pose = forward_kinematics(&hand, &q);
        for finger in &hand.fingers {
            let mut prev: Option<Point3<f64>> = None;
            for (k, link) in finger.links.iter().enumerate() {
                let c = pose.capsule_of(LinkRef::Phalanx { finger: finger.name, link: k }).unwrap();
                prop_assert!(((c.end - c.start).norm() - link.length).abs() < 1e-9);
                if let Some(p) = prev {
                    prop_assert!((c.start - p).norm() < 1e-9);
                }
                prev = Some(c.end);
            }
        }
    }

    #[test]
    fn scaling_the_hand_scales_every_capsule(factor in 0.5..2.0f64, seed in any::<u64>()) {
        let hand = build_default_hand();
        let big = scale_hand(&hand, factor).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = Posture(hand.axes().map(|a| rng.gen_range(a.limits.0..=a.limits.1)).collect());
        let a = forward_kinematics(&hand, &q);
        let b = forward_kinematics(&big, &q);
        for (ca, cb) in a.capsules.iter().zip(&b.capsules) {
            prop_assert!((cb.start.coords - ca.start.coords * factor).norm() < 1e-9);
            prop_assert!((cb.end.coords - ca.end.coords * factor).norm() < 1e-9);
            prop_assert!((cb.radius - ca.radius * factor).abs() < 1e-12);
        }
    }
}

#[test]
fn rest_index_tip() {
    let hand = build_default_hand();
    let tip = fingertip(&hand, &hand.rest_posture(), FingerName::Index).unwrap();
    // Cumulative flexion 35°, 75°, 90° along the chain.
    let (a, b, c) = (35f64.to_radians(), 75f64.to_radians(), 90f64.to_radians());
    let lengths: Vec<f64> = hand.finger(FingerName::Index).unwrap().links.iter().map(|l| l.length).collect();
    let y = 90.0 + lengths[0] * a.cos() + lengths[1] * b.cos() + lengths[2] * c.cos();
    let z = lengths[0] * a.sin() + lengths[1] * b.sin() + lengths[2] * c.sin();
    assert_relative_eq!(tip.x, 24.0, epsilon = 1e-9);
    assert_relative_eq!(tip.y, y, epsilon = 1e-9);
    assert_relative_eq!(tip.z, z, epsilon = 1e-9);
}

fn random_pose(rng: &mut ChaCha8Rng) -> Isometry3<f64> {
    let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Isometry3::from_parts(
        Translation3::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)),
        UnitQuaternion::from_scaled_axis(axis * 2.0),
    )
}

fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
    match rng.gen_range(0..3) {
        0 => Shape::Sphere {
            radius: rng.gen_range(3.0..20.0),
        },
        1 => Shape::Cylinder {
            radius: rng.gen_range(3.0..20.0),
            height: rng.gen_range(5.0..60.0),
        },
        _ => Shape::Box {
            ex: rng.gen_range(3.0..40.0),
            ey: rng.gen_range(3.0..40.0),
            ez: rng.gen_range(3.0..40.0),
        },
    }
}

fn random_capsule(rng: &mut ChaCha8Rng) -> Capsule {
    let mut p = || Point3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
    let (start, end) = (p(), p());
    Capsule {
        link: LinkRef::Palm { patch: 0 },
        start,
        end,
        radius: rng.gen_range(1.0..10.0),
    }
}

// Dense sampling of the point field along the axis brackets the exact
// capsule distance: the field is 1-Lipschitz.
#[test]
fn capsule_distance_matches_axis_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let object = Object::new("o", random_shape(&mut rng), random_pose(&mut rng));
        let cap = random_capsule(&mut rng);
        let n = 4000;
        let sampled = (0..=n)
            .map(|i| point_sdf(&object, &cap.point_at(i as f64 / n as f64)).0)
            .fold(f64::INFINITY, f64::min)
            - cap.radius;
        let step = (cap.end - cap.start).norm() / n as f64;
        let d = signed_distance(&cap, &object);
        assert!(d <= sampled + 1e-7, "{d} > sampled {sampled}");
        assert!(d >= sampled - step, "{d} < sampled {sampled} - {step}");
    }
}

#[test]
fn distance_is_invariant_under_rigid_motion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let object = Object::new("o", random_shape(&mut rng), random_pose(&mut rng));
        let cap = random_capsule(&mut rng);
        let motion = random_pose(&mut rng);
        let moved = Object {
            pose: motion * object.pose,
            ..object.clone()
        };
        let d0 = signed_distance(&cap, &object);
        let d1 = signed_distance(&cap.transformed(&motion), &moved);
        assert!((d0 - d1).abs() < 1e-7, "{d0} vs {d1}");
    }
}

#[test]
fn box_field_at_known_points() {
    let b = Object::new(
        "b",
        Shape::Box {
            ex: 20.0,
            ey: 10.0,
            ez: 4.0,
        },
        Isometry3::translation(1.0, 2.0, 3.0),
    );
    assert_relative_eq!(point_sdf(&b, &Point3::new(1.0, 2.0, 3.0)).0, -2.0, epsilon = 1e-12);
    assert_relative_eq!(point_sdf(&b, &Point3::new(14.0, 2.0, 3.0)).0, 3.0, epsilon = 1e-12);
    // Off a corner: (3, 4, 0) past the faces.
    assert_relative_eq!(point_sdf(&b, &Point3::new(14.0, 11.0, 4.0)).0, 5.0, epsilon = 1e-12);
}
