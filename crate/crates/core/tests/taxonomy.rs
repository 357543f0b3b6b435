use nalgebra::{Point3, Unit, Vector3};

use tendon_hand::config::load_scenario;
use tendon_hand::contact_world::{Contact, LinkRef, Shape};
use tendon_hand::grasp_taxonomy::{classify_contacts, taxonomy_catalog, GraspClass, Verdict, GRASP_CLASSES};
use tendon_hand::hand_model::{build_default_hand, FingerName};
use tendon_hand::statics::CommandMode;

fn touch(finger: FingerName, link: usize, normal: [f64; 3]) -> Contact {
    Contact {
        link: LinkRef::Phalanx { finger, link },
        object: 0,
        point: Point3::origin(),
        normal: Unit::new_normalize(Vector3::from(normal)),
        gap: 0.0,
    }
}

fn palm(normal: [f64; 3]) -> Contact {
    Contact {
        link: LinkRef::Palm { patch: 0 },
        object: 0,
        point: Point3::origin(),
        normal: Unit::new_normalize(Vector3::from(normal)),
        gap: 0.0,
    }
}

fn class(id: u8) -> GraspClass {
    GraspClass::by_id(id).unwrap()
}

#[test]
fn pinch_between_thumb_and_index_tips() {
    let hand = build_default_hand();
    let tips = [touch(FingerName::Thumb, 1, [1.0, 0.0, 0.0]), touch(FingerName::Index, 2, [-1.0, 0.0, 0.0])];
    assert_eq!(classify_contacts(&hand, &tips, true, class(9)).0, Verdict::Achieved);
    // Not a power grasp: nothing on the palm or a first link.
    assert_eq!(classify_contacts(&hand, &tips, true, class(3)).0, Verdict::Failed);
    // Same contacts, solver not converged.
    assert_eq!(classify_contacts(&hand, &tips, false, class(9)).0, Verdict::Failed);
}

#[test]
fn precision_fails_on_a_proximal_contact() {
    let hand = build_default_hand();
    let contacts = [
        touch(FingerName::Thumb, 1, [1.0, 0.0, 0.0]),
        touch(FingerName::Index, 2, [-1.0, 0.0, 0.0]),
        touch(FingerName::Index, 0, [-1.0, 0.0, 0.0]),
    ];
    let (verdict, report) = classify_contacts(&hand, &contacts, true, class(9));
    assert_eq!(verdict, Verdict::Failed);
    assert!(report.iter().any(|c| c.rule == "distal_only" && !c.passed));
}

#[test]
fn parallel_normals_are_not_opposition() {
    let hand = build_default_hand();
    let contacts = [touch(FingerName::Thumb, 1, [0.0, 0.0, 1.0]), touch(FingerName::Index, 2, [0.0, 0.3, 1.0])];
    let (verdict, report) = classify_contacts(&hand, &contacts, true, class(9));
    assert_eq!(verdict, Verdict::Failed);
    assert!(report.iter().any(|c| c.rule == "opposing_normals" && !c.passed));
}

#[test]
fn power_sphere_needs_the_palm() {
    let hand = build_default_hand();
    let mut contacts = vec![
        touch(FingerName::Index, 0, [0.0, -1.0, 0.0]),
        touch(FingerName::Middle, 1, [0.0, 1.0, 0.0]),
        touch(FingerName::Ring, 2, [0.0, 1.0, 0.0]),
    ];
    assert_eq!(classify_contacts(&hand, &contacts, true, class(11)).0, Verdict::Failed);
    contacts.push(palm([0.0, 0.0, 1.0]));
    assert_eq!(classify_contacts(&hand, &contacts, true, class(11)).0, Verdict::Achieved);
}

#[test]
fn platform_is_palm_support_alone() {
    let hand = build_default_hand();
    assert_eq!(classify_contacts(&hand, &[palm([0.0, 0.0, 1.0])], true, class(15)).0, Verdict::Achieved);
    assert_eq!(classify_contacts(&hand, &[], true, class(15)).0, Verdict::Failed);
}

#[test]
fn lateral_pinch_uses_the_side_of_the_index_middle_link() {
    let hand = build_default_hand();
    let contacts = [touch(FingerName::Thumb, 1, [-1.0, 0.0, 0.0]), touch(FingerName::Index, 1, [1.0, 0.0, 0.0])];
    assert_eq!(classify_contacts(&hand, &contacts, true, class(16)).0, Verdict::Achieved);
    let distal = [touch(FingerName::Thumb, 1, [-1.0, 0.0, 0.0]), touch(FingerName::Index, 2, [1.0, 0.0, 0.0])];
    assert_eq!(classify_contacts(&hand, &distal, true, class(16)).0, Verdict::Failed);
}

#[test]
fn catalog_covers_every_class_in_order() {
    let catalog = taxonomy_catalog();
    let ids: Vec<u8> = catalog.iter().map(|s| s.grasp_class.id).collect();
    assert_eq!(ids, (1..=16).collect::<Vec<u8>>());
    assert_eq!(GRASP_CLASSES.len(), 16);
    for s in &catalog {
        assert!(s.command_script.iter().all(|c| c.mode == CommandMode::Excursion));
    }
    let platform = &catalog[14];
    assert!(platform.command_script.iter().all(|c| c.values.iter().all(|v| *v == 0.0)));
    let adducted = &catalog[3];
    assert!(adducted.overrides.iter().all(|o| o.finger == FingerName::Thumb));
    assert!(!adducted.overrides.is_empty());
    assert!(catalog.iter().enumerate().all(|(i, s)| i == 3 || s.overrides.is_empty()));
}

#[test]
fn shipped_sphere_power_file_is_the_catalog_scenario() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/sphere_power.json");
    let file = load_scenario(&path).unwrap().grasp().unwrap();
    let catalog = &taxonomy_catalog()[10];
    assert_eq!(file.grasp_class, catalog.grasp_class);
    assert_eq!(file.world, catalog.world);
    assert_eq!(file.command_script.len(), catalog.command_script.len());
    for (a, b) in file.command_script.iter().zip(&catalog.command_script) {
        assert_eq!(a.mode, b.mode);
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| (x - y).abs() <= 1e-12));
    }
    let Shape::Sphere { radius } = file.world.objects[0].shape else { panic!("not a sphere") };
    // A 40 mm ball.
    assert_eq!(2.0 * radius, 40.0);
}
