//! Shipped scenario catalog.
//!
//! Coordinates are in the palm frame of the default hand (mm): x toward the
//! thumb side, y toward the fingertips, z out of the palm. Excursion vectors
//! follow the default tendon order: thumb adductor, thumb opponens, thumb
//! flexor, then the index, middle, ring and little flexors.

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};

use super::{ramp, AxisOverride, ClassRules, GraspClass, GraspFamily, GraspScenario};
use crate::contact_world::{ContactWorld, Object, Shape};
use crate::hand_model::FingerName::{self, Index, Little, Middle, Ring, Thumb};

use GraspFamily::{Power, Precision};

pub const GRASP_CLASSES: [GraspClass; 16] = [
    class(1, "Heavy Wrap, Large Diameter", Power),
    class(2, "Heavy Wrap, Small Diameter", Power),
    class(3, "Medium Wrap", Power),
    class(4, "Adducted Thumb", Power),
    class(5, "Light Tool", Power),
    class(6, "Thumb-4 Finger", Precision),
    class(7, "Thumb-3 Finger", Precision),
    class(8, "Thumb-2 Finger", Precision),
    class(9, "Thumb-Index Finger", Precision),
    class(10, "Power Disk", Power),
    class(11, "Power Sphere", Power),
    class(12, "Precision Disk", Precision),
    class(13, "Precision Sphere", Precision),
    class(14, "Tripod", Precision),
    class(15, "Platform", Power),
    class(16, "Lateral Pinch", Power),
];

const fn class(id: u8, name: &'static str, family: GraspFamily) -> GraspClass {
    GraspClass { id, name, family }
}

const ALL_FOUR: [FingerName; 4] = [Index, Middle, Ring, Little];

/// Rules for a class.
///
/// Power classes need a palm-or-proximal contact and an opposing normal
/// pair, except Platform (a supporting palm contact suffices) and Lateral
/// Pinch (thumb against the side of the index middle link). Precision
/// classes need distal-only contacts on their digit set with an opposing
/// pair.
pub fn class_rules(grasp_class: GraspClass) -> ClassRules {
    let power = |digits: &[FingerName]| ClassRules {
        palm_or_proximal: true,
        opposition: true,
        digits: digits.to_vec(),
        ..ClassRules::default()
    };
    let precision = |digits: &[FingerName]| ClassRules {
        distal_only: true,
        opposition: true,
        digits: digits.to_vec(),
        ..ClassRules::default()
    };
    match grasp_class.id {
        1 | 2 => power(&[Thumb, Index, Middle, Ring, Little]),
        3 => power(&ALL_FOUR),
        4 => power(&[Thumb, Index, Middle, Ring, Little]),
        5 => power(&[Thumb, Index, Middle]),
        6 => precision(&[Thumb, Index, Middle, Ring, Little]),
        7 => precision(&[Thumb, Index, Middle, Ring]),
        8 => precision(&[Thumb, Index, Middle]),
        9 => precision(&[Thumb, Index]),
        10 => power(&[Thumb, Index, Middle, Ring]),
        11 => ClassRules {
            palm: true,
            ..power(&[Index, Middle, Ring])
        },
        12 | 13 => precision(&[Thumb, Index, Middle, Ring]),
        14 => precision(&[Thumb, Index, Middle]),
        15 => ClassRules {
            palm: true,
            ..ClassRules::default()
        },
        16 => ClassRules {
            opposition: true,
            digits: vec![Thumb],
            links: vec![(Index, 1)],
            ..ClassRules::default()
        },
        _ => ClassRules::default(),
    }
}

fn at(x: f64, y: f64, z: f64) -> Isometry3<f64> {
    Isometry3::from_parts(Translation3::new(x, y, z), UnitQuaternion::identity())
}

/// Pose with the object's local z axis along `axis`.
fn along(axis: Vector3<f64>, x: f64, y: f64, z: f64) -> Isometry3<f64> {
    let rot = UnitQuaternion::rotation_between(&Vector3::z(), &axis).unwrap_or_else(UnitQuaternion::identity);
    Isometry3::from_parts(Translation3::new(x, y, z), rot)
}

fn sphere(name: &str, radius: f64, pose: Isometry3<f64>) -> Object {
    Object::new(name, Shape::Sphere { radius }, pose)
}

fn cylinder(name: &str, radius: f64, height: f64, pose: Isometry3<f64>) -> Object {
    Object::new(name, Shape::Cylinder { radius, height }, pose)
}

fn cuboid(name: &str, size: [f64; 3], pose: Isometry3<f64>) -> Object {
    Object::new(
        name,
        Shape::Box {
            ex: size[0],
            ey: size[1],
            ez: size[2],
        },
        pose,
    )
}

const RAMP_STEPS: usize = 6;

fn scenario(id: u8, objects: Vec<Object>, excursions: [f64; 7]) -> GraspScenario {
    GraspScenario {
        grasp_class: GraspClass::by_id(id).expect("catalog ids are valid"),
        world: ContactWorld::new(objects),
        command_script: ramp(&excursions, RAMP_STEPS),
        overrides: Vec::new(),
    }
}

/// One scripted scenario per class, in class-id order.
pub fn taxonomy_catalog() -> Vec<GraspScenario> {
    let x_axis = Vector3::x();
    let mut out = vec![
        scenario(
            1,
            vec![cylinder("bottle", 25.18, 144.6, along(x_axis, -2.09, 82.3, 45.44))],
            [7.64, 11.42, 3.41, 8.3, 10.28, 8.96, 4.02],
        ),
        scenario(
            2,
            vec![cylinder(
                "handle",
                15.28,
                136.0,
                along(Vector3::new(1.0, 0.3, 0.3), -7.19, 89.76, 37.99),
            )],
            [2.6, 14.58, 10.1, 8.02, 12.25, 9.61, 9.25],
        ),
        scenario(
            3,
            vec![cylinder("jar", 20.91, 129.9, along(Vector3::new(1.0, 0.3, 0.0), -4.73, 84.85, 42.11))],
            [0.0, 0.0, 0.0, 8.36, 11.28, 10.84, 6.87],
        ),
        scenario(
            4,
            vec![cylinder("rod", 15.03, 128.6, along(x_axis, 26.1, 85.23, 32.13))],
            // The thumb is posed by overrides and left slack.
            [-1.0, -1.0, -1.0, 13.85, 15.63, 11.71, 10.09],
        ),
        scenario(
            5,
            vec![cylinder("drumstick", 7.0, 135.0, along(Vector3::new(1.0, 0.3, 0.0), -5.21, 103.99, 39.28))],
            [4.41, 12.63, 7.62, 5.44, 13.38, 12.04, 7.97],
        ),
        scenario(
            6,
            vec![sphere("ball", 25.02, at(-2.33, 86.34, 60.64))],
            [10.74, 17.89, 13.18, 7.56, 7.73, 5.98, 5.76],
        ),
        scenario(
            7,
            vec![sphere("ball", 21.39, at(2.98, 108.77, 66.38))],
            [7.07, 11.56, 12.34, 3.03, 3.85, 4.29, 0.0],
        ),
        scenario(
            8,
            vec![sphere("ball", 19.38, at(8.44, 115.45, 67.9))],
            [7.96, 11.32, 11.29, 1.36, 2.63, 0.0, 0.0],
        ),
        scenario(
            9,
            vec![sphere("marble", 6.5, at(11.23, 94.78, 62.58))],
            [8.83, 8.78, 11.74, 9.46, 0.0, 0.0, 0.0],
        ),
        scenario(
            10,
            vec![cylinder("puck", 24.88, 27.51, along(x_axis, 2.08, 77.96, 34.88))],
            [12.21, 18.07, 13.79, 17.0, 13.0, 10.82, 11.19],
        ),
        scenario(
            11,
            vec![sphere("ball", 20.0, at(4.87, 77.96, 29.87))],
            [0.0, 0.0, 0.0, 17.55, 14.72, 17.78, 12.16],
        ),
        scenario(
            12,
            vec![cylinder("coaster", 25.13, 14.01, along(Vector3::new(0.0, -1.0, 1.0), 12.43, 91.1, 60.17))],
            [7.5, 16.55, 12.25, 5.45, 6.12, 6.85, 5.43],
        ),
        scenario(
            13,
            vec![sphere("ball", 26.28, at(8.76, 92.42, 56.62))],
            [7.5, 16.55, 12.25, 5.45, 6.12, 6.85, 5.43],
        ),
        scenario(
            14,
            vec![sphere("ball", 22.05, at(16.1, 102.03, 67.42))],
            [8.15, 17.57, 12.32, 3.74, 4.52, 0.0, 0.0],
        ),
        scenario(
            15,
            vec![cuboid("book", [54.0, 55.0, 20.0], at(-13.0, 42.5, 21.0))],
            [0.0; 7],
        ),
        scenario(
            16,
            vec![cuboid("card", [2.0, 44.64, 36.65], at(33.59, 90.11, 51.13))],
            [6.3, 15.88, 13.43, 7.88, 22.0, 21.43, 7.69],
        ),
    ];
    // Adducted thumb: the thumb is held against the radial side of the palm.
    out[3].overrides = vec![
        AxisOverride {
            finger: Thumb,
            joint: "CM".into(),
            axis: 0,
            angle: 40f64.to_radians(),
        },
        AxisOverride {
            finger: Thumb,
            joint: "CM".into(),
            axis: 1,
            angle: 0.0,
        },
        AxisOverride {
            finger: Thumb,
            joint: "MP".into(),
            axis: 0,
            angle: 0.0,
        },
    ];
    out
}
