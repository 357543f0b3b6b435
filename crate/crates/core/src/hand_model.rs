//! Articulated hand description: fingers, joints, links, tendon routing.
//!
//! Lengths are millimeters and angles radians throughout this module. The
//! configuration file layer (`config`) converts to and from degrees.
//!
//! Joint axes are laid out in a canonical order: fingers in model order, joints
//! from the palm outwards, and for each joint its axes in order. A [`Posture`]
//! stores one angle per axis in that order.

use std::fmt;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};

use crate::error::{HandError, Result};

/// Proximal phalanx length of the default index finger.
pub const DEFAULT_PROXIMAL_LENGTH: f64 = 50.0;

/// Distal:middle:proximal phalanx proportions.
pub const PHALANX_RATIO: [f64; 3] = [2.0, 3.0, 5.0];

/// Rest angles of the four fingers (MP, PIP, DIP), degrees from full extension.
pub const FINGER_REST_DEG: [f64; 3] = [35.0, 40.0, 15.0];

/// Centerline moment arms (MP, PIP, DIP) before the guide-offset correction.
pub const FINGER_BASE_ARMS: [f64; 3] = [6.5, 6.0, 5.6];

/// Guide exit offset from the skeleton end point.
pub const GUIDE_OFFSET: f64 = 3.0;

/// Guide inclination to the skeleton centerline, degrees.
pub const GUIDE_ANGLE_DEG: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerName {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
}

impl FingerName {
    pub const ALL: [FingerName; 5] = [
        FingerName::Thumb,
        FingerName::Index,
        FingerName::Middle,
        FingerName::Ring,
        FingerName::Little,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FingerName::Thumb => "thumb",
            FingerName::Index => "index",
            FingerName::Middle => "middle",
            FingerName::Ring => "ring",
            FingerName::Little => "little",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        FingerName::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for FingerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rigid phalanx, modeled for contact as a capsule around its centerline.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub length: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    /// One flexion axis (local x).
    Hinge,
    /// Two axes: axis 0 about local x (adduction), then axis 1 about the
    /// rotated local y (opposition).
    Spherical2Dof,
}

impl JointKind {
    pub fn axis_count(self) -> usize {
        match self {
            JointKind::Hinge => 1,
            JointKind::Spherical2Dof => 2,
        }
    }
}

/// Per-axis joint parameters. The joint spring stands in for skin elasticity.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAxis {
    /// Spring-neutral angle (rad).
    pub rest: f64,
    /// Torsional stiffness (N·mm/rad).
    pub stiffness: f64,
    /// Viscous damping (N·mm·s/rad).
    pub damping: f64,
    /// Lower and upper angle limits (rad).
    pub limits: (f64, f64),
    /// Lumped inertia about the axis (kg·mm²), used only by `dynamics`.
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub axes: Vec<JointAxis>,
}

/// Identifies a joint by finger and position within that finger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointRef {
    pub finger: FingerName,
    pub joint: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Flexion,
    Extension,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Flexion => 1.0,
            Side::Extension => -1.0,
        }
    }
}

/// Where a tendon passes one joint axis, and how its guide is shaped there.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingCrossing {
    pub joint: JointRef,
    pub axis: usize,
    /// Moment arm with the guide on the skeleton centerline (mm).
    pub base_arm: f64,
    /// Guide exit distance from the skeleton end point (mm).
    pub offset: f64,
    /// Guide inclination to the centerline (rad).
    pub guide_angle: f64,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tendon {
    pub name: String,
    pub muscle_analog: String,
    pub crossings: Vec<RoutingCrossing>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finger {
    pub name: FingerName,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    /// Pose of the first joint relative to the palm frame.
    pub base_frame: Isometry3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchAttachment {
    Palm,
    /// Rides on the thumb CM joint (after both of its rotations).
    ThumbMetacarpal,
}

/// One rigid capsule patch of the palm surface.
#[derive(Debug, Clone, PartialEq)]
pub struct PalmPatch {
    pub name: String,
    pub start: Point3<f64>,
    pub end: Point3<f64>,
    pub radius: f64,
    pub attachment: PatchAttachment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandModel {
    pub name: String,
    pub fingers: Vec<Finger>,
    pub tendons: Vec<Tendon>,
    pub palm_frame: Isometry3<f64>,
    pub palm_patches: Vec<PalmPatch>,
}

/// Location of one joint axis within the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisId {
    pub finger: usize,
    pub joint: usize,
    pub axis: usize,
}

impl HandModel {
    /// Number of joint axes.
    pub fn dof(&self) -> usize {
        self.fingers
            .iter()
            .flat_map(|f| &f.joints)
            .map(|j| j.axes.len())
            .sum()
    }

    pub fn axis_ids(&self) -> Vec<AxisId> {
        let mut ids = Vec::with_capacity(self.dof());
        for (fi, finger) in self.fingers.iter().enumerate() {
            for (ji, joint) in finger.joints.iter().enumerate() {
                for ai in 0..joint.axes.len() {
                    ids.push(AxisId {
                        finger: fi,
                        joint: ji,
                        axis: ai,
                    });
                }
            }
        }
        ids
    }

    pub fn axis(&self, id: AxisId) -> &JointAxis {
        &self.fingers[id.finger].joints[id.joint].axes[id.axis]
    }

    pub fn axes(&self) -> impl Iterator<Item = &JointAxis> {
        self.fingers
            .iter()
            .flat_map(|f| &f.joints)
            .flat_map(|j| &j.axes)
    }

    pub fn axes_mut(&mut self) -> impl Iterator<Item = &mut JointAxis> {
        self.fingers
            .iter_mut()
            .flat_map(|f| &mut f.joints)
            .flat_map(|j| &mut j.axes)
    }

    pub fn finger_index(&self, name: FingerName) -> Option<usize> {
        self.fingers.iter().position(|f| f.name == name)
    }

    pub fn finger(&self, name: FingerName) -> Option<&Finger> {
        self.fingers.iter().find(|f| f.name == name)
    }

    pub fn joint(&self, r: JointRef) -> Option<&Joint> {
        self.finger(r.finger).and_then(|f| f.joints.get(r.joint))
    }

    /// Canonical index of `axis` of joint `r`, if it exists.
    pub fn axis_index(&self, r: JointRef, axis: usize) -> Option<usize> {
        let mut offset = 0;
        for finger in &self.fingers {
            for (ji, joint) in finger.joints.iter().enumerate() {
                if finger.name == r.finger && ji == r.joint {
                    return (axis < joint.axes.len()).then_some(offset + axis);
                }
                offset += joint.axes.len();
            }
        }
        None
    }

    /// Canonical index of the axis named `finger/JOINT` with the given axis number.
    pub fn axis_by_name(&self, finger: FingerName, joint: &str, axis: usize) -> Option<usize> {
        let f = self.finger(finger)?;
        let ji = f.joints.iter().position(|j| j.name == joint)?;
        self.axis_index(
            JointRef {
                finger,
                joint: ji,
            },
            axis,
        )
    }

    /// Human-readable label such as `index/DIP` or `thumb/CM[1]`.
    pub fn axis_label(&self, id: AxisId) -> String {
        let finger = &self.fingers[id.finger];
        let joint = &finger.joints[id.joint];
        if joint.axes.len() > 1 {
            format!("{}/{}[{}]", finger.name, joint.name, id.axis)
        } else {
            format!("{}/{}", finger.name, joint.name)
        }
    }

    pub fn joint_label(&self, r: JointRef) -> String {
        match self.joint(r) {
            Some(j) => format!("{}/{}", r.finger, j.name),
            None => format!("{}/#{}", r.finger, r.joint),
        }
    }

    pub fn tendon_index(&self, name: &str) -> Option<usize> {
        self.tendons.iter().position(|t| t.name == name)
    }

    pub fn rest_posture(&self) -> Posture {
        Posture(self.axes().map(|a| a.rest).collect())
    }

    pub fn lower_limits(&self) -> Vec<f64> {
        self.axes().map(|a| a.limits.0).collect()
    }

    pub fn upper_limits(&self) -> Vec<f64> {
        self.axes().map(|a| a.limits.1).collect()
    }

    pub fn stiffnesses(&self) -> Vec<f64> {
        self.axes().map(|a| a.stiffness).collect()
    }
}

/// Joint angles (rad), one per axis in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Posture(pub Vec<f64>);

impl Posture {
    pub fn new(angles: Vec<f64>) -> Self {
        Posture(angles)
    }

    pub fn from_degrees(deg: &[f64]) -> Self {
        Posture(deg.iter().map(|d| d.to_radians()).collect())
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.to_degrees()).collect()
    }

    pub fn check_dimension(&self, model: &HandModel) -> Result<()> {
        let expected = model.dof();
        if self.0.len() != expected {
            return Err(HandError::DimensionMismatch {
                expected,
                got: self.0.len(),
            });
        }
        Ok(())
    }

    /// Clamps every angle into its joint limits.
    pub fn clamped(&self, model: &HandModel) -> Posture {
        Posture(
            self.0
                .iter()
                .zip(model.axes())
                .map(|(&q, a)| q.clamp(a.limits.0, a.limits.1))
                .collect(),
        )
    }
}

fn axis_params(rest_deg: f64, limits_deg: (f64, f64), stiffness: f64, inertia: f64) -> JointAxis {
    JointAxis {
        rest: rest_deg.to_radians(),
        stiffness,
        damping: 0.0,
        limits: (limits_deg.0.to_radians(), limits_deg.1.to_radians()),
        inertia,
    }
}

/// Uncalibrated placeholder stiffness; `calibration::calibrate_stiffness` replaces it.
const PLACEHOLDER_STIFFNESS: f64 = 100.0;

/// Tissue density used for thin-rod inertia defaults (kg/mm³).
pub const TISSUE_DENSITY: f64 = 1.1e-6;

/// Lumped inertia of a straight chain of links about the joint at the chain start.
pub fn chain_inertia(links: &[Link]) -> f64 {
    let mut along = 0.0;
    let mut inertia = 0.0;
    for l in links {
        let mass = TISSUE_DENSITY * std::f64::consts::PI * l.radius * l.radius * l.length;
        let center = along + 0.5 * l.length;
        inertia += mass * (center * center + l.length * l.length / 12.0);
        along += l.length;
    }
    inertia
}

fn four_finger(
    name: FingerName,
    proximal: f64,
    radii: [f64; 3],
    base: Vector3<f64>,
) -> Finger {
    let [d, m, p] = PHALANX_RATIO;
    let lengths = [proximal, proximal * m / p, proximal * d / p];
    let links: Vec<Link> = ["proximal", "middle", "distal"]
        .iter()
        .zip(lengths.iter().zip(radii))
        .map(|(n, (&length, radius))| Link {
            name: n.to_string(),
            length,
            radius,
        })
        .collect();
    let limits = [(0.0, 90.0), (0.0, 110.0), (0.0, 80.0)];
    let joints = ["MP", "PIP", "DIP"]
        .iter()
        .enumerate()
        .map(|(i, n)| Joint {
            name: n.to_string(),
            kind: JointKind::Hinge,
            axes: vec![axis_params(
                FINGER_REST_DEG[i],
                limits[i],
                PLACEHOLDER_STIFFNESS,
                chain_inertia(&links[i..]),
            )],
        })
        .collect();
    Finger {
        name,
        links,
        joints,
        base_frame: Isometry3::from_parts(Translation3::from(base), UnitQuaternion::identity()),
    }
}

/// Orientation of the thumb CM frame: local x along the palm normal, local y
/// along the fully abducted metacarpal direction (in the palm plane, pointing
/// radially and distally at `spread_deg` from the finger direction).
pub fn thumb_base_rotation(spread_deg: f64) -> UnitQuaternion<f64> {
    let s = spread_deg.to_radians();
    let x = Vector3::z();
    let y = Vector3::new(s.sin(), s.cos(), 0.0);
    let z = x.cross(&y);
    let m = nalgebra::Matrix3::from_columns(&[x, y, z]);
    UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(m))
}

/// Thumb CM location and spread used by the default hand.
pub const THUMB_CM: [f64; 3] = [30.0, 22.0, 8.0];
pub const THUMB_SPREAD_DEG: f64 = 55.0;

fn thumb() -> Finger {
    let links = vec![
        Link {
            name: "metacarpal".into(),
            length: 45.0,
            radius: 10.0,
        },
        Link {
            name: "phalanx".into(),
            length: 58.0,
            radius: 9.0,
        },
    ];
    let cm_inertia = chain_inertia(&links);
    let mp_inertia = chain_inertia(&links[1..]);
    let joints = vec![
        Joint {
            name: "CM".into(),
            kind: JointKind::Spherical2Dof,
            axes: vec![
                axis_params(5.0, (0.0, 60.0), PLACEHOLDER_STIFFNESS, cm_inertia),
                axis_params(10.0, (0.0, 90.0), PLACEHOLDER_STIFFNESS, cm_inertia),
            ],
        },
        Joint {
            name: "MP".into(),
            kind: JointKind::Hinge,
            axes: vec![axis_params(10.0, (0.0, 80.0), PLACEHOLDER_STIFFNESS, mp_inertia)],
        },
    ];
    Finger {
        name: FingerName::Thumb,
        links,
        joints,
        base_frame: Isometry3::from_parts(
            Translation3::new(THUMB_CM[0], THUMB_CM[1], THUMB_CM[2]),
            thumb_base_rotation(THUMB_SPREAD_DEG),
        ),
    }
}

fn crossing(finger: FingerName, joint: usize, axis: usize, base_arm: f64, offset: f64) -> RoutingCrossing {
    RoutingCrossing {
        joint: JointRef { finger, joint },
        axis,
        base_arm,
        offset,
        guide_angle: if offset > 0.0 {
            GUIDE_ANGLE_DEG.to_radians()
        } else {
            0.0
        },
        side: Side::Flexion,
    }
}

fn finger_flexor(finger: FingerName) -> Tendon {
    Tendon {
        name: format!("{finger}_flexor"),
        muscle_analog: "flexor digitorum profundus".into(),
        crossings: (0..3)
            .map(|j| crossing(finger, j, 0, FINGER_BASE_ARMS[j], GUIDE_OFFSET))
            .collect(),
    }
}

fn palm_patches() -> Vec<PalmPatch> {
    let patch = |name: &str, a: [f64; 3], b: [f64; 3], radius: f64, attachment| PalmPatch {
        name: name.into(),
        start: Point3::from(a),
        end: Point3::from(b),
        radius,
        attachment,
    };
    vec![
        // A: distal palm under the MP fold.
        patch("A", [-32.0, 72.0, 0.0], [22.0, 76.0, 0.0], 10.0, PatchAttachment::Palm),
        // B: central palm, rigid.
        patch("B", [-30.0, 48.0, 0.0], [18.0, 48.0, 0.0], 10.0, PatchAttachment::Palm),
        // C: hypothenar, along the ulnar edge.
        patch("C", [-32.0, 10.0, 0.0], [-30.0, 40.0, 0.0], 11.0, PatchAttachment::Palm),
        // D: thenar bulge riding on the thumb CM joint.
        patch(
            "D",
            [0.0, 6.0, 14.0],
            [0.0, 30.0, 14.0],
            11.0,
            PatchAttachment::ThumbMetacarpal,
        ),
    ]
}

/// Builds the default 15-DoF, 7-tendon hand.
///
/// Joint stiffnesses are uncalibrated placeholders and damping is zero;
/// run the calibration routines before simulating.
pub fn build_default_hand() -> HandModel {
    let fingers = vec![
        thumb(),
        four_finger(
            FingerName::Index,
            DEFAULT_PROXIMAL_LENGTH,
            [9.0, 8.5, 8.0],
            Vector3::new(24.0, 90.0, 0.0),
        ),
        four_finger(
            FingerName::Middle,
            54.0,
            [9.0, 8.5, 8.0],
            Vector3::new(5.0, 92.0, 0.0),
        ),
        four_finger(
            FingerName::Ring,
            51.0,
            [8.5, 8.0, 7.5],
            Vector3::new(-14.0, 89.0, 0.0),
        ),
        four_finger(
            FingerName::Little,
            42.0,
            [8.0, 7.5, 7.0],
            Vector3::new(-32.0, 82.0, 0.0),
        ),
    ];

    let mut tendons = vec![
        Tendon {
            name: "thumb_adductor".into(),
            muscle_analog: "adductor pollicis".into(),
            crossings: vec![crossing(FingerName::Thumb, 0, 0, 12.0, GUIDE_OFFSET)],
        },
        Tendon {
            name: "thumb_opponens".into(),
            muscle_analog: "opponens pollicis".into(),
            crossings: vec![crossing(FingerName::Thumb, 0, 1, 12.0, GUIDE_OFFSET)],
        },
        Tendon {
            name: "thumb_flexor".into(),
            muscle_analog: "flexor pollicis brevis".into(),
            crossings: vec![
                crossing(FingerName::Thumb, 0, 1, 4.0, 0.0),
                crossing(FingerName::Thumb, 1, 0, FINGER_BASE_ARMS[0], GUIDE_OFFSET),
            ],
        },
    ];
    tendons.extend(
        [
            FingerName::Index,
            FingerName::Middle,
            FingerName::Ring,
            FingerName::Little,
        ]
        .into_iter()
        .map(finger_flexor),
    );

    HandModel {
        name: "skin-skeleton hand".into(),
        fingers,
        tendons,
        palm_frame: Isometry3::identity(),
        palm_patches: palm_patches(),
    }
}

/// A violated model invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// Offending element, e.g. `index/PIP` or `tendon thumb_flexor`.
    pub element: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

/// Checks every model invariant and returns one diagnostic per violation.
pub fn validate(model: &HandModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |element: String, message: String| out.push(Diagnostic { element, message });

    for finger in &model.fingers {
        for link in &finger.links {
            let el = format!("{}/{}", finger.name, link.name);
            if !(link.length > 0.0) {
                push(el.clone(), format!("link length {} must be positive", link.length));
            }
            if !(link.radius > 0.0) {
                push(el, format!("link radius {} must be positive", link.radius));
            }
        }
        if finger.links.len() != finger.joints.len() {
            push(
                finger.name.to_string(),
                format!(
                    "{} links but {} joints; each joint drives one link",
                    finger.links.len(),
                    finger.joints.len()
                ),
            );
        }
        for joint in &finger.joints {
            let el = format!("{}/{}", finger.name, joint.name);
            if joint.axes.len() != joint.kind.axis_count() {
                push(
                    el.clone(),
                    format!(
                        "{:?} joint needs {} axes, has {}",
                        joint.kind,
                        joint.kind.axis_count(),
                        joint.axes.len()
                    ),
                );
            }
            if joint.kind == JointKind::Spherical2Dof
                && !(finger.name == FingerName::Thumb && joint.name == "CM")
            {
                push(el.clone(), "spherical joints are only allowed at the thumb CM".into());
            }
            for (ai, a) in joint.axes.iter().enumerate() {
                if !(a.stiffness > 0.0) {
                    push(el.clone(), format!("axis {ai} stiffness {} must be positive", a.stiffness));
                }
                if !(a.damping >= 0.0) {
                    push(el.clone(), format!("axis {ai} damping {} must be non-negative", a.damping));
                }
                if !(a.limits.0 <= a.rest && a.rest <= a.limits.1) {
                    push(
                        el.clone(),
                        format!(
                            "axis {ai} rest {:.3}° outside limits [{:.3}°, {:.3}°]",
                            a.rest.to_degrees(),
                            a.limits.0.to_degrees(),
                            a.limits.1.to_degrees()
                        ),
                    );
                }
                if !(a.inertia > 0.0) {
                    push(el.clone(), format!("axis {ai} inertia {} must be positive", a.inertia));
                }
            }
        }
        let expected: &[(&str, JointKind)] = if finger.name == FingerName::Thumb {
            &[("CM", JointKind::Spherical2Dof), ("MP", JointKind::Hinge)]
        } else {
            &[
                ("MP", JointKind::Hinge),
                ("PIP", JointKind::Hinge),
                ("DIP", JointKind::Hinge),
            ]
        };
        let layout: Vec<(&str, JointKind)> = finger
            .joints
            .iter()
            .map(|j| (j.name.as_str(), j.kind))
            .collect();
        if layout != expected {
            push(
                finger.name.to_string(),
                format!("joint layout {layout:?} differs from {expected:?}"),
            );
        }
    }

    for patch in &model.palm_patches {
        if !(patch.radius > 0.0) {
            push(format!("palm/{}", patch.name), format!("radius {} must be positive", patch.radius));
        }
    }

    for tendon in &model.tendons {
        let el = format!("tendon {}", tendon.name);
        if tendon.crossings.is_empty() {
            push(el.clone(), "tendon crosses no joint".into());
        }
        let mut seen: Vec<(JointRef, usize)> = Vec::new();
        for c in &tendon.crossings {
            let label = model.joint_label(c.joint);
            if model.axis_index(c.joint, c.axis).is_none() {
                push(el.clone(), format!("crossing references missing joint axis {label}[{}]", c.axis));
            }
            if seen.contains(&(c.joint, c.axis)) {
                push(el.clone(), format!("crosses {label}[{}] more than once", c.axis));
            }
            seen.push((c.joint, c.axis));
            if !(c.base_arm > 0.0) {
                push(el.clone(), format!("base arm {} at {label} must be positive", c.base_arm));
            }
            if !(c.offset >= 0.0) {
                push(el.clone(), format!("guide offset {} at {label} must be non-negative", c.offset));
            }
            let deg = c.guide_angle.to_degrees();
            if !(0.0..90.0).contains(&deg) {
                push(el.clone(), format!("guide angle {deg}° at {label} must be in [0°, 90°)"));
            }
        }
    }
    out
}

/// Uniformly rescales all lengths, radii, positions and moment-arm parameters.
/// Angles, stiffnesses, damping and inertia are unchanged.
pub fn scale_hand(model: &HandModel, factor: f64) -> Result<HandModel> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(HandError::NonPositiveScale(factor));
    }
    let mut m = model.clone();
    for finger in &mut m.fingers {
        for link in &mut finger.links {
            link.length *= factor;
            link.radius *= factor;
        }
        finger.base_frame.translation.vector *= factor;
    }
    m.palm_frame.translation.vector *= factor;
    for patch in &mut m.palm_patches {
        patch.start.coords *= factor;
        patch.end.coords *= factor;
        patch.radius *= factor;
    }
    for tendon in &mut m.tendons {
        for c in &mut tendon.crossings {
            c.base_arm *= factor;
            c.offset *= factor;
        }
    }
    Ok(m)
}

/// A one-link, one-hinge, one-tendon hand with a constant moment arm, for
/// checking solvers against closed forms. The hinge rests at 0 rad with
/// limits ±120°.
pub fn single_hinge_hand(stiffness: f64, arm: f64) -> HandModel {
    let links = vec![Link {
        name: "link".into(),
        length: 40.0,
        radius: 8.0,
    }];
    let inertia = chain_inertia(&links);
    HandModel {
        name: "single-hinge".into(),
        fingers: vec![Finger {
            name: FingerName::Index,
            links,
            joints: vec![Joint {
                name: "MP".into(),
                kind: JointKind::Hinge,
                axes: vec![axis_params(0.0, (-120.0, 120.0), stiffness, inertia)],
            }],
            base_frame: Isometry3::identity(),
        }],
        tendons: vec![Tendon {
            name: "flexor".into(),
            muscle_analog: "flexor".into(),
            crossings: vec![RoutingCrossing {
                joint: JointRef {
                    finger: FingerName::Index,
                    joint: 0,
                },
                axis: 0,
                base_arm: arm,
                offset: 0.0,
                guide_angle: 0.0,
                side: Side::Flexion,
            }],
        }],
        palm_frame: Isometry3::identity(),
        palm_patches: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hand_structure() {
        let hand = build_default_hand();
        assert_eq!(hand.dof(), 15);
        assert_eq!(hand.tendons.len(), 7);
        assert_eq!(hand.fingers.len(), 5);
        assert!(validate(&hand).is_empty(), "{:?}", validate(&hand));
    }

    #[test]
    fn index_link_ratio_and_rest() {
        let hand = build_default_hand();
        let index = hand.finger(FingerName::Index).unwrap();
        let l: Vec<f64> = index.links.iter().map(|l| l.length).collect();
        assert!((l[2] / l[0] - 0.4).abs() < 1e-12);
        assert!((l[1] / l[0] - 0.6).abs() < 1e-12);
        let rest: Vec<f64> = index.joints.iter().map(|j| j.axes[0].rest.to_degrees()).collect();
        for (r, e) in rest.iter().zip([35.0, 40.0, 15.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn index_dip_crossing_parameters() {
        let hand = build_default_hand();
        let t = &hand.tendons[hand.tendon_index("index_flexor").unwrap()];
        let dip = &t.crossings[2];
        assert_eq!(dip.base_arm, 5.6);
        assert_eq!(dip.offset, 3.0);
        assert!((dip.guide_angle.to_degrees() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn zero_stiffness_is_reported() {
        let mut hand = build_default_hand();
        hand.fingers[1].joints[1].axes[0].stiffness = 0.0;
        let d = validate(&hand);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].element, "index/PIP");
        assert!(d[0].message.contains("stiffness"));
    }

    #[test]
    fn duplicate_crossing_is_reported() {
        let mut hand = build_default_hand();
        let i = hand.tendon_index("middle_flexor").unwrap();
        let dup = hand.tendons[i].crossings[0].clone();
        hand.tendons[i].crossings.push(dup);
        let d = validate(&hand);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.contains("more than once"));
    }

    #[test]
    fn scale_identity_and_double() {
        let hand = build_default_hand();
        assert_eq!(scale_hand(&hand, 1.0).unwrap(), hand);
        let big = scale_hand(&hand, 2.0).unwrap();
        let t = &big.tendons[big.tendon_index("index_flexor").unwrap()];
        assert!((t.crossings[2].base_arm - 11.2).abs() < 1e-12);
        let half = scale_hand(&hand, 0.5).unwrap();
        let l: Vec<f64> = half.finger(FingerName::Index).unwrap().links.iter().map(|l| l.length).collect();
        assert!((l[2] / l[0] - 0.4).abs() < 1e-12 && (l[1] / l[0] - 0.6).abs() < 1e-12);
        assert!(scale_hand(&hand, 0.0).is_err());
        assert!(scale_hand(&hand, -1.0).is_err());
    }

    #[test]
    fn axis_lookup() {
        let hand = build_default_hand();
        assert_eq!(hand.axis_by_name(FingerName::Thumb, "CM", 1), Some(1));
        assert_eq!(hand.axis_by_name(FingerName::Index, "MP", 0), Some(3));
        assert_eq!(hand.axis_by_name(FingerName::Little, "DIP", 0), Some(14));
        assert_eq!(hand.axis_by_name(FingerName::Index, "CM", 0), None);
    }
}
