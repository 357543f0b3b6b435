//! Graspable objects and hand–object contact queries.

pub mod distance;
pub mod kinematics;

use nalgebra::{Isometry3, Point3, Unit, Vector3};

use crate::error::{HandError, Result};
use crate::hand_model::{HandModel, Posture};

pub use distance::{point_sdf, proximity, signed_distance, Proximity};
pub use kinematics::{fingertip, forward_kinematics, link_capsules, Capsule, HandPose, LinkRef};

/// Object geometry in its local frame. Dimensions are millimeters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    /// Capped cylinder along local z, centered at the origin.
    Cylinder { radius: f64, height: f64 },
    /// Box with full edge lengths along local x, y, z, centered at the origin.
    Box { ex: f64, ey: f64, ez: f64 },
    /// Thin disc free to spin about `axis` (unit, local frame).
    DiscDial {
        radius: f64,
        axis: Vector3<f64>,
        thickness: f64,
    },
}

impl Shape {
    pub fn is_valid(&self) -> bool {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        match *self {
            Shape::Sphere { radius } => pos(radius),
            Shape::Cylinder { radius, height } => pos(radius) && pos(height),
            Shape::Box { ex, ey, ez } => pos(ex) && pos(ey) && pos(ez),
            Shape::DiscDial {
                radius,
                axis,
                thickness,
            } => pos(radius) && pos(thickness) && (axis.norm() - 1.0).abs() < 1e-9,
        }
    }
}

/// Whether the object is held in place (as by an assistant) or left free.
///
/// The equilibrium solvers treat every object as pose-fixed; `Free` only
/// records intent in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fixation {
    #[default]
    Fixed,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Object {
    pub name: String,
    pub shape: Shape,
    pub pose: Isometry3<f64>,
    pub fixation: Fixation,
}

impl Object {
    pub fn new(name: impl Into<String>, shape: Shape, pose: Isometry3<f64>) -> Self {
        Object {
            name: name.into(),
            shape,
            pose,
            fixation: Fixation::Fixed,
        }
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::from(self.pose.translation.vector)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContactWorld {
    pub objects: Vec<Object>,
}

impl ContactWorld {
    pub fn new(objects: Vec<Object>) -> Self {
        ContactWorld { objects }
    }

    pub fn empty() -> Self {
        ContactWorld::default()
    }

    pub fn validate(&self) -> Result<()> {
        for o in &self.objects {
            if !o.shape.is_valid() {
                return Err(HandError::InvalidObject(o.name.clone()));
            }
        }
        Ok(())
    }
}

/// A touching (or nearly touching) link–object pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub link: LinkRef,
    /// Index into `ContactWorld::objects`.
    pub object: usize,
    /// Witness point on the object surface.
    pub point: Point3<f64>,
    /// Outward object normal.
    pub normal: Unit<Vector3<f64>>,
    /// Signed separation (negative = penetration).
    pub gap: f64,
}

/// Every capsule–object pair in the pose, with closest-approach data.
pub(crate) fn all_pairs(pose: &HandPose, world: &ContactWorld) -> Vec<(usize, usize, Proximity)> {
    let mut out = Vec::with_capacity(pose.capsules.len() * world.objects.len());
    for (ci, cap) in pose.capsules.iter().enumerate() {
        for (oi, obj) in world.objects.iter().enumerate() {
            out.push((ci, oi, proximity(cap, obj)));
        }
    }
    out
}

/// One contact per (link, object) pair whose signed distance is at most `tolerance`.
pub fn detect_contacts(
    model: &HandModel,
    posture: &Posture,
    world: &ContactWorld,
    tolerance: f64,
) -> Vec<Contact> {
    let pose = forward_kinematics(model, posture);
    all_pairs(&pose, world)
        .into_iter()
        .filter(|(_, _, p)| p.gap <= tolerance)
        .map(|(ci, oi, p)| Contact {
            link: pose.capsules[ci].link,
            object: oi,
            point: p.surface_point,
            normal: p.normal,
            gap: p.gap,
        })
        .collect()
}
