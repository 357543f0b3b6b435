//! Forward kinematics of the hand into world-space capsules.
//!
//! Each finger is a serial chain rooted at its base frame. Hinge joints rotate
//! about the local x axis, so an unrotated chain extends along local +y and
//! flexes toward local +z. The thumb CM joint applies an adduction rotation
//! about local x and then an opposition rotation about the rotated local y.

use std::fmt;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};

use crate::hand_model::{FingerName, HandModel, JointKind, PatchAttachment, Posture};

/// The body a capsule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkRef {
    Phalanx { finger: FingerName, link: usize },
    Palm { patch: usize },
}

impl LinkRef {
    pub fn finger(&self) -> Option<FingerName> {
        match self {
            LinkRef::Phalanx { finger, .. } => Some(*finger),
            LinkRef::Palm { .. } => None,
        }
    }

    pub fn is_palm(&self) -> bool {
        matches!(self, LinkRef::Palm { .. })
    }

    /// Label such as `index/distal` or `palm/B`, using names from `model`.
    pub fn label(&self, model: &HandModel) -> String {
        match *self {
            LinkRef::Phalanx { finger, link } => {
                let name = model
                    .finger(finger)
                    .and_then(|f| f.links.get(link))
                    .map(|l| l.name.as_str())
                    .unwrap_or("?");
                format!("{finger}/{name}")
            }
            LinkRef::Palm { patch } => {
                let name = model
                    .palm_patches
                    .get(patch)
                    .map(|p| p.name.as_str())
                    .unwrap_or("?");
                format!("palm/{name}")
            }
        }
    }
}

impl fmt::Display for LinkRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkRef::Phalanx { finger, link } => write!(f, "{finger}/link{link}"),
            LinkRef::Palm { patch } => write!(f, "palm/{patch}"),
        }
    }
}

/// A line segment swept by a sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Capsule {
    pub link: LinkRef,
    pub start: Point3<f64>,
    pub end: Point3<f64>,
    pub radius: f64,
}

impl Capsule {
    pub fn point_at(&self, t: f64) -> Point3<f64> {
        self.start + (self.end - self.start) * t
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> Capsule {
        Capsule {
            link: self.link,
            start: iso * self.start,
            end: iso * self.end,
            radius: self.radius,
        }
    }
}

/// A joint axis in world space, for velocity Jacobians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldAxis {
    /// Canonical axis index.
    pub index: usize,
    pub direction: Vector3<f64>,
    pub origin: Point3<f64>,
}

impl WorldAxis {
    /// Velocity of a point rigidly attached downstream of this axis per unit joint rate.
    pub fn point_velocity(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.direction.cross(&(p - self.origin))
    }
}

/// Capsules of every link and palm patch, with the upstream axes of each.
#[derive(Debug, Clone)]
pub struct HandPose {
    pub capsules: Vec<Capsule>,
    /// `chains[i]` lists the axes that move capsule `i`.
    pub chains: Vec<Vec<WorldAxis>>,
    /// Frame at the start of each finger link, indexed `[finger][link]`.
    pub link_frames: Vec<Vec<Isometry3<f64>>>,
}

impl HandPose {
    /// ∂p/∂θ for a point rigidly attached to capsule `i`, as (axis index, velocity) pairs.
    pub fn point_jacobian(&self, i: usize, p: &Point3<f64>) -> Vec<(usize, Vector3<f64>)> {
        self.chains[i]
            .iter()
            .map(|ax| (ax.index, ax.point_velocity(p)))
            .collect()
    }

    pub fn capsule_of(&self, link: LinkRef) -> Option<&Capsule> {
        self.capsules.iter().find(|c| c.link == link)
    }
}

fn rot_x(q: f64) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_axis_angle(&Vector3::x_axis(), q),
    )
}

fn rot_y(q: f64) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_axis_angle(&Vector3::y_axis(), q),
    )
}

/// Runs forward kinematics. The posture must have one angle per axis.
pub fn forward_kinematics(model: &HandModel, posture: &Posture) -> HandPose {
    let q = posture.angles();
    let mut capsules = Vec::new();
    let mut chains = Vec::new();
    let mut link_frames = Vec::with_capacity(model.fingers.len());
    let mut thumb_cm: Option<(Isometry3<f64>, Vec<WorldAxis>)> = None;
    let mut next = 0usize;

    for finger in &model.fingers {
        let mut frame = model.palm_frame * finger.base_frame;
        let mut chain: Vec<WorldAxis> = Vec::new();
        let mut frames = Vec::with_capacity(finger.links.len());
        for (ji, joint) in finger.joints.iter().enumerate() {
            let origin = Point3::from(frame.translation.vector);
            match joint.kind {
                JointKind::Hinge => {
                    chain.push(WorldAxis {
                        index: next,
                        direction: frame.rotation * Vector3::x(),
                        origin,
                    });
                    frame *= rot_x(q[next]);
                    next += 1;
                }
                JointKind::Spherical2Dof => {
                    chain.push(WorldAxis {
                        index: next,
                        direction: frame.rotation * Vector3::x(),
                        origin,
                    });
                    frame *= rot_x(q[next]);
                    chain.push(WorldAxis {
                        index: next + 1,
                        direction: frame.rotation * Vector3::y(),
                        origin,
                    });
                    frame *= rot_y(q[next + 1]);
                    next += 2;
                }
            }
            if finger.name == FingerName::Thumb && ji == 0 {
                thumb_cm = Some((frame, chain.clone()));
            }
            frames.push(frame);
            if let Some(link) = finger.links.get(ji) {
                let start = frame * Point3::origin();
                let end = frame * Point3::new(0.0, link.length, 0.0);
                capsules.push(Capsule {
                    link: LinkRef::Phalanx {
                        finger: finger.name,
                        link: ji,
                    },
                    start,
                    end,
                    radius: link.radius,
                });
                chains.push(chain.clone());
                frame *= Translation3::new(0.0, link.length, 0.0);
            }
        }
        link_frames.push(frames);
    }

    for (pi, patch) in model.palm_patches.iter().enumerate() {
        let (frame, chain) = match (patch.attachment, &thumb_cm) {
            (PatchAttachment::ThumbMetacarpal, Some((f, c))) => (*f, c.clone()),
            _ => (model.palm_frame, Vec::new()),
        };
        capsules.push(Capsule {
            link: LinkRef::Palm { patch: pi },
            start: frame * patch.start,
            end: frame * patch.end,
            radius: patch.radius,
        });
        chains.push(chain);
    }

    HandPose {
        capsules,
        chains,
        link_frames,
    }
}

/// One capsule per finger link and palm patch, in world coordinates.
pub fn link_capsules(model: &HandModel, posture: &Posture) -> Vec<Capsule> {
    forward_kinematics(model, posture).capsules
}

/// World position of a finger's tip (end of its last link).
pub fn fingertip(model: &HandModel, posture: &Posture, finger: FingerName) -> Option<Point3<f64>> {
    let n = model.finger(finger)?.links.len();
    link_capsules(model, posture)
        .into_iter()
        .find(|c| c.link == LinkRef::Phalanx { finger, link: n - 1 })
        .map(|c| c.end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_model::build_default_hand;

    #[test]
    fn extended_index_is_straight() {
        let hand = build_default_hand();
        let q = Posture(vec![0.0; hand.dof()]);
        let caps = link_capsules(&hand, &q);
        let idx: Vec<&Capsule> = caps
            .iter()
            .filter(|c| c.link.finger() == Some(FingerName::Index))
            .collect();
        assert_eq!(idx.len(), 3);
        let dir = (idx[0].end - idx[0].start).normalize();
        for c in &idx {
            let d = (c.end - c.start).normalize();
            assert!((d - dir).norm() < 1e-12);
        }
        assert!((idx[0].end - idx[1].start).norm() < 1e-12);
        assert!((idx[1].end - idx[2].start).norm() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let hand = build_default_hand();
        let q = Posture::from_degrees(&[
            20.0, 40.0, 30.0, 40.0, 50.0, 20.0, 10.0, 20.0, 30.0, 35.0, 40.0, 15.0, 60.0, 70.0, 10.0,
        ]);
        let pose = forward_kinematics(&hand, &q);
        let h = 1e-6;
        for (ci, cap) in pose.capsules.iter().enumerate() {
            let jac = pose.point_jacobian(ci, &cap.end);
            for j in 0..hand.dof() {
                let mut qp = q.clone();
                qp.0[j] += h;
                let mut qm = q.clone();
                qm.0[j] -= h;
                let fd = (forward_kinematics(&hand, &qp).capsules[ci].end
                    - forward_kinematics(&hand, &qm).capsules[ci].end)
                    / (2.0 * h);
                let an = jac
                    .iter()
                    .find(|(i, _)| *i == j)
                    .map(|(_, v)| *v)
                    .unwrap_or_else(Vector3::zeros);
                assert!((fd - an).norm() < 1e-6, "capsule {ci} axis {j}: {fd} vs {an}");
            }
        }
    }
}
