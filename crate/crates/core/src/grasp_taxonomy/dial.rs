//! Turning a dial held between the thumb and the index finger.
//!
//! The dial is a fixed disc. Each substep re-solves the excursion-mode
//! equilibrium with the digits sliding on the rim; with no slip between skin
//! and rim, the dial turns by the mean angular travel of the two contact
//! points about its axis.

use nalgebra::{Point3, Unit, Vector3};

use crate::contact_world::{detect_contacts, ContactWorld, Object, Shape};
use crate::error::{HandError, Result};
use crate::hand_model::{FingerName, HandModel, Posture};
use crate::statics::{equilibrium_excursion_with, ActuationCommand, SolverOptions};

/// Thumb adduction, thumb opposition and index flexion increments (mm).
pub const DIAL_EXCURSIONS: [f64; 3] = [9.0, 9.0, 4.0];

const DIAL_TENDONS: [&str; 3] = ["thumb_adductor", "thumb_opponens", "index_flexor"];
const MIN_SUBSTEPS: usize = 10;
/// Gap (mm) within which a digit still counts as touching the rim.
const RIM_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct DialScenario {
    /// Holds the dial as its only object.
    pub world: ContactWorld,
    /// Excursions that close the thumb and index onto the rim.
    pub hold: ActuationCommand,
    pub substeps: usize,
}

impl DialScenario {
    fn dial(&self) -> Result<(&Object, Vector3<f64>)> {
        let obj = self
            .world
            .objects
            .first()
            .ok_or_else(|| HandError::Dial("scenario has no dial object".into()))?;
        match obj.shape {
            Shape::DiscDial { axis, .. } => Ok((obj, obj.pose.rotation * axis)),
            _ => Err(HandError::Dial(format!("object `{}` is not a disc dial", obj.name))),
        }
    }

    /// The same scene with the dial axis reversed, which flips the sense of
    /// positive rotation.
    pub fn mirrored(&self) -> DialScenario {
        let mut out = self.clone();
        if let Some(obj) = out.world.objects.first_mut() {
            if let Shape::DiscDial { axis, .. } = &mut obj.shape {
                *axis = -*axis;
            }
        }
        out
    }
}

/// The shipped dial scene for the default hand.
pub fn dial_scenario(model: &HandModel) -> Result<DialScenario> {
    // Axis points from the dial face back toward the hand.
    let dial = Object::new(
        "dial",
        Shape::DiscDial {
            radius: 20.19,
            axis: Vector3::new(-0.0186, 0.3655, -0.9306).normalize(),
            thickness: 7.84,
        },
        nalgebra::Isometry3::translation(48.73, 89.64, 26.09),
    );
    let mut hold = vec![0.0; model.tendons.len()];
    for (name, v) in [
        ("thumb_opponens", 5.53),
        ("thumb_flexor", 5.51),
        ("index_flexor", 10.6),
    ] {
        let i = model
            .tendon_index(name)
            .ok_or_else(|| HandError::Dial(format!("hand has no tendon `{name}`")))?;
        hold[i] = v;
    }
    Ok(DialScenario {
        world: ContactWorld::new(vec![dial]),
        hold: ActuationCommand::excursion(hold),
        substeps: 20,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialOutcome {
    /// Signed dial rotation (degrees), positive counterclockwise when the
    /// axis points at the viewer.
    pub rotation_deg: f64,
    /// A digit lost the rim before the script finished.
    pub slip: bool,
    /// Cumulative rotation after each completed substep.
    pub trace: Vec<f64>,
    pub postures: Vec<Posture>,
}

/// Runs the shipped dial scene with the given increments on thumb
/// adduction, thumb opposition and index flexion.
pub fn run_dial(model: &HandModel, excursions: &[f64; 3]) -> Result<DialOutcome> {
    run_dial_scenario(model, &dial_scenario(model)?, excursions)
}

pub fn run_dial_scenario(
    model: &HandModel,
    scenario: &DialScenario,
    excursions: &[f64; 3],
) -> Result<DialOutcome> {
    let (dial, axis) = scenario.dial()?;
    let axis = Unit::new_normalize(axis);
    let center = dial.center();
    let tendons = DIAL_TENDONS
        .iter()
        .map(|n| {
            model
                .tendon_index(n)
                .ok_or_else(|| HandError::Dial(format!("hand has no tendon `{n}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let substeps = scenario.substeps.max(MIN_SUBSTEPS);

    let mut opts = SolverOptions::default();
    let held = equilibrium_excursion_with(model, &scenario.hold, Some(&scenario.world), &opts)?;
    let mut angles = rim_angles(model, &held.posture, &scenario.world, &center, &axis)
        .ok_or_else(|| HandError::Dial("hold command does not pinch the dial".into()))?;
    opts.start = Some(held.posture);

    let mut rotation = 0.0;
    let mut trace = Vec::with_capacity(substeps);
    let mut postures = Vec::with_capacity(substeps);
    let mut slip = false;
    for s in 1..=substeps {
        let frac = s as f64 / substeps as f64;
        let mut values = scenario.hold.values.clone();
        for (&t, &e) in tendons.iter().zip(excursions) {
            values[t] += frac * e;
        }
        let r = equilibrium_excursion_with(
            model,
            &ActuationCommand::excursion(values),
            Some(&scenario.world),
            &opts,
        )?;
        let Some(next) = rim_angles(model, &r.posture, &scenario.world, &center, &axis) else {
            slip = true;
            break;
        };
        rotation += 0.5 * (wrap(next[0] - angles[0]) + wrap(next[1] - angles[1]));
        angles = next;
        trace.push(rotation.to_degrees());
        opts.start = Some(r.posture.clone());
        postures.push(r.posture);
    }
    Ok(DialOutcome {
        rotation_deg: rotation.to_degrees(),
        slip,
        trace,
        postures,
    })
}

fn wrap(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    (a + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI
}

/// Angles of the thumb and index rim contacts about the dial axis, or `None`
/// if either digit is off the rim.
fn rim_angles(
    model: &HandModel,
    posture: &Posture,
    world: &ContactWorld,
    center: &Point3<f64>,
    axis: &Unit<Vector3<f64>>,
) -> Option<[f64; 2]> {
    let contacts = detect_contacts(model, posture, world, RIM_TOLERANCE);
    let u = axis.cross(&Vector3::x());
    let u = if u.norm() < 1e-6 { axis.cross(&Vector3::y()) } else { u }.normalize();
    let v = axis.cross(&u);
    let angle_of = |finger: FingerName| {
        contacts
            .iter()
            .filter(|c| c.link.finger() == Some(finger))
            .min_by(|a, b| a.gap.total_cmp(&b.gap))
            .map(|c| {
                let r = c.point - center;
                r.dot(&v).atan2(r.dot(&u))
            })
    };
    Some([angle_of(FingerName::Thumb)?, angle_of(FingerName::Index)?])
}
