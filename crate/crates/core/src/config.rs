//! JSON hand configurations and scenario files.
//!
//! Files use degrees and millimeters; the in-memory model uses radians.
//! Unknown keys are rejected. Rotations are written as rotation vectors in
//! degrees (axis times angle).

use std::path::Path;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact_world::{ContactWorld, Fixation, Object, Shape};
use crate::error::{HandError, Result};
use crate::grasp_taxonomy::{AxisOverride, GraspClass, GraspScenario};
use crate::hand_model::{
    validate, Finger, FingerName, HandModel, Joint, JointAxis, JointKind, JointRef, Link, PalmPatch,
    PatchAttachment, RoutingCrossing, Side, Tendon,
};
use crate::statics::{ActuationCommand, CommandMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    /// mm.
    pub translation: [f64; 3],
    /// Rotation vector, degrees.
    #[serde(default)]
    pub rotation_deg: [f64; 3],
}

impl FrameFile {
    fn from_iso(iso: &Isometry3<f64>) -> Self {
        let r = iso.rotation.scaled_axis();
        FrameFile {
            translation: iso.translation.vector.into(),
            rotation_deg: [r.x.to_degrees(), r.y.to_degrees(), r.z.to_degrees()],
        }
    }

    fn to_iso(&self) -> Isometry3<f64> {
        let r = Vector3::from(self.rotation_deg).map(f64::to_radians);
        Isometry3::from_parts(
            Translation3::from(Vector3::from(self.translation)),
            UnitQuaternion::from_scaled_axis(r),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    pub name: String,
    pub length: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointFile {
    pub name: String,
    /// `hinge` or `spherical2dof`.
    pub kind: String,
    /// One entry per axis in each of the per-axis lists.
    pub rest_deg: Vec<f64>,
    /// N·mm/rad.
    pub stiffness: Vec<f64>,
    /// N·mm·s/rad.
    #[serde(default)]
    pub damping: Vec<f64>,
    pub limits_deg: Vec<[f64; 2]>,
    /// kg·mm².
    pub inertia: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerFile {
    pub name: String,
    pub base_frame: FrameFile,
    pub links: Vec<LinkFile>,
    pub joints: Vec<JointFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingFile {
    pub finger: String,
    /// Joint name within the finger, e.g. `DIP` or `CM`.
    pub joint: String,
    #[serde(default)]
    pub axis: usize,
    pub base_arm: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub angle_deg: f64,
    /// `flexion` (default) or `extension`.
    #[serde(default = "flexion")]
    pub side: String,
}

fn flexion() -> String {
    "flexion".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TendonFile {
    pub name: String,
    #[serde(default)]
    pub muscle_analog: String,
    pub crossings: Vec<CrossingFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchFile {
    pub name: String,
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub radius: f64,
    /// `palm` (default) or `thumb_metacarpal`.
    #[serde(default = "palm")]
    pub attachment: String,
}

fn palm() -> String {
    "palm".into()
}

/// On-disk hand configuration.
///
/// `palm_frame` defaults to the identity; a file without `palm_patches` has
/// no palm surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palm_frame: Option<FrameFile>,
    pub fingers: Vec<FingerFile>,
    pub tendons: Vec<TendonFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palm_patches: Option<Vec<PatchFile>>,
}

fn config_err(field: String, msg: impl std::fmt::Display) -> HandError {
    HandError::Config(format!("{field}: {msg}"))
}

fn per_axis<T: Copy>(field: String, values: &[T], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(config_err(field, format!("expected {n} entries, found {}", values.len())));
    }
    Ok(())
}

impl HandFile {
    pub fn from_model(model: &HandModel) -> Self {
        let fingers = model
            .fingers
            .iter()
            .map(|f| FingerFile {
                name: f.name.to_string(),
                base_frame: FrameFile::from_iso(&f.base_frame),
                links: f
                    .links
                    .iter()
                    .map(|l| LinkFile {
                        name: l.name.clone(),
                        length: l.length,
                        radius: l.radius,
                    })
                    .collect(),
                joints: f
                    .joints
                    .iter()
                    .map(|j| JointFile {
                        name: j.name.clone(),
                        kind: match j.kind {
                            JointKind::Hinge => "hinge".into(),
                            JointKind::Spherical2Dof => "spherical2dof".into(),
                        },
                        rest_deg: j.axes.iter().map(|a| a.rest.to_degrees()).collect(),
                        stiffness: j.axes.iter().map(|a| a.stiffness).collect(),
                        damping: j.axes.iter().map(|a| a.damping).collect(),
                        limits_deg: j
                            .axes
                            .iter()
                            .map(|a| [a.limits.0.to_degrees(), a.limits.1.to_degrees()])
                            .collect(),
                        inertia: j.axes.iter().map(|a| a.inertia).collect(),
                    })
                    .collect(),
            })
            .collect();
        let tendons = model
            .tendons
            .iter()
            .map(|t| TendonFile {
                name: t.name.clone(),
                muscle_analog: t.muscle_analog.clone(),
                crossings: t
                    .crossings
                    .iter()
                    .map(|c| CrossingFile {
                        finger: c.joint.finger.to_string(),
                        joint: model
                            .joint(c.joint)
                            .map_or_else(|| format!("#{}", c.joint.joint), |j| j.name.clone()),
                        axis: c.axis,
                        base_arm: c.base_arm,
                        offset: c.offset,
                        angle_deg: c.guide_angle.to_degrees(),
                        side: match c.side {
                            Side::Flexion => "flexion".into(),
                            Side::Extension => "extension".into(),
                        },
                    })
                    .collect(),
            })
            .collect();
        let palm_patches = model
            .palm_patches
            .iter()
            .map(|p| PatchFile {
                name: p.name.clone(),
                start: p.start.coords.into(),
                end: p.end.coords.into(),
                radius: p.radius,
                attachment: match p.attachment {
                    PatchAttachment::Palm => "palm".into(),
                    PatchAttachment::ThumbMetacarpal => "thumb_metacarpal".into(),
                },
            })
            .collect();
        HandFile {
            name: model.name.clone(),
            palm_frame: Some(FrameFile::from_iso(&model.palm_frame)),
            fingers,
            tendons,
            palm_patches: Some(palm_patches),
        }
    }

    /// Converts to a model and checks every model invariant.
    pub fn to_model(&self) -> Result<HandModel> {
        let mut fingers = Vec::with_capacity(self.fingers.len());
        for (fi, f) in self.fingers.iter().enumerate() {
            let at = |s: &str| format!("fingers[{fi}].{s}");
            let name = FingerName::parse(&f.name)
                .ok_or_else(|| config_err(at("name"), format!("unknown finger `{}`", f.name)))?;
            let mut joints = Vec::with_capacity(f.joints.len());
            for (ji, j) in f.joints.iter().enumerate() {
                let at = |s: &str| format!("fingers[{fi}].joints[{ji}].{s}");
                let kind = match j.kind.as_str() {
                    "hinge" => JointKind::Hinge,
                    "spherical2dof" => JointKind::Spherical2Dof,
                    other => return Err(config_err(at("kind"), format!("unknown joint kind `{other}`"))),
                };
                let n = kind.axis_count();
                per_axis(at("rest_deg"), &j.rest_deg, n)?;
                per_axis(at("stiffness"), &j.stiffness, n)?;
                per_axis(at("limits_deg"), &j.limits_deg, n)?;
                per_axis(at("inertia"), &j.inertia, n)?;
                if !j.damping.is_empty() {
                    per_axis(at("damping"), &j.damping, n)?;
                }
                let axes = (0..n)
                    .map(|a| JointAxis {
                        rest: j.rest_deg[a].to_radians(),
                        stiffness: j.stiffness[a],
                        damping: j.damping.get(a).copied().unwrap_or(0.0),
                        limits: (j.limits_deg[a][0].to_radians(), j.limits_deg[a][1].to_radians()),
                        inertia: j.inertia[a],
                    })
                    .collect();
                joints.push(Joint {
                    name: j.name.clone(),
                    kind,
                    axes,
                });
            }
            fingers.push(Finger {
                name,
                links: f
                    .links
                    .iter()
                    .map(|l| Link {
                        name: l.name.clone(),
                        length: l.length,
                        radius: l.radius,
                    })
                    .collect(),
                joints,
                base_frame: f.base_frame.to_iso(),
            });
        }

        let mut tendons = Vec::with_capacity(self.tendons.len());
        for (ti, t) in self.tendons.iter().enumerate() {
            let mut crossings = Vec::with_capacity(t.crossings.len());
            for (ci, c) in t.crossings.iter().enumerate() {
                let at = |s: &str| format!("tendons[{ti}].crossings[{ci}].{s}");
                let finger = FingerName::parse(&c.finger)
                    .ok_or_else(|| config_err(at("finger"), format!("unknown finger `{}`", c.finger)))?;
                let joint = fingers
                    .iter()
                    .find(|f| f.name == finger)
                    .and_then(|f| f.joints.iter().position(|j| j.name == c.joint))
                    .ok_or_else(|| HandError::DanglingJoint {
                        tendon: t.name.clone(),
                        joint: format!("{}/{}", c.finger, c.joint),
                    })?;
                let side = match c.side.as_str() {
                    "flexion" => Side::Flexion,
                    "extension" => Side::Extension,
                    other => return Err(config_err(at("side"), format!("unknown side `{other}`"))),
                };
                if !(0.0..90.0).contains(&c.angle_deg) {
                    return Err(HandError::GuideAngleOutOfRange {
                        tendon: t.name.clone(),
                        angle_deg: c.angle_deg,
                    });
                }
                crossings.push(RoutingCrossing {
                    joint: JointRef { finger, joint },
                    axis: c.axis,
                    base_arm: c.base_arm,
                    offset: c.offset,
                    guide_angle: c.angle_deg.to_radians(),
                    side,
                });
            }
            tendons.push(Tendon {
                name: t.name.clone(),
                muscle_analog: t.muscle_analog.clone(),
                crossings,
            });
        }

        let mut palm_patches = Vec::new();
        for (pi, p) in self.palm_patches.iter().flatten().enumerate() {
            let attachment = match p.attachment.as_str() {
                "palm" => PatchAttachment::Palm,
                "thumb_metacarpal" => PatchAttachment::ThumbMetacarpal,
                other => {
                    return Err(config_err(
                        format!("palm_patches[{pi}].attachment"),
                        format!("unknown attachment `{other}`"),
                    ))
                }
            };
            palm_patches.push(PalmPatch {
                name: p.name.clone(),
                start: Point3::from(p.start),
                end: Point3::from(p.end),
                radius: p.radius,
                attachment,
            });
        }

        let model = HandModel {
            name: self.name.clone(),
            fingers,
            tendons,
            palm_frame: self.palm_frame.as_ref().map_or_else(Isometry3::identity, FrameFile::to_iso),
            palm_patches,
        };
        let diags = validate(&model);
        if !diags.is_empty() {
            let list: Vec<String> = diags.iter().map(ToString::to_string).collect();
            return Err(HandError::Config(list.join("; ")));
        }
        Ok(model)
    }
}

pub fn hand_from_json(text: &str) -> Result<HandModel> {
    serde_json::from_str::<HandFile>(text)?.to_model()
}

pub fn hand_to_json(model: &HandModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&HandFile::from_model(model))?)
}

pub fn load_hand(path: &Path) -> Result<HandModel> {
    hand_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_hand(model: &HandModel, path: &Path) -> Result<()> {
    std::fs::write(path, hand_to_json(model)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeFile {
    Sphere { radius: f64 },
    Cylinder { radius: f64, height: f64 },
    Box { size: [f64; 3] },
    DiscDial { radius: f64, axis: [f64; 3], thickness: f64 },
}

impl ShapeFile {
    fn from_shape(shape: &Shape) -> Self {
        match *shape {
            Shape::Sphere { radius } => ShapeFile::Sphere { radius },
            Shape::Cylinder { radius, height } => ShapeFile::Cylinder { radius, height },
            Shape::Box { ex, ey, ez } => ShapeFile::Box { size: [ex, ey, ez] },
            Shape::DiscDial {
                radius,
                axis,
                thickness,
            } => ShapeFile::DiscDial {
                radius,
                axis: axis.into(),
                thickness,
            },
        }
    }

    fn to_shape(&self) -> Shape {
        match *self {
            ShapeFile::Sphere { radius } => Shape::Sphere { radius },
            ShapeFile::Cylinder { radius, height } => Shape::Cylinder { radius, height },
            ShapeFile::Box { size } => Shape::Box {
                ex: size[0],
                ey: size[1],
                ez: size[2],
            },
            ShapeFile::DiscDial {
                radius,
                axis,
                thickness,
            } => {
                let a = Vector3::from(axis);
                let n = a.norm();
                Shape::DiscDial {
                    radius,
                    axis: if n > 0.0 { a / n } else { a },
                    thickness,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFile {
    pub name: String,
    pub shape: ShapeFile,
    pub pose: FrameFile,
    /// `fixed` (default) or `free`.
    #[serde(default = "fixed")]
    pub fixation: String,
}

fn fixed() -> String {
    "fixed".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandFile {
    /// `tension` (N) or `excursion` (mm).
    pub mode: String,
    pub values: Vec<f64>,
}

impl CommandFile {
    pub fn from_command(c: &ActuationCommand) -> Self {
        CommandFile {
            mode: c.mode.as_str().into(),
            values: c.values.clone(),
        }
    }

    fn to_command(&self, field: String) -> Result<ActuationCommand> {
        match self.mode.as_str() {
            "tension" => Ok(ActuationCommand::tension(self.values.clone())),
            "excursion" => Ok(ActuationCommand::excursion(self.values.clone())),
            other => Err(config_err(field, format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideFile {
    pub finger: String,
    pub joint: String,
    #[serde(default)]
    pub axis: usize,
    pub angle_deg: f64,
}

/// On-disk scenario: objects plus the commands to apply.
///
/// With `class` set the script runs as a graded grasp scenario; otherwise the
/// commands run in order and the last equilibrium is the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<u8>,
    #[serde(default)]
    pub objects: Vec<ObjectFile>,
    pub script: Vec<CommandFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<OverrideFile>,
}

/// A scenario file resolved into model types.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub grasp_class: Option<GraspClass>,
    pub world: ContactWorld,
    pub script: Vec<ActuationCommand>,
    pub overrides: Vec<AxisOverride>,
}

impl Scenario {
    /// The graded form, if the file names a class.
    pub fn grasp(&self) -> Option<GraspScenario> {
        self.grasp_class.map(|grasp_class| GraspScenario {
            grasp_class,
            world: self.world.clone(),
            command_script: self.script.clone(),
            overrides: self.overrides.clone(),
        })
    }
}

impl ScenarioFile {
    pub fn from_grasp(s: &GraspScenario) -> Self {
        ScenarioFile {
            name: Some(s.grasp_class.name.to_string()),
            class: Some(s.grasp_class.id),
            objects: s
                .world
                .objects
                .iter()
                .map(|o| ObjectFile {
                    name: o.name.clone(),
                    shape: ShapeFile::from_shape(&o.shape),
                    pose: FrameFile::from_iso(&o.pose),
                    fixation: match o.fixation {
                        Fixation::Fixed => "fixed".into(),
                        Fixation::Free => "free".into(),
                    },
                })
                .collect(),
            script: s.command_script.iter().map(CommandFile::from_command).collect(),
            overrides: s
                .overrides
                .iter()
                .map(|o| OverrideFile {
                    finger: o.finger.to_string(),
                    joint: o.joint.clone(),
                    axis: o.axis,
                    angle_deg: o.angle.to_degrees(),
                })
                .collect(),
        }
    }

    pub fn resolve(&self) -> Result<Scenario> {
        let grasp_class = match self.class {
            Some(id) => Some(
                GraspClass::by_id(id).ok_or_else(|| config_err("class".into(), format!("no grasp class {id}")))?,
            ),
            None => None,
        };
        let mut objects = Vec::with_capacity(self.objects.len());
        for (i, o) in self.objects.iter().enumerate() {
            let fixation = match o.fixation.as_str() {
                "fixed" => Fixation::Fixed,
                "free" => Fixation::Free,
                other => {
                    return Err(config_err(
                        format!("objects[{i}].fixation"),
                        format!("unknown fixation `{other}`"),
                    ))
                }
            };
            let shape = o.shape.to_shape();
            if !shape.is_valid() {
                return Err(config_err(
                    format!("objects[{i}].shape"),
                    "dimensions must be positive and dial axes nonzero",
                ));
            }
            objects.push(Object {
                name: o.name.clone(),
                shape,
                pose: o.pose.to_iso(),
                fixation,
            });
        }
        if self.script.is_empty() {
            return Err(config_err("script".into(), "at least one command is required"));
        }
        let script = self
            .script
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_command(format!("script[{i}].mode")))
            .collect::<Result<Vec<_>>>()?;
        if grasp_class.is_some() && script.iter().any(|c| c.mode != CommandMode::Excursion) {
            return Err(config_err("script".into(), "graded scenarios take excursion commands only"));
        }
        let overrides = self
            .overrides
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let finger = FingerName::parse(&o.finger).ok_or_else(|| {
                    config_err(format!("overrides[{i}].finger"), format!("unknown finger `{}`", o.finger))
                })?;
                Ok(AxisOverride {
                    finger,
                    joint: o.joint.clone(),
                    axis: o.axis,
                    angle: o.angle_deg.to_radians(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario {
            name: self.name.clone(),
            grasp_class,
            world: ContactWorld::new(objects),
            script,
            overrides,
        })
    }
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    serde_json::from_str::<ScenarioFile>(text)?.resolve()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    scenario_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_model::build_default_hand;

    #[test]
    fn default_hand_round_trips() {
        let hand = build_default_hand();
        let back = hand_from_json(&hand_to_json(&hand).unwrap()).unwrap();
        assert_eq!(back.dof(), 15);
        for (a, b) in hand.axes().zip(back.axes()) {
            assert!((a.rest - b.rest).abs() < 1e-12);
            assert!((a.limits.1 - b.limits.1).abs() < 1e-12);
            assert_eq!(a.stiffness, b.stiffness);
        }
        for (f, g) in hand.fingers.iter().zip(&back.fingers) {
            let d = f.base_frame.inverse() * g.base_frame;
            assert!(d.translation.vector.norm() < 1e-9);
            assert!(d.rotation.angle() < 1e-9);
        }
        assert_eq!(hand.tendons, back.tendons);
        assert_eq!(hand.palm_patches, back.palm_patches);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&hand_to_json(&build_default_hand()).unwrap()).unwrap();
        v["fingers"][1]["joints"][0]["colour"] = "red".into();
        assert!(hand_from_json(&v.to_string()).is_err());
    }

    #[test]
    fn palm_keys_optional() {
        let mut v: serde_json::Value = serde_json::from_str(&hand_to_json(&build_default_hand()).unwrap()).unwrap();
        let obj = v.as_object_mut().unwrap();
        obj.remove("palm_frame");
        obj.remove("palm_patches");
        let hand = hand_from_json(&v.to_string()).unwrap();
        assert!(hand.palm_patches.is_empty());
        assert_eq!(hand.palm_frame, Isometry3::identity());
    }

    #[test]
    fn bad_axis_count_names_field() {
        let mut v: serde_json::Value = serde_json::from_str(&hand_to_json(&build_default_hand()).unwrap()).unwrap();
        v["fingers"][2]["joints"][1]["stiffness"] = serde_json::json!([1.0, 2.0]);
        let err = hand_from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("fingers[2].joints[1].stiffness"), "{err}");
    }

    #[test]
    fn scenario_parses() {
        let text = r#"{
            "class": 11,
            "objects": [{"name": "ball", "shape": {"type": "sphere", "radius": 20},
                         "pose": {"translation": [0, 75, 30]}}],
            "script": [{"mode": "excursion", "values": [0, 0, 0, 5, 5, 5, 5]}]
        }"#;
        let s = scenario_from_json(text).unwrap();
        assert_eq!(s.grasp_class.unwrap().id, 11);
        assert_eq!(s.world.objects[0].shape, Shape::Sphere { radius: 20.0 });
        assert!(s.grasp().is_some());
    }

    #[test]
    fn graded_scenario_needs_excursions() {
        let text = r#"{"class": 3, "script": [{"mode": "tension", "values": [0, 0, 0, 5, 5, 5, 5]}]}"#;
        assert!(scenario_from_json(text).is_err());
    }
}
