//! The sixteen-class grasp taxonomy as scripted, rule-checked scenarios.
//!
//! Each scenario holds an object fixed in space, drives the tendons through
//! a short excursion script and then checks contact-topology rules at the
//! final posture. Contacts are frictionless, so success means the right
//! links touch the object and at least one pair of contact normals opposes.

mod catalog;
mod dial;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contact_world::{detect_contacts, Contact, ContactWorld, LinkRef};
use crate::error::{HandError, Result};
use crate::hand_model::{FingerName, HandModel, Posture};
use crate::statics::{equilibrium_excursion_with, ActuationCommand, EquilibriumResult, SolverOptions};

pub use catalog::{class_rules, taxonomy_catalog, GRASP_CLASSES};
pub use dial::{dial_scenario, run_dial, run_dial_scenario, DialOutcome, DialScenario, DIAL_EXCURSIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraspFamily {
    Power,
    Precision,
}

impl GraspFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GraspFamily::Power => "power",
            GraspFamily::Precision => "precision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraspClass {
    pub id: u8,
    pub name: &'static str,
    pub family: GraspFamily,
}

impl GraspClass {
    pub fn by_id(id: u8) -> Option<GraspClass> {
        GRASP_CLASSES.iter().copied().find(|c| c.id == id)
    }
}

impl fmt::Display for GraspClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.id, self.name)
    }
}

/// A joint axis held at a fixed angle during a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisOverride {
    pub finger: FingerName,
    pub joint: String,
    pub axis: usize,
    /// rad.
    pub angle: f64,
}

impl AxisOverride {
    pub fn resolve(&self, model: &HandModel) -> Result<(usize, f64)> {
        let index = model
            .axis_by_name(self.finger, &self.joint, self.axis)
            .ok_or_else(|| {
                HandError::Config(format!(
                    "override names unknown axis {}/{}[{}]",
                    self.finger, self.joint, self.axis
                ))
            })?;
        Ok((index, self.angle))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspScenario {
    pub grasp_class: GraspClass,
    pub world: ContactWorld,
    /// Excursion commands applied in order, each warm-started from the last.
    pub command_script: Vec<ActuationCommand>,
    pub overrides: Vec<AxisOverride>,
}

impl GraspScenario {
    /// The same scenario with every scripted value scaled by `factor`.
    pub fn with_scaled_script(&self, factor: f64) -> GraspScenario {
        GraspScenario {
            command_script: self.command_script.iter().map(|c| c.scaled(factor)).collect(),
            ..self.clone()
        }
    }
}

/// Evenly spaced excursion commands from zero up to `last`.
pub fn ramp(last: &[f64], steps: usize) -> Vec<ActuationCommand> {
    (1..=steps)
        .map(|i| {
            let s = i as f64 / steps as f64;
            ActuationCommand::excursion(last.iter().map(|v| v * s).collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Achieved,
    Failed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Achieved => "achieved",
            Verdict::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub rule: String,
    pub passed: bool,
}

/// Contact-topology rules for one class.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassRules {
    /// Some contact on the palm or on the first link of a digit.
    pub palm_or_proximal: bool,
    pub palm: bool,
    /// Every contact lies on the last link of a digit.
    pub distal_only: bool,
    /// Some pair of contact normals is more than 120° apart.
    pub opposition: bool,
    /// Digits that must each touch the object.
    pub digits: Vec<FingerName>,
    /// Specific links that must touch the object, as (digit, link index).
    pub links: Vec<(FingerName, usize)>,
}

/// Normals more than 120° apart count as opposing.
pub const OPPOSITION_ANGLE_DEG: f64 = 120.0;
/// Gap (mm) within which a link counts as touching the object. Stands in for
/// the compliance of the skin surface.
pub const CONTACT_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct GraspResult {
    pub grasp_class: GraspClass,
    pub final_state: EquilibriumResult,
    pub contacts: Vec<Contact>,
    pub verdict: Verdict,
    pub criteria_report: Vec<Criterion>,
    /// Posture after each scripted command.
    pub trace: Vec<Posture>,
    /// Largest tendon tension seen over the script (N).
    pub max_tension: f64,
}

fn is_distal(model: &HandModel, link: &LinkRef) -> bool {
    match *link {
        LinkRef::Phalanx { finger, link } => model
            .finger(finger)
            .is_some_and(|f| link + 1 == f.links.len()),
        LinkRef::Palm { .. } => false,
    }
}

fn opposing_pair(contacts: &[&Contact]) -> bool {
    let cos = OPPOSITION_ANGLE_DEG.to_radians().cos();
    contacts.iter().enumerate().any(|(i, a)| {
        contacts[i + 1..]
            .iter()
            .any(|b| a.normal.dot(&b.normal) < cos)
    })
}

/// Applies the class rules to a contact set. `converged` feeds the solver
/// criterion shared by every class.
pub fn classify_contacts(
    model: &HandModel,
    contacts: &[Contact],
    converged: bool,
    grasp_class: GraspClass,
) -> (Verdict, Vec<Criterion>) {
    let rules = class_rules(grasp_class);
    let mut report = vec![Criterion {
        rule: "converged".into(),
        passed: converged,
    }];
    let mut check = |rule: String, passed: bool| report.push(Criterion { rule, passed });
    let all: Vec<&Contact> = contacts.iter().collect();
    if rules.palm_or_proximal {
        check(
            "palm_or_proximal_contact".into(),
            contacts.iter().any(|c| match c.link {
                LinkRef::Palm { .. } => true,
                LinkRef::Phalanx { link, .. } => link == 0,
            }),
        );
    }
    if rules.palm {
        check("palm_contact".into(), contacts.iter().any(|c| c.link.is_palm()));
    }
    if rules.distal_only {
        check(
            "distal_only".into(),
            !contacts.is_empty() && contacts.iter().all(|c| is_distal(model, &c.link)),
        );
    }
    if rules.opposition {
        check("opposing_normals".into(), opposing_pair(&all));
    }
    for d in &rules.digits {
        check(
            format!("digit:{d}"),
            contacts.iter().any(|c| c.link.finger() == Some(*d)),
        );
    }
    for &(finger, link) in &rules.links {
        let name = model
            .finger(finger)
            .and_then(|f| f.links.get(link))
            .map_or_else(|| format!("link{link}"), |l| l.name.clone());
        check(
            format!("link:{finger}/{name}"),
            contacts
                .iter()
                .any(|c| c.link == LinkRef::Phalanx { finger, link }),
        );
    }
    let verdict = if report.iter().all(|c| c.passed) {
        Verdict::Achieved
    } else {
        Verdict::Failed
    };
    (verdict, report)
}

/// Re-checks a finished result against `grasp_class`.
pub fn classify(model: &HandModel, result: &GraspResult, grasp_class: GraspClass) -> (Verdict, Vec<Criterion>) {
    classify_contacts(model, &result.contacts, result.final_state.converged, grasp_class)
}

/// Runs the scenario's script through the excursion-mode solver and grades
/// the final posture. Infeasible commands are errors; solver non-convergence
/// yields a failed verdict.
pub fn run_scenario(model: &HandModel, scenario: &GraspScenario) -> Result<GraspResult> {
    scenario.world.validate()?;
    let fixed = scenario
        .overrides
        .iter()
        .map(|o| o.resolve(model))
        .collect::<Result<Vec<_>>>()?;
    let mut opts = SolverOptions {
        fixed,
        ..SolverOptions::default()
    };
    let script: Vec<ActuationCommand> = if scenario.command_script.is_empty() {
        vec![ActuationCommand::excursion(vec![0.0; model.tendons.len()])]
    } else {
        scenario.command_script.clone()
    };
    let mut trace = Vec::with_capacity(script.len());
    let mut max_tension = 0.0f64;
    let mut last = None;
    for cmd in &script {
        let r = equilibrium_excursion_with(model, cmd, Some(&scenario.world), &opts)?;
        max_tension = r.tendon_tensions.iter().copied().fold(max_tension, f64::max);
        trace.push(r.posture.clone());
        opts.start = Some(r.posture.clone());
        last = Some(r);
    }
    let final_state = last.expect("script has at least one command");
    let contacts = detect_contacts(model, &final_state.posture, &scenario.world, CONTACT_TOLERANCE);
    let (verdict, criteria_report) =
        classify_contacts(model, &contacts, final_state.converged, scenario.grasp_class);
    Ok(GraspResult {
        grasp_class: scenario.grasp_class,
        final_state,
        contacts,
        verdict,
        criteria_report,
        trace,
        max_tension,
    })
}
