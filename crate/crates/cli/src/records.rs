//! Result files written by `handsim`.
//!
//! Every file is a JSON object with a `schema_version`, the `seed` of the run
//! and a `record` tagged by `kind`. Readers refuse any other version.

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use tendon_hand::calibration::VariantFactors;
use tendon_hand::contact_world::ContactWorld;
use tendon_hand::grasp_taxonomy::{Criterion, GraspResult, Verdict};
use tendon_hand::hand_model::HandModel;
use tendon_hand::statics::EquilibriumResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub schema_version: u32,
    pub seed: u64,
    pub record: Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Equilibrium(EquilibriumRecord),
    Grasp(GraspRecord),
    Taxonomy(TaxonomyRecord),
    Impact(ImpactRecord),
    Calibration(CalibrationRecord),
}

impl ResultFile {
    pub fn new(seed: u64, record: Record) -> Self {
        ResultFile {
            schema_version: SCHEMA_VERSION,
            seed,
            record,
        }
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("schema_version")
            .ok_or_else(|| anyhow!("field `schema_version` is missing"))?;
        match version.as_u64() {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            _ => bail!("field `schema_version`: unsupported version {version}"),
        }
        serde_json::from_value(value).context("field `record`")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisAngle {
    pub axis: String,
    pub angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TendonTension {
    pub tendon: String,
    pub tension_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactRecord {
    pub link: String,
    pub object: String,
    pub point_mm: [f64; 3],
    /// Unit normal pointing from the object toward the link.
    pub normal: [f64; 3],
    pub gap_mm: f64,
    pub force_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumRecord {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub energy_nmm: f64,
    pub posture: Vec<AxisAngle>,
    pub tendons: Vec<TendonTension>,
    pub contacts: Vec<ContactRecord>,
}

impl EquilibriumRecord {
    pub fn new(model: &HandModel, world: &ContactWorld, r: &EquilibriumResult) -> Self {
        let posture = model
            .axis_ids()
            .into_iter()
            .zip(r.posture.degrees())
            .map(|(id, angle_deg)| AxisAngle {
                axis: model.axis_label(id),
                angle_deg,
            })
            .collect();
        let tendons = model
            .tendons
            .iter()
            .zip(&r.tendon_tensions)
            .map(|(t, &tension_n)| TendonTension {
                tendon: t.name.clone(),
                tension_n,
            })
            .collect();
        let contacts = r
            .contacts
            .iter()
            .zip(&r.contact_forces)
            .map(|(c, &force_n)| ContactRecord {
                link: c.link.label(model),
                object: world
                    .objects
                    .get(c.object)
                    .map_or_else(|| c.object.to_string(), |o| o.name.clone()),
                point_mm: [c.point.x, c.point.y, c.point.z],
                normal: [c.normal.x, c.normal.y, c.normal.z],
                gap_mm: c.gap,
                force_n,
            })
            .collect();
        EquilibriumRecord {
            converged: r.converged,
            iterations: r.iterations,
            residual: r.residual,
            energy_nmm: r.energy,
            posture,
            tendons,
            contacts,
        }
    }

    pub fn max_tension(&self) -> f64 {
        self.tendons.iter().map(|t| t.tension_n).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspRecord {
    pub class_id: u8,
    pub class_name: String,
    pub family: String,
    pub verdict: Verdict,
    pub criteria: Vec<Criterion>,
    /// Largest tendon tension over the whole script (N).
    pub max_tension_n: f64,
    /// Links touching the object at the graded posture.
    pub contact_links: Vec<String>,
    pub final_state: EquilibriumRecord,
}

impl GraspRecord {
    pub fn new(model: &HandModel, world: &ContactWorld, r: &GraspResult) -> Self {
        let mut contact_links: Vec<String> = r.contacts.iter().map(|c| c.link.label(model)).collect();
        contact_links.dedup();
        GraspRecord {
            class_id: r.grasp_class.id,
            class_name: r.grasp_class.name.to_string(),
            family: r.grasp_class.family.as_str().to_string(),
            verdict: r.verdict,
            criteria: r.criteria_report.clone(),
            max_tension_n: r.max_tension,
            contact_links,
            final_state: EquilibriumRecord::new(model, world, &r.final_state),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyRecord {
    pub results: Vec<GraspRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactRecord {
    pub case: String,
    pub magnitude_rad_s: f64,
    pub settle_time_s: f64,
    pub target: Vec<AxisAngle>,
    pub times_s: Vec<f64>,
    /// One row of joint angles (degrees) per entry of `times_s`.
    pub angles_deg: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantPrediction {
    pub hole: bool,
    pub wrinkle: bool,
    pub measured_n: f64,
    pub exact4_n: f64,
    pub multiplicative3_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDynamics {
    pub axis: String,
    pub stiffness_nmm_per_rad: f64,
    pub damping: f64,
    pub inertia_kg_mm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    pub exact4: VariantFactors,
    pub multiplicative3: VariantFactors,
    pub predictions: Vec<VariantPrediction>,
    pub axes: Vec<AxisDynamics>,
    /// Slowest recovery over the impact cases used for damping (s).
    pub worst_settle_time_s: f64,
}

/// One line of the `report` summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub source: String,
    pub class: String,
    pub verdict: String,
    pub max_tension_n: Option<f64>,
    pub settle_time_s: Option<f64>,
}

impl ReportRow {
    fn blank(source: &str) -> Self {
        ReportRow {
            source: source.to_string(),
            class: String::new(),
            verdict: String::new(),
            max_tension_n: None,
            settle_time_s: None,
        }
    }

    fn grasp(source: &str, g: &GraspRecord) -> Self {
        ReportRow {
            class: format!("{} {}", g.class_id, g.class_name),
            verdict: g.verdict.as_str().to_string(),
            max_tension_n: Some(g.max_tension_n),
            ..ReportRow::blank(source)
        }
    }

    pub fn from_file(source: &str, file: &ResultFile) -> Vec<ReportRow> {
        match &file.record {
            Record::Equilibrium(e) => vec![ReportRow {
                verdict: if e.converged { "converged" } else { "not_converged" }.to_string(),
                max_tension_n: Some(e.max_tension()),
                ..ReportRow::blank(source)
            }],
            Record::Grasp(g) => vec![ReportRow::grasp(source, g)],
            Record::Taxonomy(t) => t.results.iter().map(|g| ReportRow::grasp(source, g)).collect(),
            Record::Impact(i) => vec![ReportRow {
                verdict: i.case.clone(),
                settle_time_s: Some(i.settle_time_s),
                ..ReportRow::blank(source)
            }],
            Record::Calibration(c) => vec![ReportRow {
                verdict: "calibrated".to_string(),
                settle_time_s: Some(c.worst_settle_time_s),
                ..ReportRow::blank(source)
            }],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultFile {
        ResultFile::new(
            7,
            Record::Impact(ImpactRecord {
                case: "standard/relaxed".into(),
                magnitude_rad_s: 1.0,
                settle_time_s: 0.25,
                target: vec![],
                times_s: vec![0.0],
                angles_deg: vec![vec![]],
            }),
        )
    }

    #[test]
    fn round_trip() {
        let f = sample();
        assert_eq!(ResultFile::from_json(&f.to_json().unwrap()).unwrap(), f);
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text = sample().to_json().unwrap().replace("\"schema_version\": 1", "\"schema_version\": 2");
        let err = ResultFile::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
    }

    #[test]
    fn missing_version_is_rejected() {
        assert!(ResultFile::from_json(r#"{"seed":0,"record":{"kind":"taxonomy","results":[]}}"#).is_err());
    }
}
