//! Fitting stiffness variants, absolute joint stiffness and damping to the
//! measured finger data.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::{case_settle_time, critical_damping, impact_cases};
use crate::error::{HandError, Result};
use crate::hand_model::{build_default_hand, HandModel};
use crate::tendon_geometry::all_moment_arms;

/// Whole-finger tension needed for full flexion, for one skin variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantTension {
    /// Palm-side holes present.
    pub hole: bool,
    /// Dorsal-side wrinkles present.
    pub wrinkle: bool,
    /// N.
    pub tension: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDataset {
    pub variant_tensions: Vec<VariantTension>,
    /// Required recovery time after an impact (s).
    pub settle_time_target: f64,
    /// Tendon tension at which the proposed finger is fully flexed (N).
    pub full_flexion_tension: f64,
}

impl CalibrationDataset {
    /// The four measured skin variants of the prototype finger.
    pub fn table_one() -> Self {
        let v = |hole, wrinkle, tension| VariantTension {
            hole,
            wrinkle,
            tension,
        };
        CalibrationDataset {
            variant_tensions: vec![
                v(true, true, 52.7),
                v(false, true, 63.9),
                v(true, false, 57.6),
                v(false, false, 87.8),
            ],
            settle_time_target: 1.0,
            full_flexion_tension: 52.7,
        }
    }

    /// Dataset with the given variant tensions and the default targets.
    pub fn from_variants(variant_tensions: Vec<VariantTension>) -> Self {
        CalibrationDataset {
            variant_tensions,
            ..CalibrationDataset::table_one()
        }
    }

    pub fn tension(&self, hole: bool, wrinkle: bool) -> Option<f64> {
        self.variant_tensions
            .iter()
            .find(|v| v.hole == hole && v.wrinkle == wrinkle)
            .map(|v| v.tension)
    }

    fn require(&self, hole: bool, wrinkle: bool) -> Result<f64> {
        let t = self
            .tension(hole, wrinkle)
            .ok_or(HandError::MissingVariant { hole, wrinkle })?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(HandError::NonPositiveTension(t));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Base, two main effects and an interaction term: fits four points exactly.
    Exact4,
    /// Base and two main effects, least squares in log space.
    Multiplicative3,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Exact4 => "exact4",
            ModelKind::Multiplicative3 => "multiplicative3",
        }
    }
}

/// `T(h, w) = base · f_h^[no hole] · f_w^[no wrinkle] · g^[neither]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantFactors {
    pub model_kind: ModelKind,
    pub base_tension: f64,
    pub hole_absent_factor: f64,
    pub wrinkle_absent_factor: f64,
    pub interaction_factor: f64,
    /// Root-sum-square of the log-tension residuals.
    pub residual: f64,
}

impl VariantFactors {
    pub fn predict(&self, hole: bool, wrinkle: bool) -> f64 {
        let mut t = self.base_tension;
        if !hole {
            t *= self.hole_absent_factor;
        }
        if !wrinkle {
            t *= self.wrinkle_absent_factor;
        }
        if !hole && !wrinkle {
            t *= self.interaction_factor;
        }
        t
    }
}

const VARIANTS: [(bool, bool); 4] = [(true, true), (false, true), (true, false), (false, false)];

pub fn fit_variant_factors(data: &CalibrationDataset, kind: ModelKind) -> Result<VariantFactors> {
    let t: Vec<f64> = VARIANTS
        .iter()
        .map(|&(h, w)| data.require(h, w))
        .collect::<Result<_>>()?;
    let mut f = match kind {
        ModelKind::Exact4 => {
            let (tt, ft, tf, ff) = (t[0], t[1], t[2], t[3]);
            VariantFactors {
                model_kind: kind,
                base_tension: tt,
                hole_absent_factor: ft / tt,
                wrinkle_absent_factor: tf / tt,
                interaction_factor: ff * tt / (ft * tf),
                residual: 0.0,
            }
        }
        ModelKind::Multiplicative3 => {
            // Normal equations for log T = b + x_h·[no hole] + x_w·[no wrinkle].
            let mut ata = Matrix3::zeros();
            let mut atb = Vector3::zeros();
            for (&(h, w), &ti) in VARIANTS.iter().zip(&t) {
                let row = Vector3::new(1.0, f64::from(u8::from(!h)), f64::from(u8::from(!w)));
                ata += row * row.transpose();
                atb += row * ti.ln();
            }
            let x = ata
                .lu()
                .solve(&atb)
                .expect("four binary variants give a full-rank design");
            VariantFactors {
                model_kind: kind,
                base_tension: x[0].exp(),
                hole_absent_factor: x[1].exp(),
                wrinkle_absent_factor: x[2].exp(),
                interaction_factor: 1.0,
                residual: 0.0,
            }
        }
    };
    f.residual = VARIANTS
        .iter()
        .zip(&t)
        .map(|(&(h, w), &ti)| (f.predict(h, w).ln() - ti.ln()).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(f)
}

/// Sets every tendon-driven axis so that `full_flexion_tension` on its
/// strongest tendon alone carries it from rest exactly to the limit on the
/// side that tendon pulls toward: `k = T · |arm| / |θlim − θrest|`.
///
/// Axes that no tendon crosses keep their stiffness.
pub fn calibrate_stiffness(model: &HandModel, data: &CalibrationDataset) -> Result<HandModel> {
    let tension = data.full_flexion_tension;
    if !(tension > 0.0) || !tension.is_finite() {
        return Err(HandError::NonPositiveTension(tension));
    }
    let arms = all_moment_arms(model)?;
    let ids = model.axis_ids();
    let mut out = model.clone();
    for (j, id) in ids.iter().enumerate() {
        let arm = arms
            .iter()
            .map(|m| m.0[j])
            .fold(0.0f64, |best, a| if a.abs() > best.abs() { a } else { best });
        if arm == 0.0 {
            continue;
        }
        let axis = model.axis(*id);
        let limit = if arm > 0.0 { axis.limits.1 } else { axis.limits.0 };
        let range = (limit - axis.rest).abs();
        if range <= 0.0 {
            let joint = &model.fingers[id.finger].joints[id.joint];
            return Err(HandError::ZeroRange {
                joint: format!("{}/{}", model.fingers[id.finger].name, joint.name),
                axis: id.axis,
            });
        }
        out.fingers[id.finger].joints[id.joint].axes[id.axis].stiffness = tension * arm.abs() / range;
    }
    Ok(out)
}

/// Largest number of inertia reductions tried before giving up.
const MAX_INERTIA_SHRINKS: usize = 40;
const INERTIA_SHRINK: f64 = 0.8;
/// Impact blow used for damping calibration (rad/s).
pub const CALIBRATION_IMPULSE: f64 = 10.0;

/// Critically damps every axis and checks that all six impact cases settle
/// within the target. If they do not, all inertias are reduced by a fixed
/// factor and the check repeats. Returns the updated model and the worst
/// settle time.
pub fn calibrate_damping(model: &HandModel, data: &CalibrationDataset) -> Result<(HandModel, f64)> {
    if let Some((j, _)) = model
        .axes()
        .enumerate()
        .find(|(_, a)| !(a.stiffness > 0.0) || !(a.inertia > 0.0))
    {
        return Err(HandError::DampingCalibration(format!(
            "axis {} needs positive stiffness and inertia",
            model.axis_label(model.axis_ids()[j])
        )));
    }
    let mut m = model.clone();
    for _ in 0..=MAX_INERTIA_SHRINKS {
        for a in m.axes_mut() {
            a.damping = critical_damping(a.stiffness, a.inertia);
        }
        let mut worst = 0.0f64;
        for case in impact_cases(&m, 0.5 * data.full_flexion_tension) {
            let t = match case_settle_time(&m, &case, CALIBRATION_IMPULSE) {
                Ok(t) => t,
                Err(HandError::NoSettle(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            worst = worst.max(t);
        }
        if worst <= data.settle_time_target {
            return Ok((m, worst));
        }
        for a in m.axes_mut() {
            a.inertia *= INERTIA_SHRINK;
        }
    }
    Err(HandError::DampingCalibration(format!(
        "settle time target {} s not reached after {} inertia reductions",
        data.settle_time_target, MAX_INERTIA_SHRINKS
    )))
}

/// The default hand with stiffness and damping fitted to `data`.
pub fn calibrated_hand(model: &HandModel, data: &CalibrationDataset) -> Result<HandModel> {
    let stiff = calibrate_stiffness(model, data)?;
    Ok(calibrate_damping(&stiff, data)?.0)
}

/// [`build_default_hand`] calibrated against the prototype measurements.
pub fn calibrated_default_hand() -> Result<HandModel> {
    calibrated_hand(&build_default_hand(), &CalibrationDataset::table_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact4_arithmetic() {
        let f = fit_variant_factors(&CalibrationDataset::table_one(), ModelKind::Exact4).unwrap();
        assert_eq!(f.base_tension, 52.7);
        assert!((f.hole_absent_factor - 1.2125).abs() < 1e-4);
        assert!((f.wrinkle_absent_factor - 1.0930).abs() < 1e-4);
        assert!((f.interaction_factor - 1.257).abs() < 1e-3);
        assert!(f.residual < 1e-14);
    }

    #[test]
    fn missing_variant_is_an_error() {
        let mut d = CalibrationDataset::table_one();
        d.variant_tensions.pop();
        assert!(matches!(
            fit_variant_factors(&d, ModelKind::Exact4),
            Err(HandError::MissingVariant {
                hole: false,
                wrinkle: false
            })
        ));
    }

    #[test]
    fn equal_tensions_give_unit_factors() {
        let d = CalibrationDataset::from_variants(
            VARIANTS
                .iter()
                .map(|&(hole, wrinkle)| VariantTension {
                    hole,
                    wrinkle,
                    tension: 40.0,
                })
                .collect(),
        );
        for kind in [ModelKind::Exact4, ModelKind::Multiplicative3] {
            let f = fit_variant_factors(&d, kind).unwrap();
            assert!((f.base_tension - 40.0).abs() < 1e-12);
            assert!((f.hole_absent_factor - 1.0).abs() < 1e-12);
            assert!((f.wrinkle_absent_factor - 1.0).abs() < 1e-12);
            assert!((f.interaction_factor - 1.0).abs() < 1e-12);
            assert!(f.residual < 1e-12);
        }
    }

    #[test]
    fn zero_range_rejected() {
        let mut hand = build_default_hand();
        let dip = &mut hand.fingers[1].joints[2].axes[0];
        dip.rest = dip.limits.1;
        let err = calibrate_stiffness(&hand, &CalibrationDataset::table_one()).unwrap_err();
        assert!(matches!(err, HandError::ZeroRange { .. }), "{err}");
    }
}
