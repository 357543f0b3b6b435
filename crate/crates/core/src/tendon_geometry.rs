//! Moment arms and tendon excursions under a constant-arm (pulley) model.
//!
//! A guide that exits at distance `a` from the skeleton end point, inclined at
//! `θ` to the centerline, lengthens the centerline arm `r₀` by `a·tan θ`.
//! Arms do not depend on posture, so excursion is linear in the joint angles.

use crate::error::{HandError, Result};
use crate::hand_model::{HandModel, Posture, RoutingCrossing, Tendon};

/// Signed moment arms of one tendon, one entry per joint axis (mm, flexion positive).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentArmVector(pub Vec<f64>);

impl MomentArmVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Dot product with a per-axis angle offset.
    pub fn dot(&self, delta: &[f64]) -> f64 {
        self.0.iter().zip(delta).map(|(a, d)| a * d).sum()
    }
}

/// Composite arm `sign · (r₀ + a·tan θ)` of one crossing.
pub fn moment_arm(crossing: &RoutingCrossing) -> Result<f64> {
    let deg = crossing.guide_angle.to_degrees();
    if !(0.0..90.0).contains(&deg) {
        return Err(HandError::GuideAngleOutOfRange {
            tendon: String::new(),
            angle_deg: deg,
        });
    }
    Ok(crossing.side.sign() * (crossing.base_arm + crossing.offset * crossing.guide_angle.tan()))
}

pub fn moment_arm_vector(tendon: &Tendon, model: &HandModel) -> Result<MomentArmVector> {
    let mut arms = vec![0.0; model.dof()];
    for c in &tendon.crossings {
        let j = model
            .axis_index(c.joint, c.axis)
            .ok_or_else(|| HandError::DanglingJoint {
                tendon: tendon.name.clone(),
                joint: format!("{}[{}]", model.joint_label(c.joint), c.axis),
            })?;
        arms[j] += moment_arm(c).map_err(|e| match e {
            HandError::GuideAngleOutOfRange { angle_deg, .. } => HandError::GuideAngleOutOfRange {
                tendon: tendon.name.clone(),
                angle_deg,
            },
            other => other,
        })?;
    }
    Ok(MomentArmVector(arms))
}

/// Arms of every tendon in model order.
pub fn all_moment_arms(model: &HandModel) -> Result<Vec<MomentArmVector>> {
    model
        .tendons
        .iter()
        .map(|t| moment_arm_vector(t, model))
        .collect()
}

/// Pulled-in tendon length `Σ arm_j (θ_j − θ_rest,j)`; zero at rest.
pub fn excursion(tendon: &Tendon, posture: &Posture, model: &HandModel) -> Result<f64> {
    posture.check_dimension(model)?;
    let arms = moment_arm_vector(tendon, model)?;
    let rest = model.rest_posture();
    Ok(arms
        .0
        .iter()
        .zip(posture.angles().iter().zip(rest.angles()))
        .map(|(a, (q, r))| a * (q - r))
        .sum())
}

/// Gradient of [`excursion`] with respect to the posture; equal to the arm
/// vector because arms are posture-independent.
pub fn excursion_gradient(tendon: &Tendon, model: &HandModel) -> Result<MomentArmVector> {
    moment_arm_vector(tendon, model)
}

/// Largest excursion a tendon can reach inside the joint limits, with
/// `fixed` axes (if any) pinned at the given angles.
pub fn limit_excursion(
    arms: &MomentArmVector,
    model: &HandModel,
    fixed: &[(usize, f64)],
) -> f64 {
    model
        .axes()
        .enumerate()
        .map(|(j, a)| {
            let arm = arms.0[j];
            let q = match fixed.iter().find(|(i, _)| *i == j) {
                Some(&(_, v)) => v,
                None if arm >= 0.0 => a.limits.1,
                None => a.limits.0,
            };
            arm * (q - a.rest)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_model::{build_default_hand, FingerName, JointRef, Side};

    fn crossing(r0: f64, a: f64, deg: f64) -> RoutingCrossing {
        RoutingCrossing {
            joint: JointRef {
                finger: FingerName::Index,
                joint: 2,
            },
            axis: 0,
            base_arm: r0,
            offset: a,
            guide_angle: deg.to_radians(),
            side: Side::Flexion,
        }
    }

    #[test]
    fn composite_arm_values() {
        // 5.6 + 3·tan 30° evaluated independently.
        let expected = 5.6 + 3.0 / 3f64.sqrt();
        assert!((moment_arm(&crossing(5.6, 3.0, 30.0)).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 7.332).abs() < 5e-4);
        assert_eq!(moment_arm(&crossing(5.6, 3.0, 0.0)).unwrap(), 5.6);
        assert!((moment_arm(&crossing(5.6, 3.0, 45.0)).unwrap() - 8.6).abs() < 1e-12);
        assert!(moment_arm(&crossing(5.6, 3.0, 90.0)).is_err());
        let mut ext = crossing(5.6, 0.0, 0.0);
        ext.side = Side::Extension;
        assert_eq!(moment_arm(&ext).unwrap(), -5.6);
    }

    #[test]
    fn arm_vector_support() {
        let hand = build_default_hand();
        let flexor = &hand.tendons[hand.tendon_index("index_flexor").unwrap()];
        let v = moment_arm_vector(flexor, &hand).unwrap();
        let nz: Vec<usize> = (0..15).filter(|&j| v.0[j] != 0.0).collect();
        assert_eq!(nz, vec![3, 4, 5]);

        let add = &hand.tendons[hand.tendon_index("thumb_adductor").unwrap()];
        let v = moment_arm_vector(add, &hand).unwrap();
        let nz: Vec<usize> = (0..15).filter(|&j| v.0[j] != 0.0).collect();
        assert_eq!(nz, vec![hand.axis_by_name(FingerName::Thumb, "CM", 0).unwrap()]);
    }

    #[test]
    fn dangling_reference_errors() {
        let hand = build_default_hand();
        let mut t = hand.tendons[3].clone();
        t.crossings[0].joint.joint = 7;
        assert!(matches!(
            moment_arm_vector(&t, &hand),
            Err(HandError::DanglingJoint { .. })
        ));
    }

    #[test]
    fn excursion_zero_at_rest_and_dimension_checked() {
        let hand = build_default_hand();
        let rest = hand.rest_posture();
        for t in &hand.tendons {
            assert_eq!(excursion(t, &rest, &hand).unwrap(), 0.0);
        }
        assert!(excursion(&hand.tendons[0], &Posture(vec![0.0; 3]), &hand).is_err());
    }

    #[test]
    fn limit_excursion_matches_full_flexion() {
        let hand = build_default_hand();
        let t = &hand.tendons[hand.tendon_index("index_flexor").unwrap()];
        let arms = moment_arm_vector(t, &hand).unwrap();
        let mut q = hand.rest_posture();
        for j in 3..6 {
            q.0[j] = hand.upper_limits()[j];
        }
        let e = excursion(t, &q, &hand).unwrap();
        assert!((limit_excursion(&arms, &hand, &[]) - e).abs() < 1e-12);
    }
}
