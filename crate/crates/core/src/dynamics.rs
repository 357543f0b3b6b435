//! Lumped per-axis joint dynamics for impact recovery.
//!
//! Each axis is an independent damped oscillator
//! `I θ̈ = −k (θ − θrest) − c θ̇ + τ`, where `τ` is a constant tendon torque.
//! Inertia is stored in kg·mm² and torques in N·mm, so `I` is scaled by 1e−3
//! to get N·mm·s². Integration is symplectic Euler with the damping term taken
//! implicitly; joint limits are inelastic stops.

use crate::error::{HandError, Result};
use crate::hand_model::{FingerName, HandModel, JointKind, Posture};
use crate::statics::{equilibrium_tension, ActuationCommand};
use crate::tendon_geometry::all_moment_arms;

/// Largest time step accepted by [`step`].
pub const MAX_DT: f64 = 1e-3;
pub const DEFAULT_DT: f64 = 1e-4;
/// Settling band around the target posture.
pub const SETTLE_BAND_DEG: f64 = 2.0;
/// How long every axis must stay inside the band to count as settled (s).
pub const SETTLE_HOLD: f64 = 0.1;
/// Simulated time after which an unsettled response is an error (s).
pub const SETTLE_CAP: f64 = 10.0;

const KG_MM2_TO_N_MM_S2: f64 = 1e-3;

/// Effective inertia of an axis in N·mm·s².
pub fn effective_inertia(inertia_kg_mm2: f64) -> f64 {
    inertia_kg_mm2 * KG_MM2_TO_N_MM_S2
}

/// Damping (N·mm·s/rad) that makes an axis critically damped.
pub fn critical_damping(stiffness: f64, inertia_kg_mm2: f64) -> f64 {
    2.0 * (stiffness * effective_inertia(inertia_kg_mm2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicState {
    pub posture: Posture,
    /// rad/s per axis.
    pub velocities: Vec<f64>,
    pub time: f64,
}

impl DynamicState {
    pub fn at_rest(model: &HandModel) -> Self {
        DynamicState::at(model.rest_posture())
    }

    pub fn at(posture: Posture) -> Self {
        let n = posture.len();
        DynamicState {
            posture,
            velocities: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite()
            && self.posture.0.iter().all(|v| v.is_finite())
            && self.velocities.iter().all(|v| v.is_finite())
    }
}

/// Advances the unloaded hand by `dt`.
pub fn step(model: &HandModel, state: &DynamicState, dt: f64) -> Result<DynamicState> {
    step_loaded(model, state, &vec![0.0; model.dof()], dt)
}

/// Advances the hand by `dt` with a constant external torque (N·mm) per axis.
pub fn step_loaded(
    model: &HandModel,
    state: &DynamicState,
    torque: &[f64],
    dt: f64,
) -> Result<DynamicState> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(HandError::BadTimeStep(dt));
    }
    state.posture.check_dimension(model)?;
    if state.velocities.len() != model.dof() || torque.len() != model.dof() {
        return Err(HandError::DimensionMismatch {
            expected: model.dof(),
            got: state.velocities.len().min(torque.len()),
        });
    }
    if !state.is_finite() {
        return Err(HandError::NonFiniteState);
    }
    let mut q = state.posture.0.clone();
    let mut v = state.velocities.clone();
    for (j, a) in model.axes().enumerate() {
        let inertia = effective_inertia(a.inertia);
        let force = -a.stiffness * (q[j] - a.rest) + torque[j];
        v[j] = (v[j] + dt * force / inertia) / (1.0 + dt * a.damping / inertia);
        q[j] += dt * v[j];
        if q[j] < a.limits.0 {
            q[j] = a.limits.0;
            v[j] = 0.0;
        } else if q[j] > a.limits.1 {
            q[j] = a.limits.1;
            v[j] = 0.0;
        }
    }
    let next = DynamicState {
        posture: Posture(q),
        velocities: v,
        time: state.time + dt,
    };
    if !next.is_finite() {
        return Err(HandError::NonFiniteState);
    }
    Ok(next)
}

/// Sampled joint angles over time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub postures: Vec<Posture>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub trajectory: Trajectory,
    /// Time after which every axis stayed within the band of the target (s).
    pub settle_time: f64,
    pub target: Posture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseOptions {
    pub dt: f64,
    pub band: f64,
    pub hold: f64,
    pub cap: f64,
    /// Record every n-th step.
    pub sample_every: usize,
}

impl Default for ImpulseOptions {
    fn default() -> Self {
        ImpulseOptions {
            dt: DEFAULT_DT,
            band: SETTLE_BAND_DEG.to_radians(),
            hold: SETTLE_HOLD,
            cap: SETTLE_CAP,
            sample_every: 10,
        }
    }
}

/// Response of the relaxed hand to initial joint velocities (rad/s).
pub fn impulse_response(model: &HandModel, impulse: &[f64]) -> Result<ImpulseResponse> {
    impulse_response_loaded(model, impulse, None, &ImpulseOptions::default())
}

/// Response to initial joint velocities, starting from the equilibrium under
/// `tensions` (or the rest posture) and returning toward it.
pub fn impulse_response_loaded(
    model: &HandModel,
    impulse: &[f64],
    tensions: Option<&[f64]>,
    opts: &ImpulseOptions,
) -> Result<ImpulseResponse> {
    if impulse.len() != model.dof() {
        return Err(HandError::DimensionMismatch {
            expected: model.dof(),
            got: impulse.len(),
        });
    }
    let (target, torque) = match tensions {
        Some(t) => {
            let eq = equilibrium_tension(model, &ActuationCommand::tension(t.to_vec()), None)?;
            let arms = all_moment_arms(model)?;
            let torque = (0..model.dof())
                .map(|j| arms.iter().zip(t).map(|(m, t)| t * m.0[j]).sum())
                .collect::<Vec<f64>>();
            (eq.posture, torque)
        }
        None => (model.rest_posture(), vec![0.0; model.dof()]),
    };
    let mut state = DynamicState::at(target.clone());
    state.velocities = impulse.to_vec();

    let outside = |s: &DynamicState| {
        s.posture
            .0
            .iter()
            .zip(&target.0)
            .any(|(q, t)| (q - t).abs() > opts.band)
    };
    let mut trajectory = Trajectory::default();
    trajectory.times.push(0.0);
    trajectory.postures.push(state.posture.clone());
    let mut last_outside = if outside(&state) { Some(0.0) } else { None };
    let mut steps = 0usize;
    let quiet = impulse.iter().all(|v| *v == 0.0);
    while !quiet {
        state = step_loaded(model, &state, &torque, opts.dt)?;
        steps += 1;
        if steps % opts.sample_every.max(1) == 0 {
            trajectory.times.push(state.time);
            trajectory.postures.push(state.posture.clone());
        }
        if outside(&state) {
            last_outside = Some(state.time);
        }
        let since = state.time - last_outside.unwrap_or(0.0);
        if since >= opts.hold {
            break;
        }
        if state.time > opts.cap {
            return Err(HandError::NoSettle(opts.cap));
        }
    }
    // The band is entered one step after the last sample outside it.
    let settle_time = last_outside.map_or(0.0, |t| t + opts.dt);
    Ok(ImpulseResponse {
        trajectory,
        settle_time,
        target,
    })
}

/// Which side of the hand a hammer blow lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpactDirection {
    /// Blow on the palm side: flexion axes are driven toward extension.
    Palmar,
    /// Blow on the back of the fingers: flexion axes are driven toward flexion.
    Dorsal,
    /// Blow on the radial side of the thumb: both CM axes are driven.
    Lateral,
}

impl ImpactDirection {
    pub const ALL: [ImpactDirection; 3] = [
        ImpactDirection::Palmar,
        ImpactDirection::Dorsal,
        ImpactDirection::Lateral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImpactDirection::Palmar => "palmar",
            ImpactDirection::Dorsal => "dorsal",
            ImpactDirection::Lateral => "lateral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ImpactDirection::ALL.into_iter().find(|d| d.as_str() == s)
    }

    /// Initial velocities of `magnitude` rad/s on the axes this blow reaches.
    pub fn impulse(self, model: &HandModel, magnitude: f64) -> Vec<f64> {
        let mut out = vec![0.0; model.dof()];
        let mut next = 0;
        for finger in &model.fingers {
            for joint in &finger.joints {
                let lateral = finger.name == FingerName::Thumb && joint.kind == JointKind::Spherical2Dof;
                for _ in &joint.axes {
                    out[next] = match (self, lateral) {
                        (ImpactDirection::Lateral, true) => magnitude,
                        (ImpactDirection::Palmar, false) => -magnitude,
                        (ImpactDirection::Dorsal, false) => magnitude,
                        _ => 0.0,
                    };
                    next += 1;
                }
            }
        }
        out
    }
}

/// The standard test blow: 1 rad/s on every index-finger axis.
pub fn standard_impulse(model: &HandModel) -> Vec<f64> {
    model
        .axis_ids()
        .iter()
        .map(|id| {
            if model.fingers[id.finger].name == FingerName::Index {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// One impact case: a blow direction with the tendons relaxed or loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactCase {
    pub direction: ImpactDirection,
    /// Per-tendon holding tension (N); `None` for the relaxed hand.
    pub tensions: Option<Vec<f64>>,
}

impl ImpactCase {
    pub fn label(&self) -> String {
        let load = if self.tensions.is_some() { "tension" } else { "relaxed" };
        format!("{}/{}", self.direction.as_str(), load)
    }
}

/// The six documented cases: three directions, each with the tendons slack
/// and with every tendon holding `hold_tension`.
pub fn impact_cases(model: &HandModel, hold_tension: f64) -> Vec<ImpactCase> {
    let mut out = Vec::new();
    for direction in ImpactDirection::ALL {
        out.push(ImpactCase {
            direction,
            tensions: None,
        });
        out.push(ImpactCase {
            direction,
            tensions: Some(vec![hold_tension; model.tendons.len()]),
        });
    }
    out
}

/// Settle time of one case for a blow of `magnitude` rad/s.
pub fn case_settle_time(model: &HandModel, case: &ImpactCase, magnitude: f64) -> Result<f64> {
    let impulse = case.direction.impulse(model, magnitude);
    let r = impulse_response_loaded(
        model,
        &impulse,
        case.tensions.as_deref(),
        &ImpulseOptions {
            sample_every: usize::MAX,
            ..ImpulseOptions::default()
        },
    )?;
    Ok(r.settle_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_model::single_hinge_hand;

    #[test]
    fn rest_is_a_fixed_point() {
        let mut hand = single_hinge_hand(70.0, 7.0);
        hand.fingers[0].joints[0].axes[0].damping = 0.3;
        let s0 = DynamicState::at_rest(&hand);
        let s1 = step(&hand, &s0, 1e-4).unwrap();
        assert_eq!(s1.posture, s0.posture);
        assert_eq!(s1.velocities, s0.velocities);
    }

    #[test]
    fn rejects_large_or_nonpositive_steps() {
        let hand = single_hinge_hand(70.0, 7.0);
        let s = DynamicState::at_rest(&hand);
        assert!(step(&hand, &s, 2e-3).is_err());
        assert!(step(&hand, &s, 0.0).is_err());
    }

    #[test]
    fn clamps_inelastically_at_limits() {
        let hand = single_hinge_hand(70.0, 7.0);
        let mut s = DynamicState::at_rest(&hand);
        s.velocities[0] = 1e4;
        let s1 = step(&hand, &s, 1e-3).unwrap();
        assert_eq!(s1.posture.0[0], hand.upper_limits()[0]);
        assert_eq!(s1.velocities[0], 0.0);
    }

    #[test]
    fn impulse_directions_touch_expected_axes() {
        let hand = crate::hand_model::build_default_hand();
        let lat = ImpactDirection::Lateral.impulse(&hand, 1.0);
        assert_eq!(&lat[..3], &[1.0, 1.0, 0.0]);
        assert!(lat[3..].iter().all(|v| *v == 0.0));
        let palm = ImpactDirection::Palmar.impulse(&hand, 1.0);
        assert_eq!(palm[2], -1.0);
        assert!(palm[3..].iter().all(|v| *v == -1.0));
        assert_eq!(impact_cases(&hand, 10.0).len(), 6);
    }
}
