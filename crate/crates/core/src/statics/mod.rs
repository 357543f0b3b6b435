//! Quasi-static equilibrium of the spring-restored, tendon-driven hand.
//!
//! Joint springs pull each axis toward its rest angle; tendons can only pull.
//! In tension mode the posture minimizes
//!
//! ```text
//! E(θ) = Σ ½ kⱼ (θⱼ − θrestⱼ)² − Σ Tₜ · excursionₜ(θ)
//! ```
//!
//! over the joint-limit box and the non-penetration set. In excursion mode the
//! posture minimizes the spring energy alone, with each commanded tendon
//! holding the chain at least as flexed as its command
//! (`excursionₜ(θ) ≥ cₜ`); tendon tensions are the multipliers of those
//! constraints.
//!
//! Contact constraints are nonlinear in θ. They are linearized around the
//! current iterate and the resulting QP (diagonal Hessian) is solved exactly;
//! a trust region on the step with backtracking keeps linearization error in
//! check. Contacts are frictionless.

pub mod qp;

use nalgebra::Vector3;

use crate::contact_world::{all_pairs, forward_kinematics, Contact, ContactWorld};
use crate::error::{HandError, Result};
use crate::hand_model::{HandModel, Posture};
use crate::tendon_geometry::{all_moment_arms, limit_excursion, MomentArmVector};

use qp::QpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandMode {
    Tension,
    Excursion,
}

impl CommandMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandMode::Tension => "tension",
            CommandMode::Excursion => "excursion",
        }
    }
}

/// Per-tendon tensions (N) or excursions (mm), in model tendon order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuationCommand {
    pub mode: CommandMode,
    pub values: Vec<f64>,
}

impl ActuationCommand {
    pub fn tension(values: Vec<f64>) -> Self {
        ActuationCommand {
            mode: CommandMode::Tension,
            values,
        }
    }

    pub fn excursion(values: Vec<f64>) -> Self {
        ActuationCommand {
            mode: CommandMode::Excursion,
            values,
        }
    }

    pub fn zero(mode: CommandMode, tendons: usize) -> Self {
        ActuationCommand {
            mode,
            values: vec![0.0; tendons],
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ActuationCommand {
            mode: self.mode,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    fn check(&self, model: &HandModel) -> Result<()> {
        if self.values.len() != model.tendons.len() {
            return Err(HandError::CommandDimension {
                expected: model.tendons.len(),
                got: self.values.len(),
            });
        }
        if self.mode == CommandMode::Tension {
            if let Some((t, &v)) = model
                .tendons
                .iter()
                .zip(&self.values)
                .find(|(_, v)| !(**v >= 0.0))
            {
                return Err(HandError::NegativeTension {
                    tendon: t.name.clone(),
                    value: v,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub posture: Posture,
    /// Tendon tensions (N); in excursion mode, the constraint multipliers.
    pub tendon_tensions: Vec<f64>,
    /// Contacts within the reporting tolerance at the final posture.
    pub contacts: Vec<Contact>,
    /// Normal force (N) carried by each entry of `contacts`.
    pub contact_forces: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Projected KKT residual, `‖r‖∞ / (1 + |E|)`.
    pub residual: f64,
    /// Objective value at the final posture (N·mm).
    pub energy: f64,
}

impl EquilibriumResult {
    /// Deepest penetration over the reported contacts (mm, ≥ 0).
    pub fn max_penetration(&self) -> f64 {
        self.contacts
            .iter()
            .map(|c| (-c.gap).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Solver settings. Defaults follow the toolkit's documented choices.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the relative projected KKT residual.
    pub tolerance: f64,
    /// Axes pinned at a given angle (canonical index, radians).
    pub fixed: Vec<(usize, f64)>,
    /// Warm start; the rest posture when absent.
    pub start: Option<Posture>,
    /// Pairs closer than this (mm) are reported as contacts.
    pub contact_report_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 10_000,
            tolerance: 1e-8,
            fixed: Vec::new(),
            start: None,
            contact_report_tolerance: 1e-3,
        }
    }
}

/// `E(θ)` for a tension-mode command.
pub fn potential_energy(model: &HandModel, posture: &Posture, command: &ActuationCommand) -> Result<f64> {
    if command.mode != CommandMode::Tension {
        return Err(HandError::WrongMode { expected: "tension" });
    }
    command.check(model)?;
    posture.check_dimension(model)?;
    let arms = all_moment_arms(model)?;
    Ok(energy(model, &arms, posture.angles(), &command.values))
}

/// ∇E(θ) for a tension-mode command.
pub fn potential_gradient(
    model: &HandModel,
    posture: &Posture,
    command: &ActuationCommand,
) -> Result<Vec<f64>> {
    if command.mode != CommandMode::Tension {
        return Err(HandError::WrongMode { expected: "tension" });
    }
    command.check(model)?;
    posture.check_dimension(model)?;
    let arms = all_moment_arms(model)?;
    Ok(gradient(model, &arms, posture.angles(), &command.values))
}

fn energy(model: &HandModel, arms: &[MomentArmVector], q: &[f64], tensions: &[f64]) -> f64 {
    let delta: Vec<f64> = q.iter().zip(model.axes()).map(|(q, a)| q - a.rest).collect();
    let spring: f64 = delta
        .iter()
        .zip(model.axes())
        .map(|(d, a)| 0.5 * a.stiffness * d * d)
        .sum();
    let work: f64 = arms.iter().zip(tensions).map(|(m, t)| t * m.dot(&delta)).sum();
    spring - work
}

fn gradient(model: &HandModel, arms: &[MomentArmVector], q: &[f64], tensions: &[f64]) -> Vec<f64> {
    q.iter()
        .zip(model.axes())
        .enumerate()
        .map(|(j, (q, a))| {
            a.stiffness * (q - a.rest) - arms.iter().zip(tensions).map(|(m, t)| t * m.0[j]).sum::<f64>()
        })
        .collect()
}

/// Equilibrium under given tendon tensions.
pub fn equilibrium_tension(
    model: &HandModel,
    command: &ActuationCommand,
    world: Option<&ContactWorld>,
) -> Result<EquilibriumResult> {
    equilibrium_tension_with(model, command, world, &SolverOptions::default())
}

pub fn equilibrium_tension_with(
    model: &HandModel,
    command: &ActuationCommand,
    world: Option<&ContactWorld>,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    if command.mode != CommandMode::Tension {
        return Err(HandError::WrongMode { expected: "tension" });
    }
    command.check(model)?;
    let arms = all_moment_arms(model)?;
    match world.filter(|w| !w.objects.is_empty()) {
        None => Ok(free_space_tension(model, &arms, &command.values, opts)),
        Some(w) => {
            w.validate()?;
            Solver::new(model, &arms, w, opts, Some(&command.values), None).run()
        }
    }
}

/// Equilibrium with tendon excursions held at (at least) the commanded values.
pub fn equilibrium_excursion(
    model: &HandModel,
    command: &ActuationCommand,
    world: Option<&ContactWorld>,
) -> Result<EquilibriumResult> {
    equilibrium_excursion_with(model, command, world, &SolverOptions::default())
}

pub fn equilibrium_excursion_with(
    model: &HandModel,
    command: &ActuationCommand,
    world: Option<&ContactWorld>,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    if command.mode != CommandMode::Excursion {
        return Err(HandError::WrongMode { expected: "excursion" });
    }
    command.check(model)?;
    let arms = all_moment_arms(model)?;
    for ((t, m), &c) in model.tendons.iter().zip(&arms).zip(&command.values) {
        let limit = limit_excursion(m, model, &opts.fixed);
        if c >= 0.0 && c > limit + 1e-9 {
            return Err(HandError::InfeasibleExcursion {
                tendon: t.name.clone(),
                commanded: c,
                limit,
            });
        }
    }
    let empty = ContactWorld::empty();
    let w = world.unwrap_or(&empty);
    w.validate()?;
    Solver::new(model, &arms, w, opts, None, Some(&command.values)).run()
}

fn free_space_tension(
    model: &HandModel,
    arms: &[MomentArmVector],
    tensions: &[f64],
    opts: &SolverOptions,
) -> EquilibriumResult {
    let q: Vec<f64> = model
        .axes()
        .enumerate()
        .map(|(j, a)| {
            if let Some(&(_, v)) = opts.fixed.iter().find(|(i, _)| *i == j) {
                return v;
            }
            let torque: f64 = arms.iter().zip(tensions).map(|(m, t)| t * m.0[j]).sum();
            (a.rest + torque / a.stiffness).clamp(a.limits.0, a.limits.1)
        })
        .collect();
    let e = energy(model, arms, &q, tensions);
    let g = gradient(model, arms, &q, tensions);
    let residual = projected_norm(model, &q, &g, &opts.fixed) / (1.0 + e.abs());
    EquilibriumResult {
        posture: Posture(q),
        tendon_tensions: tensions.to_vec(),
        contacts: Vec::new(),
        contact_forces: Vec::new(),
        converged: true,
        iterations: 1,
        residual,
        energy: e,
    }
}

/// ‖·‖∞ of a gradient after zeroing components that push into an active bound.
fn projected_norm(model: &HandModel, q: &[f64], g: &[f64], fixed: &[(usize, f64)]) -> f64 {
    let eps = 1e-12;
    model
        .axes()
        .enumerate()
        .filter(|(j, _)| !fixed.iter().any(|(i, _)| i == j))
        .map(|(j, a)| {
            let mut r = g[j];
            if q[j] <= a.limits.0 + eps {
                r = r.min(0.0);
            }
            if q[j] >= a.limits.1 - eps {
                r = r.max(0.0);
            }
            r.abs()
        })
        .fold(0.0, f64::max)
}

const STEP_TOL: f64 = 1e-9;
const PENETRATION_TOL: f64 = 1e-7;
/// Proximal weight, relative to axis stiffness, on the first iteration.
const PROX_INIT: f64 = 0.1;
const PROX_MAX: f64 = 1e6;
/// Penetration (mm) a trial step may reach without being damped.
const PENETRATION_SLACK: f64 = 0.5;
/// Slack penalty on unreachable excursion rows, relative to the stiffest axis.
const ELASTIC_PENALTY: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Lower(usize),
    Upper(usize),
    Tendon(usize),
    /// Index into the pair list of the linearization.
    Contact(usize),
    Slack,
}

struct Linearization {
    problem: QpProblem,
    kinds: Vec<RowKind>,
    pairs: Vec<PairData>,
}

struct PairData {
    gap: f64,
    /// ∂gap/∂θ over all axes.
    grad: Vec<f64>,
    contact: Contact,
}

struct Solver<'a> {
    model: &'a HandModel,
    arms: &'a [MomentArmVector],
    world: &'a ContactWorld,
    opts: &'a SolverOptions,
    tensions: Vec<f64>,
    excursions: Option<&'a [f64]>,
    free: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rest: Vec<f64>,
    stiffness: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(
        model: &'a HandModel,
        arms: &'a [MomentArmVector],
        world: &'a ContactWorld,
        opts: &'a SolverOptions,
        tensions: Option<&[f64]>,
        excursions: Option<&'a [f64]>,
    ) -> Self {
        let n = model.dof();
        let mut lower = model.lower_limits();
        let mut upper = model.upper_limits();
        for &(i, v) in &opts.fixed {
            lower[i] = v;
            upper[i] = v;
        }
        let free = (0..n).filter(|&j| lower[j] < upper[j]).collect();
        Solver {
            model,
            arms,
            world,
            opts,
            tensions: tensions.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; model.tendons.len()]),
            excursions,
            free,
            lower,
            upper,
            rest: model.rest_posture().0,
            stiffness: model.stiffnesses(),
        }
    }

    fn objective(&self, q: &[f64]) -> f64 {
        energy(self.model, self.arms, q, &self.tensions)
    }

    fn pairs(&self, q: &[f64]) -> Vec<PairData> {
        let pose = forward_kinematics(self.model, &Posture(q.to_vec()));
        all_pairs(&pose, self.world)
            .into_iter()
            .map(|(ci, oi, p)| {
                let mut grad = vec![0.0; q.len()];
                let n: Vector3<f64> = p.normal.into_inner();
                for (j, v) in pose.point_jacobian(ci, &p.axis_point) {
                    grad[j] += n.dot(&v);
                }
                PairData {
                    gap: p.gap,
                    grad,
                    contact: Contact {
                        link: pose.capsules[ci].link,
                        object: oi,
                        point: p.surface_point,
                        normal: p.normal,
                        gap: p.gap,
                    },
                }
            })
            .collect()
    }

    /// Deepest penetration over pairs the solver can move (mm, ≥ 0).
    fn penetration(&self, q: &[f64]) -> f64 {
        self.pairs(q)
            .iter()
            .filter(|p| self.free.iter().any(|&j| p.grad[j] != 0.0))
            .map(|p| -p.gap)
            .fold(0.0, f64::max)
    }

    /// Builds the QP over the free axes around `q`. `prox` adds
    /// `½ Σ ρⱼ (θⱼ − qⱼ)²` to damp the step.
    ///
    /// With `elastic`, each excursion row gets a slack variable with a stiff
    /// quadratic penalty so that a linearization the contacts make infeasible
    /// still yields a step.
    fn linearize(&self, q: &[f64], prox: f64, elastic: bool) -> Linearization {
        let nf = self.free.len();
        let mut hess = Vec::with_capacity(nf);
        let mut linear = Vec::with_capacity(nf);
        for &j in &self.free {
            let torque: f64 = self.arms.iter().zip(&self.tensions).map(|(m, t)| t * m.0[j]).sum();
            let rho = prox * self.stiffness[j];
            hess.push(self.stiffness[j] + rho);
            linear.push(-self.stiffness[j] * self.rest[j] - torque - rho * q[j]);
        }

        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut kinds = Vec::new();
        for (fi, &j) in self.free.iter().enumerate() {
            let mut e = vec![0.0; nf];
            e[fi] = 1.0;
            rows.push(e.clone());
            rhs.push(self.lower[j]);
            kinds.push(RowKind::Lower(j));
            e[fi] = -1.0;
            rows.push(e);
            rhs.push(-self.upper[j]);
            kinds.push(RowKind::Upper(j));
        }

        // Contributions of pinned axes move to the right-hand side.
        let pinned_offset = |coeffs: &[f64]| -> f64 {
            (0..q.len())
                .filter(|j| !self.free.contains(j))
                .map(|j| coeffs[j] * self.lower[j])
                .sum()
        };

        let mut slacks = 0;
        if let Some(cmd) = self.excursions {
            for (t, (m, &c)) in self.arms.iter().zip(cmd).enumerate() {
                if c < 0.0 {
                    continue;
                }
                let rest_term: f64 = m.0.iter().zip(&self.rest).map(|(a, r)| a * r).sum();
                let mut row: Vec<f64> = self.free.iter().map(|&j| m.0[j]).collect();
                if elastic {
                    row.resize(nf + slacks, 0.0);
                    row.push(1.0);
                    slacks += 1;
                }
                rows.push(row);
                rhs.push(c + rest_term - pinned_offset(&m.0));
                kinds.push(RowKind::Tendon(t));
            }
        }
        let width = nf + slacks;
        if elastic {
            let penalty = ELASTIC_PENALTY * self.stiffness.iter().copied().fold(1.0, f64::max);
            for s in 0..slacks {
                hess.push(penalty);
                linear.push(0.0);
                let mut e = vec![0.0; width];
                e[nf + s] = 1.0;
                rows.push(e);
                rhs.push(0.0);
                kinds.push(RowKind::Slack);
            }
        }
        for row in &mut rows {
            row.resize(width, 0.0);
        }

        let pairs = self.pairs(q);
        for (pi, p) in pairs.iter().enumerate() {
            let mut row: Vec<f64> = self.free.iter().map(|&j| p.grad[j]).collect();
            // Pairs nothing can move (palm patches) carry no constraint.
            if row.iter().all(|v| *v == 0.0) {
                continue;
            }
            row.resize(width, 0.0);
            // gap + ∇gap·(θ' − θ) ≥ 0
            let lin: f64 = p.grad.iter().zip(q).map(|(g, q)| g * q).sum();
            rows.push(row);
            rhs.push(lin - p.gap - pinned_offset(&p.grad));
            kinds.push(RowKind::Contact(pi));
        }

        Linearization {
            problem: QpProblem {
                hessian_diag: hess,
                linear,
                rows,
                rhs,
            },
            kinds,
            pairs,
        }
    }

    fn expand(&self, xf: &[f64]) -> Vec<f64> {
        let mut q = self.lower.clone();
        for (fi, &j) in self.free.iter().enumerate() {
            q[j] = xf[fi];
        }
        q
    }

    fn run(&self) -> Result<EquilibriumResult> {
        let n = self.model.dof();
        let mut q: Vec<f64> = match &self.opts.start {
            Some(p) => {
                p.check_dimension(self.model)?;
                p.0.clone()
            }
            None => self.rest.clone(),
        };
        for j in 0..n {
            q[j] = q[j].clamp(self.lower[j], self.upper[j]);
        }

        let contact = !self.world.objects.is_empty();
        let mut prox = if contact { PROX_INIT } else { 0.0 };
        let mut converged = false;
        let mut iterations = 0;
        let mut pen = if contact { self.penetration(&q) } else { 0.0 };

        while iterations < self.opts.max_iterations {
            iterations += 1;
            let lin = self.linearize(&q, prox, false);
            let sol = match qp::solve(&lin.problem) {
                Ok(s) => s,
                Err(_) if self.excursions.is_some() => {
                    match qp::solve(&self.linearize(&q, prox, true).problem) {
                        Ok(s) => s,
                        Err(_) => break,
                    }
                }
                Err(_) => break,
            };
            let q_new = self.expand(&sol.x);
            let step = q_new
                .iter()
                .zip(&q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let pen_new = if contact { self.penetration(&q_new) } else { 0.0 };
            if pen_new > PENETRATION_SLACK.max(0.5 * pen) && prox < PROX_MAX {
                prox = (prox * 4.0).max(PROX_INIT);
                continue;
            }
            q = q_new;
            pen = pen_new;
            if step <= STEP_TOL && pen <= PENETRATION_TOL {
                converged = true;
                break;
            }
            prox = if prox < 1e-6 { 0.0 } else { prox / 3.0 };
        }

        self.finish(q, converged, iterations)
    }

    /// Recovers multipliers at the final posture and assembles the result.
    fn finish(&self, q: Vec<f64>, converged: bool, iterations: usize) -> Result<EquilibriumResult> {
        let lin = self.linearize(&q, 0.0, false);
        let sol = qp::solve(&lin.problem).ok();
        let mut tendon_tensions = self.tensions.clone();
        let mut contacts = Vec::new();
        let mut contact_forces = Vec::new();
        let mut grad = gradient(self.model, self.arms, &q, &self.tensions);
        let e = self.objective(&q);

        let mut forces = vec![0.0; lin.pairs.len()];
        if let Some(sol) = &sol {
            for (&kind, &mult) in lin.kinds.iter().zip(&sol.multipliers) {
                match kind {
                    RowKind::Tendon(t) => {
                        tendon_tensions[t] = mult;
                        for j in 0..q.len() {
                            grad[j] -= mult * self.arms[t].0[j];
                        }
                    }
                    RowKind::Contact(pi) => {
                        forces[pi] = mult;
                        for j in 0..q.len() {
                            grad[j] -= mult * lin.pairs[pi].grad[j];
                        }
                    }
                    _ => {}
                }
            }
        }
        for (p, &force) in lin.pairs.iter().zip(&forces) {
            if p.gap <= self.opts.contact_report_tolerance || force > 0.0 {
                contacts.push(p.contact.clone());
                contact_forces.push(force);
            }
        }
        let fixed: Vec<(usize, f64)> = (0..q.len())
            .filter(|j| !self.free.contains(j))
            .map(|j| (j, self.lower[j]))
            .collect();
        let residual = projected_norm(self.model, &q, &grad, &fixed) / (1.0 + e.abs());
        let converged = converged && sol.is_some() && residual <= self.opts.tolerance;
        Ok(EquilibriumResult {
            posture: Posture(q),
            tendon_tensions,
            contacts,
            contact_forces,
            converged,
            iterations,
            residual,
            energy: e,
        })
    }
}

/// Contact normal forces and the net pinch between opposing contacts.
#[derive(Debug, Clone, PartialEq)]
pub struct GripForces {
    pub normals: Vec<f64>,
    /// Smaller of the two opposing normal-force sums (N).
    pub pinch: f64,
}

/// Cosine below which two contact normals count as opposing (angle > 120°).
pub const OPPOSING_COS: f64 = -0.5;

pub fn grip_normal_forces(result: &EquilibriumResult) -> Result<GripForces> {
    if result.contacts.is_empty() {
        return Err(HandError::NoContacts);
    }
    let normals = result.contact_forces.clone();
    let lead = normals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &f)| if f > acc.1 { (i, f) } else { acc })
        .0;
    let reference = result.contacts[lead].normal.into_inner();
    let mut same = 0.0;
    let mut opposing = 0.0;
    for (c, &f) in result.contacts.iter().zip(&normals) {
        let cos = c.normal.into_inner().dot(&reference);
        if cos > 0.0 {
            same += f;
        } else if cos < OPPOSING_COS {
            opposing += f;
        }
    }
    Ok(GripForces {
        normals,
        pinch: same.min(opposing),
    })
}
