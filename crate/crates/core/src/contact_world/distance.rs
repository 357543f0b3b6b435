//! Exact signed distances between capsules and convex primitives.
//!
//! Every supported shape is convex, so its signed distance field is convex
//! and its restriction to a segment is unimodal. Spheres use the closed-form
//! point-segment distance; the other shapes minimize the field along the
//! capsule axis with a golden-section search.

use nalgebra::{Point3, Unit, Vector3};

use super::kinematics::Capsule;
use super::{Object, Shape};

/// Closest approach of a capsule to an object.
#[derive(Debug, Clone, PartialEq)]
pub struct Proximity {
    /// Signed distance between the capsule surface and the object (negative = penetration).
    pub gap: f64,
    /// Parameter of the witness point along the capsule axis, in [0, 1].
    pub t: f64,
    /// Witness point on the capsule axis.
    pub axis_point: Point3<f64>,
    /// Closest point on the object surface.
    pub surface_point: Point3<f64>,
    /// Outward object normal at `surface_point`.
    pub normal: Unit<Vector3<f64>>,
}

/// Signed distance field of a shape in its local frame, with outward gradient.
pub fn local_sdf(shape: &Shape, p: &Vector3<f64>) -> (f64, Vector3<f64>) {
    match *shape {
        Shape::Sphere { radius } => {
            let n = p.norm();
            let g = if n > 0.0 { p / n } else { Vector3::z() };
            (n - radius, g)
        }
        Shape::Box { ex, ey, ez } => box_sdf(p, &Vector3::new(0.5 * ex, 0.5 * ey, 0.5 * ez)),
        Shape::Cylinder { radius, height } => cylinder_sdf(p, radius, 0.5 * height),
        Shape::DiscDial {
            radius,
            axis,
            thickness,
        } => {
            let rot = dial_rotation(&axis);
            let (d, g) = cylinder_sdf(&(rot * p), radius, 0.5 * thickness);
            (d, rot.inverse() * g)
        }
    }
}

/// Rotation taking the dial axis onto local +z.
pub(crate) fn dial_rotation(axis: &Vector3<f64>) -> nalgebra::UnitQuaternion<f64> {
    nalgebra::UnitQuaternion::rotation_between(axis, &Vector3::z()).unwrap_or_else(|| {
        nalgebra::UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI)
    })
}

fn box_sdf(p: &Vector3<f64>, half: &Vector3<f64>) -> (f64, Vector3<f64>) {
    let q = p.abs() - half;
    let outside = q.map(|v| v.max(0.0));
    let out_norm = outside.norm();
    if out_norm > 0.0 {
        let g = outside.component_mul(&p.map(sign)) / out_norm;
        return (out_norm, g);
    }
    let (i, m) = q.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
        if v > acc.1 {
            (i, v)
        } else {
            acc
        }
    });
    let mut g = Vector3::zeros();
    g[i] = sign(p[i]);
    (m, g)
}

fn cylinder_sdf(p: &Vector3<f64>, radius: f64, half_height: f64) -> (f64, Vector3<f64>) {
    let r = (p.x * p.x + p.y * p.y).sqrt();
    let radial = if r > 0.0 {
        Vector3::new(p.x / r, p.y / r, 0.0)
    } else {
        Vector3::x()
    };
    let axial = Vector3::new(0.0, 0.0, sign(p.z));
    let dr = r - radius;
    let dz = p.z.abs() - half_height;
    if dr > 0.0 && dz > 0.0 {
        let n = (dr * dr + dz * dz).sqrt();
        return (n, (radial * dr + axial * dz) / n);
    }
    if dr >= dz {
        (dr, radial)
    } else {
        (dz, axial)
    }
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Signed distance from a world point to an object, with outward normal.
pub fn point_sdf(object: &Object, p: &Point3<f64>) -> (f64, Vector3<f64>) {
    let local = object.pose.inverse_transform_point(p).coords;
    let (d, g) = local_sdf(&object.shape, &local);
    (d, object.pose.rotation * g)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes a unimodal function on [0, 1]; ties resolve to the middle of the
/// flat bottom so witness points do not jump between iterations.
fn minimize_unimodal(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-13 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut best = f(t);
    for edge in [0.0, 1.0] {
        let fe = f(edge);
        if fe < best {
            best = fe;
            t = edge;
        }
    }
    // Widen to the flat bottom within a small tolerance and take its midpoint.
    let tol = 1e-9;
    let left = bisect_boundary(&f, t, 0.0, best + tol);
    let right = bisect_boundary(&f, t, 1.0, best + tol);
    if right - left > 1e-9 {
        t = 0.5 * (left + right);
    }
    t
}

/// Furthest point from `inside` toward `outside` where `f ≤ level` (f convex).
fn bisect_boundary(f: &impl Fn(f64) -> f64, inside: f64, outside: f64, level: f64) -> f64 {
    if f(outside) <= level {
        return outside;
    }
    let (mut a, mut b) = (inside, outside);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if f(m) <= level {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// Closest approach between a capsule and an object.
pub fn proximity(capsule: &Capsule, object: &Object) -> Proximity {
    let t = match object.shape {
        Shape::Sphere { .. } => {
            let c = Point3::from(object.pose.translation.vector);
            let d = capsule.end - capsule.start;
            let len2 = d.norm_squared();
            if len2 > 0.0 {
                ((c - capsule.start).dot(&d) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            }
        }
        _ => minimize_unimodal(|t| point_sdf(object, &capsule.point_at(t)).0),
    };
    let axis_point = capsule.point_at(t);
    let (d, g) = point_sdf(object, &axis_point);
    let normal = Unit::new_normalize(g);
    Proximity {
        gap: d - capsule.radius,
        t,
        axis_point,
        surface_point: axis_point - normal.into_inner() * d,
        normal,
    }
}

/// Signed capsule-to-object distance in millimeters (negative when overlapping).
pub fn signed_distance(capsule: &Capsule, object: &Object) -> f64 {
    proximity(capsule, object).gap
}
