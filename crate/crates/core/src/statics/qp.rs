//! Dense dual active-set solver for small strictly convex QPs with a diagonal
//! Hessian:
//!
//! ```text
//! minimize   ½ Σ hᵢ xᵢ² + aᵀx
//! subject to rₖᵀ x ≥ bₖ
//! ```
//!
//! The method is the Goldfarb–Idnani dual algorithm. It starts from the
//! unconstrained minimum and adds violated constraints one at a time while
//! keeping the iterate dual feasible, so it terminates with the exact optimum
//! (up to rounding) or proves infeasibility. The active-set factorization is
//! recomputed from scratch at each step, which is cheap at hand-model sizes.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct QpProblem {
    pub hessian_diag: Vec<f64>,
    pub linear: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// One non-negative multiplier per constraint row.
    pub multipliers: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpError {
    Infeasible,
    IterationLimit,
}

const FEAS_TOL: f64 = 1e-12;
const DEP_TOL: f64 = 1e-10;

pub fn solve(problem: &QpProblem) -> Result<QpSolution, QpError> {
    let n = problem.hessian_diag.len();
    let m = problem.rows.len();
    let scale: Vec<f64> = problem.hessian_diag.iter().map(|h| h.sqrt()).collect();

    // Work in y = √h ⊙ x, where the Hessian is the identity.
    let rows: Vec<DVector<f64>> = problem
        .rows
        .iter()
        .map(|r| DVector::from_iterator(n, r.iter().zip(&scale).map(|(v, s)| v / s)))
        .collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.norm()).collect();
    let mut y = DVector::from_iterator(n, problem.linear.iter().zip(&scale).map(|(a, s)| -a / s));

    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let cap = 50 * (n + m) + 100;

    'outer: loop {
        let mut pick = None;
        let mut worst = -FEAS_TOL;
        for k in 0..m {
            if active.contains(&k) || norms[k] == 0.0 {
                continue;
            }
            let viol = (rows[k].dot(&y) - problem.rhs[k]) / norms[k].max(1.0);
            if viol < worst {
                worst = viol;
                pick = Some(k);
            }
        }
        // Rows with an all-zero normal are either trivially satisfied or infeasible.
        for k in 0..m {
            if norms[k] == 0.0 && problem.rhs[k] > FEAS_TOL {
                return Err(QpError::Infeasible);
            }
        }
        let Some(p) = pick else { break };
        let np = &rows[p];
        let mut up = u.clone();
        up.push(0.0);

        loop {
            iterations += 1;
            if iterations > cap {
                return Err(QpError::IterationLimit);
            }
            let (z, r) = if active.is_empty() {
                (np.clone(), DVector::zeros(0))
            } else {
                let cols: Vec<DVector<f64>> = active.iter().map(|&k| rows[k].clone()).collect();
                let nmat = DMatrix::from_columns(&cols);
                let qr = nmat.qr();
                let q1 = qr.q();
                let rmat = qr.r();
                let w = q1.transpose() * np;
                let z = np - &q1 * &w;
                let r = rmat
                    .solve_upper_triangular(&w)
                    .unwrap_or_else(|| DVector::zeros(w.len()));
                (z, r)
            };

            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (i, &ri) in r.iter().enumerate() {
                if ri > 1e-14 {
                    let ratio = up[i] / ri;
                    if ratio < t1 {
                        t1 = ratio;
                        drop = Some(i);
                    }
                }
            }
            let zz = z.norm_squared();
            let sp = np.dot(&y) - problem.rhs[p];
            let t2 = if zz.sqrt() > DEP_TOL * norms[p] {
                -sp / zz
            } else {
                f64::INFINITY
            };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(QpError::Infeasible);
            }
            let last = up.len() - 1;
            for i in 0..r.len() {
                up[i] -= t * r[i];
            }
            up[last] += t;

            if t2.is_finite() {
                y += &z * t;
                if t2 <= t1 {
                    active.push(p);
                    u = up;
                    continue 'outer;
                }
            }
            let d = drop.expect("partial step has a blocking constraint");
            active.remove(d);
            up.remove(d);
        }
    }

    let x: Vec<f64> = y.iter().zip(&scale).map(|(v, s)| v / s).collect();
    let mut multipliers = vec![0.0; m];
    for (i, &k) in active.iter().enumerate() {
        multipliers[k] = u[i].max(0.0);
    }
    Ok(QpSolution {
        x,
        multipliers,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_2d(p: &QpProblem) -> (f64, f64) {
        // Dense grid search on [-3, 3]² as an independent check.
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let steps = 1200;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = -3.0 + 6.0 * i as f64 / steps as f64;
                let y = -3.0 + 6.0 * j as f64 / steps as f64;
                let ok = p
                    .rows
                    .iter()
                    .zip(&p.rhs)
                    .all(|(r, b)| r[0] * x + r[1] * y >= b - 1e-12);
                if !ok {
                    continue;
                }
                let f = 0.5 * (p.hessian_diag[0] * x * x + p.hessian_diag[1] * y * y)
                    + p.linear[0] * x
                    + p.linear[1] * y;
                if f < best.0 {
                    best = (f, x, y);
                }
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn unconstrained_minimum() {
        let p = QpProblem {
            hessian_diag: vec![2.0, 4.0],
            linear: vec![-2.0, 4.0],
            rows: vec![],
            rhs: vec![],
        };
        let s = solve(&p).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_grid_search() {
        let p = QpProblem {
            hessian_diag: vec![1.0, 3.0],
            linear: vec![-2.0, -3.0],
            rows: vec![vec![-1.0, -1.0], vec![1.0, -2.0], vec![0.0, 1.0]],
            rhs: vec![-1.0, -2.0, 0.2],
        };
        let s = solve(&p).unwrap();
        let (bx, by) = brute_force_2d(&p);
        assert!((s.x[0] - bx).abs() < 6e-3 && (s.x[1] - by).abs() < 6e-3, "{:?} vs {bx},{by}", s.x);
        // KKT: stationarity with the reported multipliers.
        for i in 0..2 {
            let g = p.hessian_diag[i] * s.x[i] + p.linear[i];
            let jt: f64 = p.rows.iter().zip(&s.multipliers).map(|(r, l)| r[i] * l).sum();
            assert!((g - jt).abs() < 1e-10);
        }
    }

    #[test]
    fn detects_infeasibility() {
        let p = QpProblem {
            hessian_diag: vec![1.0],
            linear: vec![0.0],
            rows: vec![vec![1.0], vec![-1.0]],
            rhs: vec![1.0, 0.0],
        };
        assert_eq!(solve(&p).unwrap_err(), QpError::Infeasible);
    }

    #[test]
    fn equal_bounds_pin_variable() {
        let p = QpProblem {
            hessian_diag: vec![1.0, 1.0],
            linear: vec![0.0, 0.0],
            rows: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![1.0, 1.0]],
            rhs: vec![0.5, -0.5, 2.0],
        };
        let s = solve(&p).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-12);
        assert!((s.x[1] - 1.5).abs() < 1e-12);
    }
}
