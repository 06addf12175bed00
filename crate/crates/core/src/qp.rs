//! Box-constrained convex QP: `min 1/2 u'Hu + g'u  s.t.  lower <= u <= upper`.
//!
//! Projected Newton iterations on the free variables with an Armijo search
//! along the projection arc; a projected-gradient step is taken whenever the
//! Newton direction makes no progress.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub const KKT_TOL: f64 = 1e-8;
pub const MAX_ITERS: usize = 500;

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub u: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub fn objective(h: &DMatrix<f64>, g: &DVector<f64>, u: &DVector<f64>) -> f64 {
    0.5 * u.dot(&(h * u)) + g.dot(u)
}

fn project(u: &mut DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) {
    for i in 0..u.len() {
        u[i] = u[i].clamp(lower[i], upper[i]);
    }
}

/// Infinity norm of `u - P(u - grad)`, zero exactly at a KKT point.
pub fn kkt_residual(u: &DVector<f64>, grad: &DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> f64 {
    (0..u.len())
        .map(|i| (u[i] - (u[i] - grad[i]).clamp(lower[i], upper[i])).abs())
        .fold(0.0, f64::max)
}

pub fn solve_box_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Result<DVector<f64>> {
    solve_box_qp_detailed(h, g, lower, upper).map(|s| s.u)
}

pub fn solve_box_qp_detailed(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Result<QpSolution> {
    let n = g.len();
    debug_assert!(h.nrows() == n && h.ncols() == n);
    debug_assert!((0..n).all(|i| lower[i] <= upper[i]));
    // Gershgorin bound on the largest eigenvalue for the gradient fallback.
    let lipschitz = (0..n)
        .map(|i| (0..n).map(|j| h[(i, j)].abs()).sum::<f64>())
        .fold(f64::MIN_POSITIVE, f64::max);

    let mut u = DVector::zeros(n);
    project(&mut u, lower, upper);
    let mut f = objective(h, g, &u);
    let mut residual = f64::INFINITY;
    for it in 0..MAX_ITERS {
        let grad = h * &u + g;
        residual = kkt_residual(&u, &grad, lower, upper);
        if residual <= KKT_TOL {
            return Ok(QpSolution {
                u,
                iterations: it,
                residual,
            });
        }

        // Variables pinned at a bound by the gradient stay fixed this iteration.
        let free: Vec<usize> = (0..n)
            .filter(|&i| {
                let at_lo = u[i] <= lower[i] && grad[i] > 0.0;
                let at_hi = u[i] >= upper[i] && grad[i] < 0.0;
                !(at_lo || at_hi)
            })
            .collect();
        let mut dir = DVector::zeros(n);
        if !free.is_empty() {
            let hff = DMatrix::from_fn(free.len(), free.len(), |a, b| h[(free[a], free[b])]);
            let gf = DVector::from_fn(free.len(), |a, _| -grad[free[a]]);
            if let Some(chol) = hff.cholesky() {
                let d = chol.solve(&gf);
                for (a, &i) in free.iter().enumerate() {
                    dir[i] = d[a];
                }
            }
        }

        let mut accepted = false;
        let mut alpha = 1.0;
        while alpha > 1e-12 {
            let mut cand = &u + &dir * alpha;
            project(&mut cand, lower, upper);
            let fc = objective(h, g, &cand);
            let decrease = grad.dot(&(&cand - &u));
            if fc <= f + 1e-4 * decrease && fc <= f {
                accepted = fc < f || (&cand - &u).amax() > 0.0;
                u = cand;
                f = fc;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            let mut cand = &u - &grad / lipschitz;
            project(&mut cand, lower, upper);
            let fc = objective(h, g, &cand);
            if fc <= f {
                u = cand;
                f = fc;
            }
        }
    }
    let grad = h * &u + g;
    residual = residual.min(kkt_residual(&u, &grad, lower, upper));
    if residual <= KKT_TOL {
        return Ok(QpSolution {
            u,
            iterations: MAX_ITERS,
            residual,
        });
    }
    Err(Error::QpNotConverged { residual })
}
