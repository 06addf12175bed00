//! Reference solutions for small box-constrained QPs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let h = &a * a.transpose() + DMatrix::identity(n, n) * rng.gen_range(0.1..2.0);
    let g = DVector::from_fn(n, |_, _| rng.gen_range(-5.0..5.0));
    (h, g)
}

/// Exhaustive active-set search: every variable is free, at its lower bound
/// or at its upper bound; the feasible stationary candidate with the lowest
/// objective is the global optimum of the convex problem.
pub fn enumerate_optimum(h: &DMatrix<f64>, g: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    let n = g.len();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let mut u = DVector::zeros(n);
        for i in 0..n {
            u[i] = match state[i] {
                1 => lo[i],
                2 => hi[i],
                _ => 0.0,
            };
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 0).collect();
        if !free.is_empty() {
            let hff = DMatrix::from_fn(free.len(), free.len(), |a, b| h[(free[a], free[b])]);
            let rhs = DVector::from_fn(free.len(), |a, _| {
                -g[free[a]] - (0..n).filter(|j| state[*j] != 0).map(|j| h[(free[a], j)] * u[j]).sum::<f64>()
            });
            let uf = hff.cholesky().unwrap().solve(&rhs);
            for (a, &i) in free.iter().enumerate() {
                u[i] = uf[a];
            }
        }
        if (0..n).any(|i| u[i] < lo[i] - 1e-12 || u[i] > hi[i] + 1e-12) {
            continue;
        }
        let f = 0.5 * u.dot(&(h * &u)) + g.dot(&u);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, u));
        }
    }
    best.unwrap().1
}
