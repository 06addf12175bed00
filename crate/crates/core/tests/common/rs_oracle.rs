//! Brute-force Reeds-Shepp oracle.
//!
//! Every word family is written as a template of steering letters whose signed
//! lengths are affine in three free parameters. Each template is solved with
//! damped Newton iterations from a grid of starting points; the shortest
//! converged solution over all templates is the oracle length. Nothing here
//! shares code with the crate's closed-form formulas.

use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy)]
enum Len {
    P(usize, f64),
    Const(f64),
}

struct Template {
    curv: Vec<f64>,
    lens: Vec<Len>,
    straight_param: Option<usize>,
}

fn wrap(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

fn templates() -> Vec<Template> {
    let (l, s, r) = (1.0, 0.0, -1.0);
    let mut out = Vec::new();
    let mut push = |curv: Vec<f64>, lens: Vec<Len>| {
        let straight_param = curv.iter().zip(&lens).find_map(|(c, ln)| match (c, ln) {
            (c, Len::P(i, _)) if *c == 0.0 => Some(*i),
            _ => None,
        });
        out.push(Template { curv, lens, straight_param });
    };
    use Len::*;
    for a in [l, r] {
        for b in [l, r] {
            push(vec![a, s, b], vec![P(0, 1.0), P(1, 1.0), P(2, 1.0)]);
        }
        // CCC
        push(vec![a, -a, a], vec![P(0, 1.0), P(1, 1.0), P(2, 1.0)]);
        // CCCC with tied middle arcs
        for sg in [1.0, -1.0] {
            push(vec![a, -a, a, -a], vec![P(0, 1.0), P(1, 1.0), P(1, sg), P(2, 1.0)]);
        }
        for q in [FRAC_PI_2, -FRAC_PI_2] {
            for b in [l, r] {
                // CC(pi/2)SC and CSC(pi/2)C
                push(vec![a, -a, s, b], vec![P(0, 1.0), Const(q), P(1, 1.0), P(2, 1.0)]);
                push(vec![b, s, -a, a], vec![P(0, 1.0), P(1, 1.0), Const(q), P(2, 1.0)]);
            }
            push(
                vec![a, -a, s, a, -a],
                vec![P(0, 1.0), Const(q), P(1, 1.0), Const(q), P(2, 1.0)],
            );
        }
    }
    out
}

const MAX_SEGS: usize = 5;

fn seg_lengths(t: &Template, p: &[f64; 3]) -> [f64; MAX_SEGS] {
    let mut out = [0.0; MAX_SEGS];
    for (o, ln) in out.iter_mut().zip(&t.lens) {
        *o = match *ln {
            Len::P(i, s) => s * p[i],
            Len::Const(c) => c,
        };
    }
    out
}

/// Pose after each segment, starting from the origin.
fn poses(t: &Template, p: &[f64; 3]) -> [[f64; 3]; MAX_SEGS] {
    let lens = seg_lengths(t, p);
    let (mut x, mut y, mut th) = (0.0f64, 0.0f64, 0.0f64);
    let mut out = [[0.0; 3]; MAX_SEGS];
    for (k, (curv, len)) in t.curv.iter().zip(lens).enumerate() {
        if *curv == 0.0 {
            x += len * th.cos();
            y += len * th.sin();
        } else {
            let th1 = th + curv * len;
            x += (th1.sin() - th.sin()) / curv;
            y += (th.cos() - th1.cos()) / curv;
            th = th1;
        }
        out[k] = [x, y, th];
    }
    out
}

/// Residual and its Jacobian. Lengthening segment k by dl moves the pose at
/// its end along the heading and turns everything after it rigidly about
/// that point, so the end pose moves by
/// (cos th_k - curv (y_e - y_k), sin th_k + curv (x_e - x_k), curv) dl.
fn residual_and_jacobian(t: &Template, p: &[f64; 3], goal: &[f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let ps = poses(t, p);
    let e = ps[t.curv.len() - 1];
    let r = [e[0] - goal[0], e[1] - goal[1], wrap(e[2] - goal[2])];
    let mut j = [[0.0; 3]; 3];
    for (k, ln) in t.lens.iter().enumerate() {
        if let Len::P(i, s) = *ln {
            let [xk, yk, thk] = ps[k];
            let curv = t.curv[k];
            j[0][i] += s * (thk.cos() - curv * (e[1] - yk));
            j[1][i] += s * (thk.sin() + curv * (e[0] - xk));
            j[2][i] += s * curv;
        }
    }
    (r, j)
}

fn residual(t: &Template, p: &[f64; 3], goal: &[f64; 3]) -> [f64; 3] {
    let e = poses(t, p)[t.curv.len() - 1];
    [e[0] - goal[0], e[1] - goal[1], wrap(e[2] - goal[2])]
}

fn norm(r: &[f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

fn solve3(j: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    if det.abs() < 1e-14 {
        return None;
    }
    let mut out = [0.0; 3];
    for c in 0..3 {
        let mut m = *j;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        let d = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        out[c] = d / det;
    }
    Some(out)
}

fn newton(t: &Template, mut p: [f64; 3], goal: &[f64; 3]) -> Option<[f64; 3]> {
    let mut r = residual(t, &p, goal);
    for it in 0..40 {
        let rn = norm(&r);
        if rn < 1e-12 {
            break;
        }
        if it >= 8 && rn > 1e-2 {
            return None;
        }
        let (_, j) = residual_and_jacobian(t, &p, goal);
        let d = solve3(&j, &[-r[0], -r[1], -r[2]])?;
        let mut alpha = 1.0;
        loop {
            let cand = [p[0] + alpha * d[0], p[1] + alpha * d[1], p[2] + alpha * d[2]];
            let rc = residual(t, &cand, goal);
            if norm(&rc) < rn {
                p = cand;
                r = rc;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-4 {
                // no descent left: either at the rounding floor or stuck
                return (rn < 1e-9).then_some(p);
            }
        }
    }
    (norm(&r) < 1e-9).then_some(p)
}

/// Brute-force shortest length from the origin to `goal = (x, y, yaw)` at unit radius.
pub fn brute_force_length(goal: [f64; 3]) -> f64 {
    let d = goal[0].hypot(goal[1]);
    let arc_grid = [-2.4, -0.8, 0.8, 2.4];
    let lin_grid = [-(d + 2.0), -0.3 * d, 0.3 * d, d + 2.0];
    let mut best = f64::INFINITY;
    for t in templates() {
        let grid = |i: usize| -> &[f64] {
            if t.straight_param == Some(i) {
                &lin_grid
            } else {
                &arc_grid
            }
        };
        for &a in grid(0) {
            for &b in grid(1) {
                for &c in grid(2) {
                    if let Some(mut p) = newton(&t, [a, b, c], &goal) {
                        for (i, v) in p.iter_mut().enumerate() {
                            if t.straight_param != Some(i) {
                                *v = wrap(*v);
                            }
                        }
                        if norm(&residual(&t, &p, &goal)) > 1e-8 {
                            continue;
                        }
                        let len: f64 = seg_lengths(&t, &p).iter().map(|l| l.abs()).sum();
                        best = best.min(len);
                    }
                }
            }
        }
    }
    best
}
