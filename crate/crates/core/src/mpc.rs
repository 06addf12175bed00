//! Reference construction and linear-time-varying MPC tracking.

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Pose2D};
use crate::planner::PlannedPath;
use crate::qp::solve_box_qp_detailed;
use crate::reeds_shepp::Direction;
use crate::vehicle::{Gear, VehicleParams, VehicleState};
use nalgebra::{DMatrix, DVector, Matrix4, Matrix4x2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcParams {
    /// Prediction horizon in steps.
    pub horizon: usize,
    pub dt: f64,
    /// State weights on (x, y, yaw, v).
    pub q: [f64; 4],
    /// Input weights on (accel, steer).
    pub r: [f64; 2],
    /// Steering-rate weight.
    pub rd: f64,
    pub accel_min: f64,
    pub accel_max: f64,
    pub steer_max: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Successive linearization passes.
    pub lin_iters: usize,
}

impl Default for MpcParams {
    fn default() -> Self {
        Self {
            horizon: 15,
            dt: 0.1,
            q: [1.0, 1.0, 0.5, 0.5],
            r: [0.1, 0.1],
            rd: 0.5,
            accel_min: -3.0,
            accel_max: 2.0,
            steer_max: 0.6,
            speed_min: -2.0,
            speed_max: 3.0,
            lin_iters: 2,
        }
    }
}

impl MpcParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.horizon < 2 {
            return Err("mpc.horizon must be at least 2".into());
        }
        if !(self.dt > 0.0) {
            return Err("mpc.dt must be positive".into());
        }
        if self.q.iter().chain(self.r.iter()).any(|w| *w < 0.0) || self.rd < 0.0 {
            return Err("mpc weights must be non-negative".into());
        }
        if !self.q.iter().any(|w| *w > 0.0) {
            return Err("mpc.q needs at least one positive weight".into());
        }
        if !(self.accel_min < 0.0 && self.accel_max > 0.0) {
            return Err("mpc accel bounds must straddle zero".into());
        }
        if !(self.steer_max > 0.0 && self.speed_min < 0.0 && self.speed_max > 0.0) {
            return Err("mpc steer/speed bounds are invalid".into());
        }
        if self.lin_iters == 0 {
            return Err("mpc.lin_iters must be positive".into());
        }
        Ok(())
    }
}

/// Trapezoidal speed-profile limits used when timing a planned path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedProfile {
    pub v_fwd_max: f64,
    pub v_rev_max: f64,
    pub accel: f64,
}

impl Default for SpeedProfile {
    fn default() -> Self {
        Self {
            v_fwd_max: 1.5,
            v_rev_max: 1.0,
            accel: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefSample {
    pub pose: Pose2D,
    /// Signed speed.
    pub v: f64,
    /// Feedforward steering angle of the path piece under this sample.
    pub steer: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefTrajectory {
    pub dt: f64,
    pub samples: Vec<RefSample>,
    /// Index of the first sample of every segment after the first.
    pub segment_boundaries: Vec<usize>,
}

impl RefTrajectory {
    /// Half-open sample range of the segment containing `index`.
    pub fn segment_range(&self, index: usize) -> (usize, usize) {
        let start = self
            .segment_boundaries
            .iter()
            .rev()
            .find(|&&b| b <= index)
            .copied()
            .unwrap_or(0);
        let end = self
            .segment_boundaries
            .iter()
            .find(|&&b| b > index)
            .copied()
            .unwrap_or(self.samples.len());
        (start, end)
    }

    pub fn duration(&self) -> f64 {
        self.samples.len().saturating_sub(1) as f64 * self.dt
    }
}

/// Timing of a trapezoidal (or triangular) profile over `length`.
#[derive(Debug, Clone, Copy)]
pub struct Trapezoid {
    pub length: f64,
    pub peak: f64,
    pub accel: f64,
}

impl Trapezoid {
    pub fn new(length: f64, v_max: f64, accel: f64) -> Self {
        let peak = if length >= v_max * v_max / accel {
            v_max
        } else {
            (accel * length).sqrt()
        };
        Self { length, peak, accel }
    }

    pub fn duration(&self) -> f64 {
        if self.peak <= 0.0 {
            return 0.0;
        }
        self.length / self.peak + self.peak / self.accel
    }

    /// (distance, speed) at time `t`, clamped to the end of the profile.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let total = self.duration();
        if t >= total {
            return (self.length, 0.0);
        }
        let t_ramp = self.peak / self.accel;
        let d_ramp = 0.5 * self.peak * t_ramp;
        if t < t_ramp {
            (0.5 * self.accel * t * t, self.accel * t)
        } else if t <= total - t_ramp {
            (d_ramp + self.peak * (t - t_ramp), self.peak)
        } else {
            let tr = total - t;
            (self.length - 0.5 * self.accel * tr * tr, self.accel * tr)
        }
    }
}

/// Pose at arc length `s` plus the index of the piece `[i, i + 1]` it lies on.
fn interpolate(points: &[Pose2D], cum: &[f64], s: f64) -> (Pose2D, usize) {
    let last_piece = points.len().saturating_sub(2);
    let i = match cum.binary_search_by(|c| c.total_cmp(&s)) {
        Ok(i) => return (points[i], i.min(last_piece)),
        Err(i) => i,
    };
    if i == 0 {
        return (points[0], 0);
    }
    if i >= points.len() {
        return (*points.last().unwrap(), last_piece);
    }
    let (a, b) = (points[i - 1], points[i]);
    let span = cum[i] - cum[i - 1];
    let w = if span > 0.0 { (s - cum[i - 1]) / span } else { 0.0 };
    let pose = Pose2D::new(
        a.x + w * (b.x - a.x),
        a.y + w * (b.y - a.y),
        a.yaw + w * normalize_angle(b.yaw - a.yaw),
    );
    (pose, i - 1)
}

/// Times a planned path with one trapezoidal profile per direction segment.
pub fn build_reference(
    path: &PlannedPath,
    vehicle: &VehicleParams,
    params: &MpcParams,
    profile: &SpeedProfile,
) -> RefTrajectory {
    assert!(!path.points.is_empty(), "reference needs a non-empty path");
    let mut cuts: Vec<usize> = vec![0];
    cuts.extend(path.switch_indices.iter().map(|&i| i - 1));
    cuts.push(path.points.len() - 1);
    cuts.dedup();
    if cuts.len() == 1 {
        cuts.push(0);
    }

    let mut samples = Vec::new();
    let mut boundaries = Vec::new();
    for (k, w) in cuts.windows(2).enumerate() {
        let (from, to) = (w[0], w[1]);
        let direction = path.points[(from + 1).min(to)].direction;
        let poses: Vec<Pose2D> = path.points[from..=to].iter().map(|p| p.pose).collect();
        let mut cum = vec![0.0];
        for pw in poses.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + pw[0].dist(&pw[1]));
        }
        let length = *cum.last().unwrap();
        let steers: Vec<f64> = poses
            .windows(2)
            .zip(cum.windows(2))
            .map(|(p, c)| {
                let ds = direction.sign() * (c[1] - c[0]);
                if ds == 0.0 {
                    return 0.0;
                }
                let curvature = normalize_angle(p[1].yaw - p[0].yaw) / ds;
                (vehicle.wheelbase * curvature)
                    .atan()
                    .clamp(-vehicle.max_steer, vehicle.max_steer)
            })
            .collect();
        let v_max = match direction {
            Direction::Fwd => profile.v_fwd_max,
            Direction::Rev => profile.v_rev_max,
        };
        let trap = Trapezoid::new(length, v_max, profile.accel);
        let n = (trap.duration() / params.dt - 1e-9).ceil().max(0.0) as usize;
        if k > 0 {
            boundaries.push(samples.len());
        }
        for i in 0..=n {
            let (s, v) = trap.at(i as f64 * params.dt);
            let (pose, piece) = interpolate(&poses, &cum, s);
            samples.push(RefSample {
                pose,
                v: direction.sign() * v,
                steer: steers.get(piece).copied().unwrap_or(0.0),
                direction,
            });
        }
    }
    RefTrajectory {
        dt: params.dt,
        samples,
        segment_boundaries: boundaries,
    }
}

#[derive(Debug, Clone, Default)]
pub struct MpcDiagnostics {
    pub cost: f64,
    pub qp_iterations: usize,
    pub qp_residual: f64,
    /// Predicted (x, y, yaw, v) over the horizon from the final solve.
    pub predicted: Vec<[f64; 4]>,
}

type State4 = Vector4<f64>;

fn dynamics(z: &State4, accel: f64, steer: f64, dt: f64, wheelbase: f64) -> State4 {
    let (s, c) = z[2].sin_cos();
    State4::new(
        z[0] + z[3] * c * dt,
        z[1] + z[3] * s * dt,
        z[2] + z[3] * steer.tan() / wheelbase * dt,
        z[3] + accel * dt,
    )
}

fn jacobians(z: &State4, steer: f64, dt: f64, wheelbase: f64) -> (Matrix4<f64>, Matrix4x2<f64>) {
    let (s, c) = z[2].sin_cos();
    let v = z[3];
    let mut a = Matrix4::identity();
    a[(0, 2)] = -v * s * dt;
    a[(0, 3)] = c * dt;
    a[(1, 2)] = v * c * dt;
    a[(1, 3)] = s * dt;
    a[(2, 3)] = steer.tan() / wheelbase * dt;
    let cos_d = steer.cos();
    let mut b = Matrix4x2::zeros();
    b[(2, 1)] = v / (wheelbase * cos_d * cos_d) * dt;
    b[(3, 0)] = dt;
    (a, b)
}

/// Speed window allowed in the current gear.
fn gear_speed_bounds(gear: Gear, params: &MpcParams) -> (f64, f64) {
    match gear {
        Gear::Forward => (0.0, params.speed_max),
        Gear::Reverse => (params.speed_min, 0.0),
    }
}

/// One receding-horizon solve; returns the first `(accel, steer)` of the plan.
///
/// Horizon references stop at the end of the segment containing `ref_index`
/// so the controller never looks across a direction switch.
pub fn control_step(
    state: &VehicleState,
    reference: &RefTrajectory,
    ref_index: usize,
    vehicle: &VehicleParams,
    params: &MpcParams,
) -> Result<(f64, f64, MpcDiagnostics)> {
    let n = params.horizon;
    let dt = params.dt;
    let wb = vehicle.wheelbase;
    let steer_max = params.steer_max.min(vehicle.max_steer);
    let (_, seg_end) = reference.segment_range(ref_index.min(reference.samples.len() - 1));

    // Reference window with yaw unwrapped around the current heading.
    let mut refs: Vec<State4> = Vec::with_capacity(n);
    let mut prev_yaw = state.pose.yaw;
    for k in 1..=n {
        let s = reference.samples[(ref_index + k).min(seg_end - 1)];
        let yaw = prev_yaw + normalize_angle(s.pose.yaw - prev_yaw);
        prev_yaw = yaw;
        refs.push(State4::new(s.pose.x, s.pose.y, yaw, s.v));
    }
    let z0 = State4::new(state.pose.x, state.pose.y, state.pose.yaw, state.v);

    // Feedforward inputs of the reference; the R term penalizes deviation from them.
    let sample = |k: usize| reference.samples[(ref_index + k).min(seg_end - 1)];
    let u_ref: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let accel = (sample(k + 1).v - sample(k).v) / reference.dt;
            (
                accel.clamp(params.accel_min, params.accel_max),
                sample(k).steer.clamp(-steer_max, steer_max),
            )
        })
        .collect();
    let mut nominal_u = u_ref.clone();

    let (v_lo, v_hi) = gear_speed_bounds(state.gear, params);
    let mut diag = MpcDiagnostics::default();
    let mut first = (0.0, 0.0);
    for _ in 0..params.lin_iters {
        // Nominal rollout.
        let mut zs = vec![z0];
        for &(a, d) in &nominal_u {
            let next = dynamics(zs.last().unwrap(), a, d, dt, wb);
            zs.push(next);
        }

        // Condensed prediction Z = M U + m over z_1..z_N.
        let nu = 2 * n;
        let mut m_mat = DMatrix::<f64>::zeros(4 * n, nu);
        let mut m_vec = DVector::<f64>::zeros(4 * n);
        let mut z_affine = z0;
        // sens[j] = d z_k / d u_j, propagated forward one step at a time
        let mut sens: Vec<Matrix4x2<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let (a, d) = nominal_u[k];
            let (ak, bk) = jacobians(&zs[k], d, dt, wb);
            let ck = dynamics(&zs[k], a, d, dt, wb) - ak * zs[k] - bk * Vector2::new(a, d);
            z_affine = ak * z_affine + ck;
            for s in sens.iter_mut() {
                *s = ak * *s;
            }
            sens.push(bk);
            for (j, s) in sens.iter().enumerate() {
                m_mat.fixed_view_mut::<4, 2>(4 * k, 2 * j).copy_from(s);
            }
            m_vec.fixed_rows_mut::<4>(4 * k).copy_from(&z_affine);
        }

        let mut zr = DVector::<f64>::zeros(4 * n);
        let mut qdiag = DVector::<f64>::zeros(4 * n);
        for k in 0..n {
            for r in 0..4 {
                zr[4 * k + r] = refs[k][r];
                qdiag[4 * k + r] = params.q[r];
            }
            // keep the yaw error wrapped relative to the prediction
            let pred_yaw = m_vec[4 * k + 2];
            zr[4 * k + 2] = pred_yaw + normalize_angle(refs[k][2] - pred_yaw);
        }

        let mut h = DMatrix::<f64>::zeros(nu, nu);
        let mut g = DVector::<f64>::zeros(nu);
        let err = &m_vec - &zr;
        for i in 0..nu {
            for row in 0..4 * n {
                let w = qdiag[row] * m_mat[(row, i)];
                if w == 0.0 {
                    continue;
                }
                g[i] += w * err[row];
                for j in i..nu {
                    h[(i, j)] += w * m_mat[(row, j)];
                }
            }
        }
        for i in 0..nu {
            for j in 0..i {
                h[(i, j)] = h[(j, i)];
            }
        }
        for k in 0..n {
            h[(2 * k, 2 * k)] += params.r[0];
            h[(2 * k + 1, 2 * k + 1)] += params.r[1];
            g[2 * k] -= params.r[0] * u_ref[k].0;
            g[2 * k + 1] -= params.r[1] * u_ref[k].1;
        }
        // steering-rate penalty, first difference against the current steer
        for k in 0..n {
            let i = 2 * k + 1;
            h[(i, i)] += params.rd;
            if k > 0 {
                let p = 2 * (k - 1) + 1;
                h[(p, p)] += params.rd;
                h[(i, p)] -= params.rd;
                h[(p, i)] -= params.rd;
            } else {
                g[i] -= params.rd * state.steer;
            }
        }
        // tiny ridge keeps H positive definite when every weight is zero
        for i in 0..nu {
            h[(i, i)] += 1e-9;
        }

        let mut lower = DVector::<f64>::zeros(nu);
        let mut upper = DVector::<f64>::zeros(nu);
        for k in 0..n {
            let v_nom = zs[k][3];
            let a_lo = params.accel_min.max((v_lo - v_nom) / dt);
            let a_hi = params.accel_max.min((v_hi - v_nom) / dt);
            let a_lo = a_lo.min(params.accel_max);
            let a_hi = a_hi.max(params.accel_min);
            lower[2 * k] = a_lo.min(a_hi);
            upper[2 * k] = a_hi.max(a_lo);
            lower[2 * k + 1] = -steer_max;
            upper[2 * k + 1] = steer_max;
        }

        let sol = solve_box_qp_detailed(&h, &g, &lower, &upper)?;
        let u = &sol.u;
        for k in 0..n {
            nominal_u[k] = (u[2 * k], u[2 * k + 1]);
        }
        first = nominal_u[0];
        diag.cost = 0.5 * u.dot(&(&h * u)) + g.dot(u);
        diag.qp_iterations = sol.iterations;
        diag.qp_residual = sol.residual;
    }

    let mut z = z0;
    diag.predicted = nominal_u
        .iter()
        .map(|&(a, d)| {
            z = dynamics(&z, a, d, dt, wb);
            [z[0], z[1], z[2], z[3]]
        })
        .collect();
    if !(first.0.is_finite() && first.1.is_finite()) {
        return Err(Error::QpNotConverged { residual: f64::NAN });
    }
    Ok((first.0, first.1, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::PathPoint;

    fn straight_path(len: f64, step: f64, direction: Direction) -> PlannedPath {
        let n = (len / step).round() as usize;
        let points = (0..=n)
            .map(|i| PathPoint {
                pose: Pose2D::new(direction.sign() * i as f64 * step, 0.0, 0.0),
                direction,
            })
            .collect();
        PlannedPath {
            points,
            switch_indices: vec![],
            cost: len,
        }
    }

    #[test]
    fn trapezoid_timing() {
        let t = Trapezoid::new(10.0, 1.5, 1.0);
        assert!((t.duration() - (10.0 / 1.5 + 1.5)).abs() < 1e-12);
        assert_eq!(t.at(0.0), (0.0, 0.0));
        let (d, v) = t.at(1.5);
        assert!((d - 1.125).abs() < 1e-12 && (v - 1.5).abs() < 1e-12);
        let tri = Trapezoid::new(1.0, 1.5, 1.0);
        assert!((tri.peak - 1.0).abs() < 1e-12);
        assert!((tri.duration() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_of_straight_segment() {
        let p = MpcParams::default();
        let r = build_reference(&straight_path(10.0, 0.25, Direction::Fwd), &VehicleParams::default(), &p, &SpeedProfile::default());
        let total: f64 = 10.0 / 1.5 + 1.5;
        assert_eq!(r.samples.len(), (total / 0.1).ceil() as usize + 1);
        let last = r.samples.last().unwrap();
        assert_eq!(last.v, 0.0);
        assert!((last.pose.x - 10.0).abs() < 1e-12);
        assert!(r.samples.iter().all(|s| s.v.abs() <= 1.5 + 1e-12));
    }

    #[test]
    fn single_point_reference() {
        let path = PlannedPath {
            points: vec![PathPoint {
                pose: Pose2D::new(1.0, 2.0, 0.3),
                direction: Direction::Fwd,
            }],
            switch_indices: vec![],
            cost: 0.0,
        };
        let r = build_reference(&path, &VehicleParams::default(), &MpcParams::default(), &SpeedProfile::default());
        assert_eq!(r.samples.len(), 1);
        assert_eq!(r.samples[0].v, 0.0);
    }

    #[test]
    fn reverse_segment_has_negative_speed() {
        let r = build_reference(
            &straight_path(4.0, 0.25, Direction::Rev),
            &VehicleParams::default(),
            &MpcParams::default(),
            &SpeedProfile::default(),
        );
        assert!(r.samples.iter().all(|s| s.v <= 0.0));
        assert!(r.samples.iter().any(|s| (s.v + 1.0).abs() < 1e-12));
    }

    #[test]
    fn on_reference_keeps_straight() {
        let p = MpcParams::default();
        let v = VehicleParams::default();
        let r = build_reference(&straight_path(20.0, 0.25, Direction::Fwd), &VehicleParams::default(), &p, &SpeedProfile::default());
        let idx = 40;
        let s = r.samples[idx];
        let state = VehicleState {
            pose: s.pose,
            v: s.v,
            ..Default::default()
        };
        let (accel, steer, _) = control_step(&state, &r, idx, &v, &p).unwrap();
        assert!(steer.abs() <= 1e-3, "{steer}");
        assert!(accel.abs() <= 0.1, "{accel}");
    }

    #[test]
    fn left_offset_steers_right() {
        let p = MpcParams::default();
        let v = VehicleParams::default();
        let r = build_reference(&straight_path(20.0, 0.25, Direction::Fwd), &VehicleParams::default(), &p, &SpeedProfile::default());
        let s = r.samples[30];
        let state = VehicleState {
            pose: Pose2D::new(s.pose.x, 0.5, 0.0),
            v: s.v,
            ..Default::default()
        };
        let (_, steer, _) = control_step(&state, &r, 30, &v, &p).unwrap();
        assert!(steer < 0.0, "{steer}");
    }

    #[test]
    fn zero_state_weights_give_zero_input() {
        let p = MpcParams {
            q: [0.0; 4],
            ..Default::default()
        };
        let v = VehicleParams::default();
        let r = build_reference(&straight_path(20.0, 0.25, Direction::Fwd), &VehicleParams::default(), &p, &SpeedProfile::default());
        let state = VehicleState {
            pose: Pose2D::new(3.0, 1.0, 0.2),
            v: 1.0,
            ..Default::default()
        };
        let (accel, steer, _) = control_step(&state, &r, 20, &v, &p).unwrap();
        assert!(accel.abs() < 1e-6 && steer.abs() < 1e-6);
    }
}
