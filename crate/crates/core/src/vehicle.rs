//! Kinematic bicycle vehicle referenced at the rear axle.

use crate::geometry::{arc_move, OrientedRect, Point2, Pose2D};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub wheelbase: f64,
    pub body_length: f64,
    pub body_width: f64,
    /// Rear axle to rear bumper.
    pub rear_overhang: f64,
    pub max_steer: f64,
    pub max_accel: f64,
    /// Positive magnitude.
    pub max_decel: f64,
    pub v_max_fwd: f64,
    /// Positive magnitude.
    pub v_max_rev: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.9,
            body_length: 4.8,
            body_width: 2.0,
            rear_overhang: 1.0,
            max_steer: 0.6,
            max_accel: 2.0,
            max_decel: 3.0,
            v_max_fwd: 3.0,
            v_max_rev: 2.0,
        }
    }
}

impl VehicleParams {
    pub fn min_turning_radius(&self) -> f64 {
        self.wheelbase / self.max_steer.tan()
    }

    /// Offset from the rear axle to the body center, along the heading.
    pub fn center_offset(&self) -> f64 {
        0.5 * self.body_length - self.rear_overhang
    }

    pub fn body_center(&self, pose: &Pose2D) -> Point2 {
        pose.advance(self.center_offset()).position()
    }

    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("wheelbase", self.wheelbase),
            ("body_length", self.body_length),
            ("body_width", self.body_width),
            ("rear_overhang", self.rear_overhang),
            ("max_steer", self.max_steer),
            ("max_accel", self.max_accel),
            ("max_decel", self.max_decel),
            ("v_max_fwd", self.v_max_fwd),
            ("v_max_rev", self.v_max_rev),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("vehicle.{name} must be finite and positive"));
            }
        }
        if self.max_steer >= std::f64::consts::FRAC_PI_2 {
            return Err("vehicle.max_steer must be below pi/2".into());
        }
        if self.rear_overhang >= self.body_length {
            return Err("vehicle.rear_overhang must be shorter than the body".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Gear {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub pose: Pose2D,
    /// Signed speed, negative while reversing.
    pub v: f64,
    /// Commanded longitudinal acceleration.
    pub a: f64,
    pub steer: f64,
    pub gear: Gear,
}

impl VehicleState {
    pub fn at_rest(pose: Pose2D) -> Self {
        Self {
            pose,
            ..Default::default()
        }
    }
}

/// Pedal-level command as logged in the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlCommand {
    pub throttle: f64,
    pub brake: f64,
    pub steer_norm: f64,
    pub reverse: bool,
}

/// Signed distance covered in `dt` when speed starts at `v0`, ramps with `accel`
/// and saturates at `[v_lo, v_hi]`.
fn travelled(v0: f64, accel: f64, dt: f64, v_lo: f64, v_hi: f64) -> f64 {
    if accel == 0.0 {
        return v0 * dt;
    }
    let bound = if accel > 0.0 { v_hi } else { v_lo };
    let t_sat = ((bound - v0) / accel).clamp(0.0, dt);
    let ramp = v0 * t_sat + 0.5 * accel * t_sat * t_sat;
    ramp + bound * (dt - t_sat)
}

/// Advances the state by `dt` with piecewise-constant acceleration and steering.
///
/// The pose follows the exact arc of curvature `tan(steer) / wheelbase`; commands
/// are clamped to the vehicle limits first.
pub fn step_kinematics(
    state: &VehicleState,
    accel: f64,
    steer: f64,
    dt: f64,
    params: &VehicleParams,
) -> VehicleState {
    debug_assert!(dt >= 0.0);
    let accel = accel.clamp(-params.max_decel, params.max_accel);
    let steer = steer.clamp(-params.max_steer, params.max_steer);
    let (v_lo, v_hi) = (-params.v_max_rev, params.v_max_fwd);
    let v0 = state.v.clamp(v_lo, v_hi);
    let s = travelled(v0, accel, dt, v_lo, v_hi);
    let curvature = steer.tan() / params.wheelbase;
    let pose = arc_move(&state.pose, curvature, s);
    VehicleState {
        pose,
        v: (v0 + accel * dt).clamp(v_lo, v_hi),
        a: accel,
        steer,
        gear: state.gear,
    }
}

/// Oriented body rectangle of the vehicle.
pub fn footprint_rect(pose: &Pose2D, params: &VehicleParams) -> OrientedRect {
    OrientedRect::new(
        params.body_center(pose),
        pose.yaw,
        params.body_length,
        params.body_width,
    )
}

/// Body corners, counter-clockwise from rear-right.
pub fn footprint(state: &VehicleState, params: &VehicleParams) -> [Point2; 4] {
    footprint_rect(&state.pose, params).corners()
}

pub fn accel_to_pedals(accel: f64, steer: f64, gear: Gear, params: &VehicleParams) -> ControlCommand {
    let (throttle, brake) = if accel >= 0.0 {
        ((accel / params.max_accel).clamp(0.0, 1.0), 0.0)
    } else {
        (0.0, (-accel / params.max_decel).clamp(0.0, 1.0))
    };
    ControlCommand {
        throttle,
        brake,
        steer_norm: (steer / params.max_steer).clamp(-1.0, 1.0),
        reverse: gear == Gear::Reverse,
    }
}

/// Inverse of [`accel_to_pedals`]: returns `(accel, steer)`.
pub fn pedals_to_accel(cmd: &ControlCommand, params: &VehicleParams) -> (f64, f64) {
    let accel = if cmd.brake > 0.0 {
        -cmd.brake * params.max_decel
    } else {
        cmd.throttle * params.max_accel
    };
    (accel, cmd.steer_norm * params.max_steer)
}
