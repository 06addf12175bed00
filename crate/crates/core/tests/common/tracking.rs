//! Closed-loop tracking of a straight reference, stepping the controller and
//! the vehicle directly with the reference index driven by the clock.

use parkgen::geometry::Pose2D;
use parkgen::mpc::{build_reference, control_step, MpcParams, SpeedProfile};
use parkgen::planner::{PathPoint, PlannedPath};
use parkgen::reeds_shepp::Direction;
use parkgen::vehicle::{step_kinematics, Gear, VehicleParams, VehicleState};

fn straight_path(length: f64) -> PlannedPath {
    let n = (length / 0.25) as usize;
    PlannedPath {
        points: (0..=n)
            .map(|i| PathPoint {
                pose: Pose2D::new(i as f64 * 0.25, 0.0, 0.0),
                direction: Direction::Fwd,
            })
            .collect(),
        switch_indices: Vec::new(),
        cost: length,
    }
}

/// Largest |y| seen after `settle_s` when starting `offset` to the side of a
/// straight reference, with the reference index driven by the clock.
pub fn straight_line_tail_error(offset: f64, settle_s: f64) -> f64 {
    let vehicle = VehicleParams::default();
    let params = MpcParams::default();
    let reference = build_reference(&straight_path(25.0), &vehicle, &params, &SpeedProfile::default());
    let mut state = VehicleState::at_rest(Pose2D::new(0.0, offset, 0.0));
    state.gear = Gear::Forward;
    let dt = 0.05;
    let mut worst: f64 = 0.0;
    for tick in 0..(12.0 / dt) as usize {
        let t = tick as f64 * dt;
        let idx = ((t / reference.dt) as usize).min(reference.samples.len() - 1);
        let (accel, steer, _) = control_step(&state, &reference, idx, &vehicle, &params).unwrap();
        state = step_kinematics(&state, accel, steer, dt, &vehicle);
        if t + dt >= settle_s {
            worst = worst.max(state.pose.y.abs());
        }
    }
    worst
}
