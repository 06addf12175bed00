//! Tracks a planned maneuver with the MPC alone, outside the episode engine,
//! and reports the cross-track error along the way.
//!
//! Run with `cargo run --release --example track_reference`.

use parkgen::engine::SimParams;
use parkgen::mpc::{build_reference, control_step};
use parkgen::planner::plan;
use parkgen::vehicle::{step_kinematics, Gear, VehicleState};
use parkgen::reeds_shepp::Direction;
use parkgen::world::{build_instance, enumerate_episodes, LayoutKind};

fn main() {
    let sim = SimParams::default();
    let config = enumerate_episodes(0)
        .into_iter()
        .find(|c| c.layout == LayoutKind::ReverseIn && c.target_slot == 9 && !c.pedestrians)
        .unwrap();
    let inst = build_instance(&config, &sim.layout, &sim.vehicle).unwrap();
    let path = plan(&inst.start.pose, &inst.goal, &inst.layout, &sim.vehicle, &sim.planner).unwrap();
    let reference = build_reference(&path, &sim.vehicle, &sim.mpc, &sim.engine.profile);
    println!(
        "reference: {} samples over {:.1} s, segments start at {:?}",
        reference.samples.len(),
        reference.duration(),
        reference.segment_boundaries
    );

    // Follow the reference clock; the vehicle shifts gear at segment starts.
    let dt = sim.engine.control_dt();
    let mut state = VehicleState::at_rest(inst.start.pose);
    let mut worst: f64 = 0.0;
    let steps = (reference.duration() / dt) as usize;
    for tick in 0..=steps {
        let idx = ((tick as f64 * dt / reference.dt) as usize).min(reference.samples.len() - 1);
        let sample = reference.samples[idx];
        state.gear = if sample.direction == Direction::Fwd { Gear::Forward } else { Gear::Reverse };
        let (accel, steer, _) = control_step(&state, &reference, idx, &sim.vehicle, &sim.mpc).unwrap();
        state = step_kinematics(&state, accel, steer, dt, &sim.vehicle);
        let error = sample.pose.dist(&state.pose);
        worst = worst.max(error);
        if tick % 20 == 0 {
            println!(
                "t {:5.2}  v {:5.2}  steer {:6.3}  error to reference {:.3} m",
                tick as f64 * dt,
                state.v,
                steer,
                error
            );
        }
    }
    println!("largest error {worst:.3} m, final distance to goal {:.3} m", state.pose.dist(&inst.goal));
}
