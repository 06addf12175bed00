//! One full closed-loop episode with pedestrians: planning, tracking, the
//! safety gate and the outcome label.
//!
//! Run with `cargo run --release --example closed_loop_episode [catalogue index]`.

use parkgen::engine::{run_episode, SimParams};
use parkgen::world::{build_instance, enumerate_episodes};

fn main() {
    let index: usize = std::env::args().nth(1).map_or(22, |a| a.parse().expect("catalogue index"));
    let sim = SimParams::default();
    let config = enumerate_episodes(0)[index];
    let inst = build_instance(&config, &sim.layout, &sim.vehicle).unwrap();
    println!("{config:?}");
    println!("{} pedestrians", inst.agents.len());

    let record = run_episode(&inst, &sim);
    for frame in record.frames.iter().step_by(10) {
        println!(
            "t {:5.1}  x {:6.2}  y {:6.2}  v {:5.2}  {:?}{}",
            frame.t,
            frame.x,
            frame.y,
            frame.speed,
            frame.gear,
            if frame.hold { "  holding" } else { "" }
        );
    }
    println!(
        "{:?} ({:?}) after {:.1} s, position error {:.3} m, heading error {:.2} deg, {} frames held{}",
        record.outcome,
        record.termination,
        record.duration_s,
        record.final_pos_err,
        record.final_yaw_err.to_degrees(),
        record.hold_frames(),
        if record.replanned { ", replanned once" } else { "" }
    );
}
