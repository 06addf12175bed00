//! Hybrid A* maneuvers into one reverse-in stall and one parallel slot.
//!
//! Run with `cargo run --release --example plan_maneuver`.

use parkgen::planner::plan;
use parkgen::reeds_shepp::Direction;
use parkgen::world::{build_instance, enumerate_episodes, LayoutKind};
use parkgen::engine::SimParams;
use std::time::Instant;

fn main() {
    let sim = SimParams::default();
    for (layout, slot) in [(LayoutKind::ReverseIn, 5), (LayoutKind::Parallel, 2)] {
        let config = enumerate_episodes(0)
            .into_iter()
            .find(|c| c.layout == layout && c.target_slot == slot && !c.pedestrians)
            .unwrap();
        let inst = build_instance(&config, &sim.layout, &sim.vehicle).unwrap();
        let started = Instant::now();
        let path = plan(&inst.start.pose, &inst.goal, &inst.layout, &sim.vehicle, &sim.planner).unwrap();
        let elapsed = started.elapsed();

        println!("{} slot {slot}", layout.name());
        println!("  start {:?}", inst.start.pose);
        println!("  goal  {:?}", inst.goal);
        println!(
            "  {} points, length {:.2} m, cost {:.2}, planned in {elapsed:.2?}",
            path.points.len(),
            path.length(),
            path.cost
        );
        let mut from = 0;
        for &cut in path.switch_indices.iter().chain(std::iter::once(&path.points.len())) {
            let piece = &path.points[from..cut];
            let dir = if piece[piece.len() - 1].direction == Direction::Fwd { "forward" } else { "reverse" };
            let len: f64 = piece.windows(2).map(|w| w[0].pose.dist(&w[1].pose)).sum();
            println!("    {dir:<8} {len:5.2} m");
            from = cut;
        }
    }
}
