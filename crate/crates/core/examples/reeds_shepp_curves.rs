//! Shortest Reeds-Shepp connections between a few pose pairs.
//!
//! Run with `cargo run --example reeds_shepp_curves`.

use parkgen::geometry::Pose2D;
use parkgen::reeds_shepp::{sample_path, shortest_path, Direction, Steer};

fn word(path: &parkgen::reeds_shepp::RSPath) -> String {
    path.segments
        .iter()
        .map(|s| {
            let letter = match s.steer {
                Steer::Left => 'L',
                Steer::Straight => 'S',
                Steer::Right => 'R',
            };
            let sign = if s.direction == Direction::Fwd { '+' } else { '-' };
            format!("{letter}{sign}{:.2}", s.length)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let radius = 4.0;
    let start = Pose2D::new(0.0, 0.0, 0.0);
    let goals = [
        ("straight ahead", Pose2D::new(8.0, 0.0, 0.0)),
        ("behind, same heading", Pose2D::new(-5.0, 0.0, 0.0)),
        ("sideways shift", Pose2D::new(0.0, 2.5, 0.0)),
        ("u-turn", Pose2D::new(0.0, 6.0, std::f64::consts::PI)),
        ("reverse-in stall", Pose2D::new(3.0, -5.5, std::f64::consts::FRAC_PI_2)),
    ];
    println!("turning radius {radius} m");
    for (name, goal) in goals {
        let path = shortest_path(&start, &goal, radius);
        let samples = sample_path(&path, &start, 0.1);
        let (end, _) = samples.last().unwrap();
        println!(
            "{name:<22} length {:6.2} m  cusps {}  [{}]  end error {:.1e}",
            path.total_length,
            path.direction_changes(),
            word(&path),
            end.dist(&goal)
        );
    }
}
