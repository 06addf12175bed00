//! Writes the ego-centric BEV raster of one frame and a lot overview as PGM
//! files, and prints a coarse character view of the raster.
//!
//! Run with `cargo run --release --example bev_snapshot [output dir]`.

use parkgen::bev::{rasterize_bev, rasterize_overview, BevSpec, SceneContext, EGO, TRAJECTORY};
use parkgen::engine::{run_episode, SimParams};
use parkgen::world::{build_instance, enumerate_episodes};
use std::path::PathBuf;

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bev_snapshot".into()));
    std::fs::create_dir_all(&out).unwrap();
    let sim = SimParams::default();
    let config = enumerate_episodes(0)[200];
    let inst = build_instance(&config, &sim.layout, &sim.vehicle).unwrap();
    let record = run_episode(&inst, &sim);
    let scene = SceneContext::for_config(&config, &sim.layout, &sim.vehicle);
    let spec = BevSpec::default();

    let frame = &record.frames[record.frames.len() / 2];
    let grid = rasterize_bev(&scene, &frame.pose(), &frame.pedestrians, &spec);
    std::fs::write(out.join("frame.pgm"), grid.to_pgm(EGO)).unwrap();

    let trail: Vec<_> = record.frames.iter().map(|f| f.pose().position()).collect();
    let overview = rasterize_overview(&scene, &record.frames[0].pose(), &record.frames[0].pedestrians, &trail, spec.cell_size);
    std::fs::write(out.join("overview.pgm"), overview.to_pgm(TRAJECTORY)).unwrap();

    // one character per 5 x 5 block, highest class wins
    let glyphs = ['.', '-', '#', 'o', '+', 'E'];
    for r in (0..grid.height).step_by(5) {
        let line: String = (0..grid.width)
            .step_by(5)
            .map(|c| {
                let code = (r..r + 5)
                    .flat_map(|rr| (c..c + 5).map(move |cc| (rr, cc)))
                    .map(|(rr, cc)| grid.get(rr, cc))
                    .max()
                    .unwrap();
                glyphs[code as usize]
            })
            .collect();
        println!("{line}");
    }
    println!("wrote {} and {}", out.join("frame.pgm").display(), out.join("overview.pgm").display());
}
