//! Generates a filtered slice of the dataset and reads it back.
//!
//! Run with `cargo run --release --example generate_dataset [output dir]`.

use parkgen::config::PipelineConfig;
use parkgen::dataset::verify_dataset;
use parkgen::pipeline::generate;
use std::path::PathBuf;

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "dataset_slice".into()));
    let cfg = PipelineConfig {
        out: out.clone(),
        filter: "slot=1,rep=0..2".into(),
        ..Default::default()
    };
    let summary = generate(&cfg).expect("generation");
    println!("{}", summary.line());

    let records = verify_dataset(&out).expect("dataset reads back");
    for r in &records {
        println!(
            "{:<10} slot {:2}  pedestrians {:5}  rep {}  {:?}  {} frames",
            r.config.layout.name(),
            r.config.target_slot,
            r.config.pedestrians,
            r.config.repetition,
            r.outcome,
            r.frames.len()
        );
    }
}
