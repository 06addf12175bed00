//! Runs part of the 128-trial evaluation suite and prints the metrics table.
//!
//! Run with `cargo run --release --example evaluate_metrics [repetitions]`.

use parkgen::engine::SimParams;
use parkgen::metrics::{default_eval_suite, evaluate_suite};
use parkgen::pipeline::run_config;
use rayon::prelude::*;

fn main() {
    let reps: u32 = std::env::args().nth(1).map_or(2, |a| a.parse().expect("repetition count"));
    let sim = SimParams::default();
    let suite: Vec<_> = default_eval_suite(0).into_iter().filter(|c| c.repetition < reps).collect();
    let records: Vec<_> = suite.par_iter().map(|c| run_config(c, &sim).unwrap()).collect();
    let report = evaluate_suite(&records).unwrap();
    print!("{}", report.table());
}
