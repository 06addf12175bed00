//! Closed-loop evaluation metrics over a suite of episode records.

use crate::engine::{EpisodeRecord, Outcome};
use crate::error::{Error, Result};
use crate::world::{episode_seed, LayoutKind, ScenarioConfig, EVALUATION_TAG};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Row labels of the printed table, in order.
pub const METRIC_NAMES: [&str; 8] = [
    "Target Success Rate (TSR)",
    "Target Failure Rate (TFR)",
    "Non-Target Rate (NTR)",
    "Collision Rate (CR)",
    "Timeout Rate (TR)",
    "Avg. Position Error (APE)",
    "Avg. Orientation Error (AOE)",
    "Avg. Parking Time (APT)",
];

pub const EVAL_SLOTS: usize = 16;
pub const EVAL_REPETITIONS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_trials: usize,
    pub tsr: f64,
    pub tfr: f64,
    pub ntr: f64,
    pub cr: f64,
    /// Includes plan failures.
    pub tr: f64,
    /// Metres, over successes only.
    pub ape: Option<f64>,
    /// Degrees, over successes only.
    pub aoe: Option<f64>,
    /// Seconds, over successes only.
    pub apt: Option<f64>,
    pub counts: BTreeMap<Outcome, usize>,
}

impl MetricsReport {
    /// `(name, formatted value)` pairs in table order.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        let pct = |x: f64| format!("{:.2}%", 100.0 * x);
        let opt = |x: Option<f64>, unit: &str, digits: usize| match x {
            Some(v) => format!("{v:.digits$}{unit}"),
            None => "n/a".to_string(),
        };
        let values = [
            pct(self.tsr),
            pct(self.tfr),
            pct(self.ntr),
            pct(self.cr),
            pct(self.tr),
            opt(self.ape, " m", 3),
            opt(self.aoe, " deg", 2),
            opt(self.apt, " s", 2),
        ];
        METRIC_NAMES.into_iter().zip(values).collect()
    }

    pub fn table(&self) -> String {
        let width = METRIC_NAMES.iter().map(|n| n.len()).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  Value ({} trials)", "Metric", self.n_trials);
        for (name, value) in self.rows() {
            let _ = writeln!(out, "{name:<width$}  {value}");
        }
        out
    }
}

/// Aggregates records into the eight rate and error metrics.
///
/// Rates use mutually exclusive outcome categories; errors and times average
/// over `TargetSuccess` records only.
pub fn evaluate_suite(records: &[EpisodeRecord]) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::EmptySuite);
    }
    let mut counts: BTreeMap<Outcome, usize> = Outcome::ALL.iter().map(|&o| (o, 0)).collect();
    for r in records {
        *counts.entry(r.outcome).or_default() += 1;
    }
    let n = records.len();
    let rate = |k: usize| k as f64 / n as f64;
    let successes: Vec<&EpisodeRecord> = records
        .iter()
        .filter(|r| r.outcome == Outcome::TargetSuccess)
        .collect();
    let mean = |f: &dyn Fn(&EpisodeRecord) -> f64| {
        (!successes.is_empty()).then(|| successes.iter().map(|r| f(r)).sum::<f64>() / successes.len() as f64)
    };
    Ok(MetricsReport {
        n_trials: n,
        tsr: rate(counts[&Outcome::TargetSuccess]),
        tfr: rate(counts[&Outcome::TargetFailure]),
        ntr: rate(counts[&Outcome::NonTarget]),
        cr: rate(counts[&Outcome::Collision]),
        tr: rate(counts[&Outcome::Timeout] + counts[&Outcome::PlanFailure]),
        ape: mean(&|r| r.final_pos_err),
        aoe: mean(&|r| r.final_yaw_err.to_degrees()),
        apt: mean(&|r| r.duration_s),
        counts,
    })
}

/// The 128-trial evaluation protocol: every reverse-in slot, eight starts,
/// no pedestrians, seeded apart from the generation catalogue.
pub fn default_eval_suite(master_seed: u64) -> Vec<ScenarioConfig> {
    let layout = LayoutKind::ReverseIn;
    (0..EVAL_SLOTS)
        .flat_map(|slot| {
            (0..EVAL_REPETITIONS).map(move |repetition| ScenarioConfig {
                layout,
                target_slot: slot,
                pedestrians: false,
                repetition,
                seed: episode_seed(master_seed, EVALUATION_TAG, layout, slot, false, repetition),
            })
        })
        .collect()
}
