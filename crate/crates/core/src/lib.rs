//! Parking maneuver dataset generation and closed-loop evaluation.
//!
//! A Hybrid A* planner with Reeds-Shepp analytic expansion produces a
//! maneuver for each scenario, an LTV model-predictive controller tracks it on
//! a kinematic bicycle in a deterministic 2D lot, and every run is logged as
//! per-frame states, pedal controls and semantic bird's-eye-view rasters.

pub mod bev;
pub mod config;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod vehicle;
pub mod metrics;
pub mod mpc;
pub mod pipeline;
pub mod planner;
pub mod qp;
pub mod reeds_shepp;
pub mod world;

pub use error::{Error, Result};
