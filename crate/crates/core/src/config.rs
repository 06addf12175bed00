//! Pipeline configuration file and episode selection filter.

use crate::bev::BevSpec;
use crate::engine::{EngineConfig, SimParams};
use crate::error::{Error, Result};
use crate::mpc::MpcParams;
use crate::planner::PlannerParams;
use crate::vehicle::VehicleParams;
use crate::world::{LayoutKind, LayoutParams, ScenarioConfig};
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::path::{Path, PathBuf};

/// Everything a pipeline run reads from its TOML file. Every field has a
/// default, so an empty file describes the full 704-episode run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root of all per-episode seeds.
    pub master_seed: u64,
    /// Dataset root or report directory.
    pub out: PathBuf,
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    /// Episode selection, see [`EpisodeFilter`]; empty selects everything.
    pub filter: String,
    pub vehicle: VehicleParams,
    pub layout: LayoutParams,
    pub planner: PlannerParams,
    pub mpc: MpcParams,
    pub engine: EngineConfig,
    pub bev: BevSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            out: PathBuf::from("dataset"),
            workers: 0,
            filter: String::new(),
            vehicle: VehicleParams::default(),
            layout: LayoutParams::default(),
            planner: PlannerParams::default(),
            mpc: MpcParams::default(),
            engine: EngineConfig::default(),
            bev: BevSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.sim().validate().map_err(Error::Config)?;
        self.bev.validate().map_err(Error::Config)?;
        EpisodeFilter::parse(&self.filter)?;
        Ok(())
    }

    pub fn sim(&self) -> SimParams {
        SimParams {
            vehicle: self.vehicle,
            layout: self.layout.clone(),
            planner: self.planner.clone(),
            mpc: self.mpc.clone(),
            engine: self.engine.clone(),
        }
    }

    pub fn episode_filter(&self) -> Result<EpisodeFilter> {
        EpisodeFilter::parse(&self.filter)
    }
}

/// Conjunction of selectors over layout, slot, pedestrian flag and repetition.
///
/// Syntax: comma-separated `key=value` terms, where a value is a `|`-separated
/// list of alternatives and numeric alternatives may be half-open ranges.
///
/// ```text
/// layout=reverse_in,slot=0,ped=off
/// layout=parallel,rep=0..4
/// slot=1|3|5..8,ped=on
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeFilter {
    layouts: Option<Vec<LayoutKind>>,
    slots: Option<Vec<Range<u64>>>,
    pedestrians: Option<bool>,
    repetitions: Option<Vec<Range<u64>>>,
}

fn parse_ranges(key: &str, value: &str) -> Result<Vec<Range<u64>>> {
    value
        .split('|')
        .map(|alt| {
            let bad = || Error::Config(format!("filter: bad {key} value {alt:?}"));
            match alt.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                    if a >= b {
                        return Err(bad());
                    }
                    Ok(a..b)
                }
                None => {
                    let v: u64 = alt.trim().parse().map_err(|_| bad())?;
                    Ok(v..v + 1)
                }
            }
        })
        .collect()
}

impl EpisodeFilter {
    pub fn parse(expr: &str) -> Result<Self> {
        let mut f = Self::default();
        for term in expr.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = term
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("filter: expected key=value, got {term:?}")))?;
            let value = value.trim();
            match key.trim() {
                "layout" => {
                    let kinds = value
                        .split('|')
                        .map(|v| match v.trim() {
                            "reverse_in" | "reverse-in" | "reverse" => Ok(LayoutKind::ReverseIn),
                            "parallel" => Ok(LayoutKind::Parallel),
                            other => Err(Error::Config(format!("filter: unknown layout {other:?}"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    f.layouts = Some(kinds);
                }
                "slot" => f.slots = Some(parse_ranges("slot", value)?),
                "rep" => f.repetitions = Some(parse_ranges("rep", value)?),
                "ped" => {
                    f.pedestrians = Some(match value {
                        "on" | "true" | "1" => true,
                        "off" | "false" | "0" => false,
                        other => return Err(Error::Config(format!("filter: bad ped value {other:?}"))),
                    })
                }
                other => return Err(Error::Config(format!("filter: unknown key {other:?}"))),
            }
        }
        Ok(f)
    }

    pub fn matches(&self, c: &ScenarioConfig) -> bool {
        let within = |ranges: &Option<Vec<Range<u64>>>, v: u64| {
            ranges.as_ref().is_none_or(|rs| rs.iter().any(|r| r.contains(&v)))
        };
        self.layouts.as_ref().is_none_or(|ls| ls.contains(&c.layout))
            && within(&self.slots, c.target_slot as u64)
            && self.pedestrians.is_none_or(|p| p == c.pedestrians)
            && within(&self.repetitions, c.repetition as u64)
    }
}
