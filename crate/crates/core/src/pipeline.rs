//! The four pipeline commands as library calls; the binary only parses flags
//! and maps errors to exit codes.

use crate::bev::{rasterize_overview, SceneContext, TRAJECTORY};
use crate::config::PipelineConfig;
use crate::dataset::{episode_dir_name, write_episode, write_manifest, DatasetManifest, SCHEMA_VERSION};
use crate::engine::{run_episode, EpisodeRecord, Outcome, SimParams};
use crate::error::{Error, Result};
use crate::geometry::Pose2D;
use crate::metrics::{default_eval_suite, evaluate_suite, MetricsReport};
use crate::planner::{plan, PathPoint};
use crate::world::{build_instance, enumerate_episodes, ScenarioConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const EVAL_REPORT: &str = "eval_report.json";

/// Builds the scenario and runs it closed-loop.
pub fn run_config(config: &ScenarioConfig, sim: &SimParams) -> Result<EpisodeRecord> {
    let instance = build_instance(config, &sim.layout, &sim.vehicle)?;
    Ok(run_episode(&instance, sim))
}

/// Catalogue entries passing the configured filter, with their catalogue index.
pub fn select_episodes(cfg: &PipelineConfig) -> Result<Vec<(usize, ScenarioConfig)>> {
    let filter = cfg.episode_filter()?;
    let chosen: Vec<_> = enumerate_episodes(cfg.master_seed)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| filter.matches(c))
        .collect();
    if chosen.is_empty() {
        return Err(Error::Config(format!("filter {:?} selects no episodes", cfg.filter)));
    }
    Ok(chosen)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub episodes: usize,
    pub total_frames: usize,
    pub counts: BTreeMap<Outcome, usize>,
}

impl GenerateSummary {
    pub fn plan_failures(&self) -> usize {
        self.counts.get(&Outcome::PlanFailure).copied().unwrap_or(0)
    }

    pub fn line(&self) -> String {
        let counts: Vec<String> = self.counts.iter().map(|(o, n)| format!("{o:?}={n}")).collect();
        format!(
            "{} episodes, {} frames: {}",
            self.episodes,
            self.total_frames,
            counts.join(" ")
        )
    }
}

/// Runs every selected episode and writes the dataset under `cfg.out`.
///
/// Episode directories are named by catalogue index, so a filtered run
/// reproduces the same directories as the full one. Any previous
/// `episodes/` tree and manifest under `cfg.out` are replaced.
pub fn generate(cfg: &PipelineConfig) -> Result<GenerateSummary> {
    cfg.validate()?;
    let chosen = select_episodes(cfg)?;
    let sim = cfg.sim();
    let root = &cfg.out;
    let episodes_dir = root.join("episodes");
    if episodes_dir.exists() {
        fs::remove_dir_all(&episodes_dir).map_err(|e| Error::io(&episodes_dir, e))?;
    }
    fs::create_dir_all(&episodes_dir).map_err(|e| Error::io(&episodes_dir, e))?;

    let entries = pool(cfg.workers)?.install(|| {
        chosen
            .par_iter()
            .map(|(index, config)| {
                let record = run_config(config, &sim)?;
                let scene = SceneContext::for_config(config, &sim.layout, &sim.vehicle);
                write_episode(&record, &scene, &cfg.bev, &episodes_dir.join(episode_dir_name(*index)))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut counts: BTreeMap<Outcome, usize> = Outcome::ALL.iter().map(|&o| (o, 0)).collect();
    for e in &entries {
        *counts.entry(e.outcome).or_default() += 1;
    }
    let summary = GenerateSummary {
        episodes: entries.len(),
        total_frames: entries.iter().map(|e| e.frame_count).sum(),
        counts,
    };
    write_manifest(
        root,
        &DatasetManifest {
            schema_version: SCHEMA_VERSION,
            master_seed: cfg.master_seed,
            episode_count: entries.len(),
            episodes: entries,
        },
    )?;
    Ok(summary)
}

/// Runs the evaluation suite (narrowed by the filter, if any) and writes the
/// report to `cfg.out/eval_report.json`.
pub fn evaluate(cfg: &PipelineConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let filter = cfg.episode_filter()?;
    let suite: Vec<ScenarioConfig> = default_eval_suite(cfg.master_seed)
        .into_iter()
        .filter(|c| filter.matches(c))
        .collect();
    let sim = cfg.sim();
    let records = pool(cfg.workers)?.install(|| {
        suite
            .par_iter()
            .map(|c| run_config(c, &sim))
            .collect::<Result<Vec<_>>>()
    })?;
    let report = evaluate_suite(&records)?;
    write_report(&cfg.out, &report)?;
    Ok(report)
}

pub fn write_report(dir: &Path, report: &MetricsReport) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(EVAL_REPORT);
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::CorruptFrame(format!("{}: {e}", path.display())))
}

/// Planned maneuver as written by [`plan_episode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub config: ScenarioConfig,
    pub start: Pose2D,
    pub goal: Pose2D,
    pub cost: f64,
    pub length: f64,
    pub switch_indices: Vec<usize>,
    pub points: Vec<PathPoint>,
}

/// Plans the first selected episode and writes `cfg.out/plan_epNNNN.json`.
pub fn plan_episode(cfg: &PipelineConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let (index, config) = select_episodes(cfg)?[0];
    let sim = cfg.sim();
    let instance = build_instance(&config, &sim.layout, &sim.vehicle)?;
    let path = plan(&instance.start.pose, &instance.goal, &instance.layout, &sim.vehicle, &sim.planner)?;
    let file = PlanFile {
        config,
        start: instance.start.pose,
        goal: instance.goal,
        cost: path.cost,
        length: path.length(),
        switch_indices: path.switch_indices.clone(),
        points: path.points,
    };
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let out = cfg.out.join(format!("plan_{}.json", episode_dir_name(index)));
    let mut text = serde_json::to_string_pretty(&file).expect("plan serializes");
    text.push('\n');
    fs::write(&out, text).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

/// Runs the first selected episode and writes it to `cfg.out/epNNNN/`
/// together with `overview.pgm`, a top-down view of the lot at frame 0 with
/// the planned path drawn as dots.
pub fn render_episode(cfg: &PipelineConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let (index, config) = select_episodes(cfg)?[0];
    let sim = cfg.sim();
    let instance = build_instance(&config, &sim.layout, &sim.vehicle)?;
    let path = plan(&instance.start.pose, &instance.goal, &instance.layout, &sim.vehicle, &sim.planner)?;
    let record = run_episode(&instance, &sim);
    let scene = SceneContext::for_config(&config, &sim.layout, &sim.vehicle);
    let dir = cfg.out.join(episode_dir_name(index));
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    write_episode(&record, &scene, &cfg.bev, &dir)?;

    let first = &record.frames[0];
    let dots: Vec<_> = path.points.iter().map(|p| p.pose.position()).collect();
    let overview = rasterize_overview(&scene, &first.pose(), &first.pedestrians, &dots, cfg.bev.cell_size);
    let out = dir.join("overview.pgm");
    fs::write(&out, overview.to_pgm(TRAJECTORY)).map_err(|e| Error::io(&out, e))?;
    Ok(dir)
}

