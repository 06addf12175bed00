//! On-disk dataset format.
//!
//! ```text
//! <root>/manifest.json
//! <root>/episodes/ep0000/meta.json
//! <root>/episodes/ep0000/frames.jsonl     one FrameRecord per line
//! <root>/episodes/ep0000/bev/000000.pgm   one raster per frame
//! ```
//!
//! JSON objects keep struct field order and floats use shortest round-trip
//! formatting, so identical records always produce identical bytes.

use crate::bev::{rasterize_bev, BevSpec, ClassGrid, SceneContext, EGO};
use crate::engine::{EpisodeRecord, Outcome, Termination};
use crate::error::{Error, Result};
use crate::geometry::Pose2D;
use crate::vehicle::{Gear, VehicleState};
use crate::world::ScenarioConfig;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub speed: f64,
    /// Commanded acceleration.
    pub accel: f64,
    pub steer: f64,
    pub throttle: f64,
    pub brake: f64,
    pub steer_norm: f64,
    pub reverse: bool,
    pub gear: Gear,
    /// Safety gate was holding the vehicle on this tick.
    pub hold: bool,
    pub pedestrians: Vec<[f64; 2]>,
    pub target_slot_id: usize,
    /// Raster path relative to the episode directory.
    pub bev_file: String,
}

impl FrameRecord {
    pub fn bev_name(index: usize) -> String {
        format!("bev/{index:06}.pgm")
    }

    pub fn pose(&self) -> Pose2D {
        Pose2D::new(self.x, self.y, self.yaw)
    }
}

/// `meta.json`: the episode record without its frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub outcome: Outcome,
    pub termination: Termination,
    pub duration_s: f64,
    pub final_state: VehicleState,
    pub final_pos_err: f64,
    pub final_yaw_err: f64,
    pub replanned: bool,
    pub frame_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub directory: String,
    pub config: ScenarioConfig,
    pub outcome: Outcome,
    pub frame_count: usize,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub master_seed: u64,
    pub episode_count: usize,
    pub episodes: Vec<ManifestEntry>,
}

pub fn episode_dir_name(index: usize) -> String {
    format!("ep{index:04}")
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("records serialize");
    out.push(b'\n');
    out
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Removes a half-written episode directory unless disarmed.
struct PartialDir(Option<PathBuf>);

impl Drop for PartialDir {
    fn drop(&mut self) {
        if let Some(p) = self.0.take() {
            let _ = fs::remove_dir_all(p);
        }
    }
}

/// Writes `record` into `dir`, rendering one raster per frame.
///
/// Everything lands in a sibling staging directory that is renamed into place
/// at the end; on any failure the staging directory is removed.
pub fn write_episode(record: &EpisodeRecord, scene: &SceneContext, spec: &BevSpec, dir: &Path) -> Result<ManifestEntry> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| Error::Config(format!("episode directory {} has no name", dir.display())))?;
    let staging = dir.with_file_name(format!(".{name}.partial"));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir_all(staging.join("bev")).map_err(|e| Error::io(&staging, e))?;
    let mut guard = PartialDir(Some(staging.clone()));

    let frames_path = staging.join("frames.jsonl");
    let file = fs::File::create(&frames_path).map_err(|e| Error::io(&frames_path, e))?;
    let mut out = BufWriter::new(file);
    for frame in &record.frames {
        serde_json::to_writer(&mut out, frame).expect("frames serialize");
        out.write_all(b"\n").map_err(|e| Error::io(&frames_path, e))?;
        let raster = rasterize_bev(scene, &frame.pose(), &frame.pedestrians, spec);
        write_file(&staging.join(&frame.bev_file), &raster.to_pgm(EGO))?;
    }
    out.flush().map_err(|e| Error::io(&frames_path, e))?;
    drop(out);

    let meta = EpisodeMeta {
        schema_version: SCHEMA_VERSION,
        config: record.config,
        outcome: record.outcome,
        termination: record.termination,
        duration_s: record.duration_s,
        final_state: record.final_state,
        final_pos_err: record.final_pos_err,
        final_yaw_err: record.final_yaw_err,
        replanned: record.replanned,
        frame_count: record.frames.len(),
    };
    write_file(&staging.join("meta.json"), &to_json(&meta))?;

    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::rename(&staging, dir).map_err(|e| Error::io(dir, e))?;
    guard.0 = None;
    Ok(ManifestEntry {
        directory: format!("episodes/{name}"),
        config: record.config,
        outcome: record.outcome,
        frame_count: record.frames.len(),
        duration_s: record.duration_s,
    })
}

/// Inverse of [`write_episode`]; also checks that every raster is present.
pub fn read_episode(dir: &Path) -> Result<EpisodeRecord> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let version: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::CorruptFrame(format!("{}: {e}", meta_path.display())))?;
    let found = version.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaMismatch {
            expected: SCHEMA_VERSION,
            found,
        });
    }
    let meta: EpisodeMeta =
        serde_json::from_value(version).map_err(|e| Error::CorruptFrame(format!("{}: {e}", meta_path.display())))?;

    let frames_path = dir.join("frames.jsonl");
    let file = fs::File::open(&frames_path).map_err(|e| Error::io(&frames_path, e))?;
    let mut frames = Vec::with_capacity(meta.frame_count);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&frames_path, e))?;
        let frame: FrameRecord =
            serde_json::from_str(&line).map_err(|e| Error::CorruptFrame(format!("frame {i}: {e}")))?;
        frames.push(frame);
    }
    if frames.len() != meta.frame_count {
        return Err(Error::CorruptFrame(format!(
            "{}: meta lists {} frames, log has {}",
            dir.display(),
            meta.frame_count,
            frames.len()
        )));
    }
    let rasters = fs::read_dir(dir.join("bev"))
        .map_err(|e| Error::io(dir.join("bev"), e))?
        .count();
    if rasters != frames.len() {
        return Err(Error::CorruptFrame(format!(
            "{}: {} rasters for {} frames",
            dir.display(),
            rasters,
            frames.len()
        )));
    }
    if let Some(missing) = frames.iter().find(|f| !dir.join(&f.bev_file).is_file()) {
        return Err(Error::CorruptFrame(format!("missing raster {}", missing.bev_file)));
    }
    Ok(EpisodeRecord {
        config: meta.config,
        outcome: meta.outcome,
        termination: meta.termination,
        duration_s: meta.duration_s,
        final_state: meta.final_state,
        final_pos_err: meta.final_pos_err,
        final_yaw_err: meta.final_yaw_err,
        replanned: meta.replanned,
        frames,
    })
}

pub fn read_raster(dir: &Path, frame: &FrameRecord) -> Result<ClassGrid> {
    ClassGrid::read(&dir.join(&frame.bev_file))
}

pub fn write_manifest(root: &Path, manifest: &DatasetManifest) -> Result<()> {
    write_file(&root.join("manifest.json"), &to_json(manifest))
}

pub fn read_manifest(root: &Path) -> Result<DatasetManifest> {
    let path = root.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::CorruptFrame(format!("{}: {e}", path.display())))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaMismatch {
            expected: SCHEMA_VERSION,
            found: manifest.schema_version,
        });
    }
    Ok(manifest)
}

/// Loads every episode listed in the manifest and checks counts against disk.
pub fn verify_dataset(root: &Path) -> Result<Vec<EpisodeRecord>> {
    let manifest = read_manifest(root)?;
    let on_disk = fs::read_dir(root.join("episodes"))
        .map_err(|e| Error::io(root.join("episodes"), e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .count();
    if manifest.episode_count != manifest.episodes.len() || on_disk != manifest.episode_count {
        return Err(Error::CorruptFrame(format!(
            "manifest lists {} episodes, found {on_disk} directories",
            manifest.episode_count
        )));
    }
    manifest
        .episodes
        .iter()
        .map(|entry| {
            let record = read_episode(&root.join(&entry.directory))?;
            if record.frames.len() != entry.frame_count {
                return Err(Error::CorruptFrame(format!(
                    "{}: manifest says {} frames, found {}",
                    entry.directory,
                    entry.frame_count,
                    record.frames.len()
                )));
            }
            Ok(record)
        })
        .collect()
}
