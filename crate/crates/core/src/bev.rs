//! Semantic bird's-eye-view rasters.
//!
//! Rasters are ego-centric with the rear axle at the grid centre and the
//! heading pointing up (row 0 is furthest ahead, column 0 is furthest left).
//! Each cell holds one class code; higher codes win where shapes overlap.

use crate::error::{Error, Result};
use crate::geometry::{OrientedRect, Point2, Pose2D};
use crate::vehicle::{footprint_rect, VehicleParams};
use crate::world::{LayoutParams, LotLayout, ScenarioConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FREE: u8 = 0;
pub const MARKING: u8 = 1;
pub const STATIC_VEHICLE: u8 = 2;
pub const PEDESTRIAN: u8 = 3;
pub const TARGET_SLOT: u8 = 4;
pub const EGO: u8 = 5;
/// Overview rasters only: planned or driven trajectory dots.
pub const TRAJECTORY: u8 = 6;

/// Width of painted slot outlines.
pub const MARKING_WIDTH: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BevSpec {
    /// Cells per side; the raster is square.
    pub cells: usize,
    pub cell_size: f64,
}

impl Default for BevSpec {
    fn default() -> Self {
        Self {
            cells: 200,
            cell_size: 0.1,
        }
    }
}

impl BevSpec {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.cells == 0 || !self.cells.is_multiple_of(2) {
            return Err("bev.cells must be a positive even number".into());
        }
        if !(self.cell_size > 0.0) {
            return Err("bev.cell_size must be positive".into());
        }
        Ok(())
    }
}

/// Row-major class grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl ClassGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![FREE; width * height],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    fn raise(&mut self, row: usize, col: usize, code: u8) {
        let cell = &mut self.data[row * self.width + col];
        *cell = (*cell).max(code);
    }

    pub fn count(&self, code: u8) -> usize {
        self.data.iter().filter(|&&c| c == code).count()
    }

    /// Binary PGM: `P5\n<w> <h>\n<maxval>\n` followed by one byte per cell.
    pub fn to_pgm(&self, maxval: u8) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, maxval).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let bad = |why: &str| Error::CorruptFrame(format!("bad raster: {why}"));
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos >= bytes.len() {
                return Err(bad("truncated header"));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header encoding"))?);
            pos += 1;
        }
        if fields[0] != "P5" {
            return Err(bad("magic"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("header number"));
        let (width, height) = (num(fields[1])?, num(fields[2])?);
        num(fields[3])?;
        let data = bytes[pos..].to_vec();
        if data.len() != width * height {
            return Err(bad("payload size"));
        }
        Ok(Self { width, height, data })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_pgm(&bytes)
    }

    /// 4-connected components of cells equal to `code`.
    pub fn components(&self, code: u8) -> usize {
        let mut seen = vec![false; self.data.len()];
        let mut count = 0;
        for start in 0..self.data.len() {
            if seen[start] || self.data[start] != code {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                let (r, c) = (i / self.width, i % self.width);
                let mut visit = |j: usize| {
                    if !seen[j] && self.data[j] == code {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if r > 0 {
                    visit(i - self.width);
                }
                if r + 1 < self.height {
                    visit(i + self.width);
                }
                if c > 0 {
                    visit(i - 1);
                }
                if c + 1 < self.width {
                    visit(i + 1);
                }
            }
        }
        count
    }
}

/// Static context needed to rasterize any frame of one episode.
#[derive(Debug, Clone)]
pub struct SceneContext {
    pub layout: LotLayout,
    pub target_slot: usize,
    pub vehicle: VehicleParams,
    pub pedestrian_radius: f64,
}

impl SceneContext {
    pub fn for_config(config: &ScenarioConfig, layout: &LayoutParams, vehicle: &VehicleParams) -> Self {
        let lot = crate::world::build_layout_with(config.layout, layout).occupied_except(config.target_slot, layout);
        Self {
            layout: lot,
            target_slot: config.target_slot,
            vehicle: *vehicle,
            pedestrian_radius: layout.pedestrian_radius,
        }
    }
}

/// Maps cell centres to world points; shared by the ego and overview rasters.
trait CellFrame {
    fn world_of(&self, row: usize, col: usize) -> Point2;
    /// Inclusive cell window covering a world-space disc of radius `r` around `p`.
    fn window(&self, p: Point2, r: f64) -> Option<(usize, usize, usize, usize)>;
}

struct EgoFrame {
    pose: Pose2D,
    n: usize,
    cell: f64,
}

impl CellFrame for EgoFrame {
    fn world_of(&self, row: usize, col: usize) -> Point2 {
        let half = self.n as f64 / 2.0;
        let forward = (half - row as f64 - 0.5) * self.cell;
        let left = (half - col as f64 - 0.5) * self.cell;
        self.pose.to_world(Point2::new(forward, left))
    }

    fn window(&self, p: Point2, r: f64) -> Option<(usize, usize, usize, usize)> {
        let local = self.pose.to_local(p);
        let half = self.n as f64 / 2.0;
        let row = half - local.x / self.cell;
        let col = half - local.y / self.cell;
        clamp_window(row, col, r / self.cell, self.n, self.n)
    }
}

struct WorldFrame {
    min: Point2,
    max_y: f64,
    width: usize,
    height: usize,
    cell: f64,
}

impl CellFrame for WorldFrame {
    fn world_of(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.min.x + (col as f64 + 0.5) * self.cell,
            self.max_y - (row as f64 + 0.5) * self.cell,
        )
    }

    fn window(&self, p: Point2, r: f64) -> Option<(usize, usize, usize, usize)> {
        let row = (self.max_y - p.y) / self.cell;
        let col = (p.x - self.min.x) / self.cell;
        clamp_window(row, col, r / self.cell, self.height, self.width)
    }
}

fn clamp_window(row: f64, col: f64, r: f64, rows: usize, cols: usize) -> Option<(usize, usize, usize, usize)> {
    let r0 = (row - r).floor().max(0.0);
    let r1 = (row + r).ceil().min(rows as f64 - 1.0);
    let c0 = (col - r).floor().max(0.0);
    let c1 = (col + r).ceil().min(cols as f64 - 1.0);
    if r0 > r1 || c0 > c1 {
        return None;
    }
    Some((r0 as usize, r1 as usize, c0 as usize, c1 as usize))
}

fn paint<F: CellFrame>(grid: &mut ClassGrid, frame: &F, p: Point2, r: f64, code: u8, inside: impl Fn(Point2) -> bool) {
    if let Some((r0, r1, c0, c1)) = frame.window(p, r) {
        for row in r0..=r1 {
            for col in c0..=c1 {
                if inside(frame.world_of(row, col)) {
                    grid.raise(row, col, code);
                }
            }
        }
    }
}

fn paint_rect<F: CellFrame>(grid: &mut ClassGrid, frame: &F, rect: &OrientedRect, code: u8) {
    paint(grid, frame, rect.center, rect.bounding_radius(), code, |p| rect.contains(p));
}

fn paint_scene<F: CellFrame>(grid: &mut ClassGrid, frame: &F, scene: &SceneContext, pedestrians: &[[f64; 2]]) {
    for slot in &scene.layout.slots {
        let rect = slot.rect();
        let inner = rect.inflated(-MARKING_WIDTH);
        paint(grid, frame, rect.center, rect.bounding_radius(), MARKING, |p| {
            rect.contains(p) && !inner.contains(p)
        });
        if slot.id == scene.target_slot {
            paint_rect(grid, frame, &inner, TARGET_SLOT);
        }
    }
    for obstacle in &scene.layout.static_obstacles {
        paint_rect(grid, frame, obstacle, STATIC_VEHICLE);
    }
    let r = scene.pedestrian_radius;
    for &[x, y] in pedestrians {
        let c = Point2::new(x, y);
        paint(grid, frame, c, r, PEDESTRIAN, |p| p.dist(c) <= r);
    }
}

/// Ego-centric semantic raster for one frame; cells outside the lot stay free.
pub fn rasterize_bev(scene: &SceneContext, pose: &Pose2D, pedestrians: &[[f64; 2]], spec: &BevSpec) -> ClassGrid {
    let n = spec.cells;
    let mut grid = ClassGrid::new(n, n);
    let frame = EgoFrame {
        pose: *pose,
        n,
        cell: spec.cell_size,
    };
    paint_scene(&mut grid, &frame, scene, pedestrians);
    let bounds = scene.layout.bounds;
    for row in 0..n {
        for col in 0..n {
            if !bounds.contains(frame.world_of(row, col)) {
                grid.data[row * n + col] = FREE;
            }
        }
    }
    paint_rect(&mut grid, &frame, &footprint_rect(pose, &scene.vehicle), EGO);
    grid
}

/// Top-down raster of the whole lot with trajectory dots, north up.
pub fn rasterize_overview(
    scene: &SceneContext,
    pose: &Pose2D,
    pedestrians: &[[f64; 2]],
    trajectory: &[Point2],
    cell: f64,
) -> ClassGrid {
    let b = scene.layout.bounds;
    let width = (b.width() / cell).ceil() as usize;
    let height = (b.height() / cell).ceil() as usize;
    let frame = WorldFrame {
        min: b.min,
        max_y: b.max.y,
        width,
        height,
        cell,
    };
    let mut grid = ClassGrid::new(width, height);
    paint_scene(&mut grid, &frame, scene, pedestrians);
    paint_rect(&mut grid, &frame, &footprint_rect(pose, &scene.vehicle), EGO);
    // dots sit on top of everything so the path stays visible
    let dot = 1.5 * cell;
    for &c in trajectory {
        if let Some((r0, r1, c0, c1)) = frame.window(c, dot) {
            for row in r0..=r1 {
                for col in c0..=c1 {
                    if frame.world_of(row, col).dist(c) <= dot {
                        grid.data[row * width + col] = TRAJECTORY;
                    }
                }
            }
        }
    }
    grid
}
