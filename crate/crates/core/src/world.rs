//! Parking-lot layouts, pedestrians and the episode catalogue.

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Aabb, OrientedRect, Point2, Pose2D};
use crate::vehicle::{footprint_rect, VehicleParams, VehicleState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LayoutKind {
    ReverseIn,
    Parallel,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 2] = [LayoutKind::ReverseIn, LayoutKind::Parallel];

    pub fn slot_count(self) -> usize {
        match self {
            LayoutKind::ReverseIn => 16,
            LayoutKind::Parallel => 6,
        }
    }

    fn index(self) -> u64 {
        match self {
            LayoutKind::ReverseIn => 0,
            LayoutKind::Parallel => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::ReverseIn => "reverse_in",
            LayoutKind::Parallel => "parallel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotKind {
    Perpendicular,
    Parallel,
}

/// A marked parking slot. `center.yaw` points along the slot's long axis:
/// into the slot from the aisle for perpendicular slots, along the lane for
/// parallel ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub id: usize,
    pub center: Pose2D,
    pub width: f64,
    pub depth: f64,
    pub kind: SlotKind,
}

impl SlotSpec {
    pub fn rect(&self) -> OrientedRect {
        OrientedRect::new(self.center.position(), self.center.yaw, self.depth, self.width)
    }
}

/// Geometry knobs for both layouts and the scenario randomization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutParams {
    pub slot_width: f64,
    pub slot_depth: f64,
    pub slots_per_row: usize,
    pub aisle_width: f64,
    pub parallel_slot_length: f64,
    pub parallel_slot_width: f64,
    pub parallel_slot_count: usize,
    pub lane_width: f64,
    /// Paved strip beyond the curb and the far lane edge of the parallel lot.
    pub shoulder: f64,
    /// Drivable aisle/lane length beyond the outermost slots.
    pub end_margin: f64,
    pub parked_length: f64,
    pub parked_width: f64,
    /// Along-aisle distance from the slot center to the nominal start (rear axle).
    pub entry_lead: f64,
    pub start_long_range: f64,
    pub start_lat_range: f64,
    pub start_yaw_range_deg: f64,
    pub pedestrian_count: usize,
    pub pedestrian_speed: f64,
    pub pedestrian_radius: f64,
    /// Along-aisle spread of pedestrian crossing lines around the target slot.
    pub pedestrian_spread: f64,
    /// Clearance a pedestrian keeps from the ego's swept corridor.
    pub pedestrian_yield_margin: f64,
}

impl LayoutParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if 2 * self.slots_per_row != LayoutKind::ReverseIn.slot_count()
            || self.parallel_slot_count != LayoutKind::Parallel.slot_count()
        {
            return Err("layout slot counts are fixed by the episode catalogue (8 per row, 6 parallel)".into());
        }
        let lengths = [
            self.slot_width,
            self.slot_depth,
            self.aisle_width,
            self.parallel_slot_length,
            self.parallel_slot_width,
            self.lane_width,
            self.parked_length,
            self.parked_width,
            self.pedestrian_speed,
            self.pedestrian_radius,
        ];
        if lengths.iter().any(|v| !(*v > 0.0)) {
            return Err("layout dimensions and pedestrian speed/radius must be positive".into());
        }
        let margins = [
            self.shoulder,
            self.end_margin,
            self.start_long_range,
            self.start_lat_range,
            self.start_yaw_range_deg,
            self.pedestrian_spread,
            self.pedestrian_yield_margin,
        ];
        if margins.iter().any(|v| !(*v >= 0.0)) {
            return Err("layout margins and ranges must be non-negative".into());
        }
        Ok(())
    }
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            slot_width: 3.0,
            slot_depth: 6.0,
            slots_per_row: 8,
            aisle_width: 7.0,
            parallel_slot_length: 7.0,
            parallel_slot_width: 2.5,
            parallel_slot_count: 6,
            lane_width: 4.0,
            shoulder: 0.5,
            end_margin: 10.0,
            parked_length: 4.8,
            parked_width: 2.0,
            entry_lead: 4.0,
            start_long_range: 3.0,
            start_lat_range: 0.5,
            start_yaw_range_deg: 10.0,
            pedestrian_count: 2,
            pedestrian_speed: 1.2,
            pedestrian_radius: 0.3,
            pedestrian_spread: 6.0,
            pedestrian_yield_margin: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotLayout {
    pub kind: LayoutKind,
    pub slots: Vec<SlotSpec>,
    pub static_obstacles: Vec<OrientedRect>,
    pub bounds: Aabb,
    /// Start of the aisle (or lane) centerline, heading along the driving direction.
    pub aisle_entry: Pose2D,
}

impl LotLayout {
    pub fn slot(&self, id: usize) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.id == id)
    }

    /// The same lot with a parked vehicle in every slot except `target`.
    pub fn occupied_except(&self, target: usize, params: &LayoutParams) -> LotLayout {
        let mut lot = self.clone();
        lot.static_obstacles.extend(
            self.slots
                .iter()
                .filter(|s| s.id != target)
                .map(|s| OrientedRect::new(s.center.position(), s.center.yaw, params.parked_length, params.parked_width)),
        );
        lot
    }

    /// Whether `rect` hits a static obstacle or leaves the drivable bounds.
    pub fn static_collision(&self, rect: &OrientedRect) -> bool {
        self.out_of_bounds(rect) || self.hits_obstacle(rect)
    }

    pub fn out_of_bounds(&self, rect: &OrientedRect) -> bool {
        let bb = rect.aabb();
        bb.min.x < self.bounds.min.x
            || bb.min.y < self.bounds.min.y
            || bb.max.x > self.bounds.max.x
            || bb.max.y > self.bounds.max.y
    }

    pub fn hits_obstacle(&self, rect: &OrientedRect) -> bool {
        self.static_obstacles.iter().any(|o| o.intersects(rect))
    }

    /// Slot whose rectangle contains `p`.
    pub fn slot_containing(&self, p: Point2) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.rect().contains(p))
    }
}

pub fn build_layout(kind: LayoutKind) -> LotLayout {
    build_layout_with(kind, &LayoutParams::default())
}

pub fn build_layout_with(kind: LayoutKind, p: &LayoutParams) -> LotLayout {
    match kind {
        LayoutKind::ReverseIn => {
            let half_aisle = 0.5 * p.aisle_width;
            let row_len = p.slots_per_row as f64 * p.slot_width;
            let mut slots = Vec::with_capacity(2 * p.slots_per_row);
            for (row, (sign, yaw)) in [(1.0, FRAC_PI_2), (-1.0, -FRAC_PI_2)].into_iter().enumerate() {
                for i in 0..p.slots_per_row {
                    slots.push(SlotSpec {
                        id: row * p.slots_per_row + i,
                        center: Pose2D::new(
                            (i as f64 + 0.5) * p.slot_width,
                            sign * (half_aisle + 0.5 * p.slot_depth),
                            yaw,
                        ),
                        width: p.slot_width,
                        depth: p.slot_depth,
                        kind: SlotKind::Perpendicular,
                    });
                }
            }
            let ymax = half_aisle + p.slot_depth;
            LotLayout {
                kind,
                slots,
                static_obstacles: Vec::new(),
                bounds: Aabb::new(
                    Point2::new(-p.end_margin, -ymax),
                    Point2::new(row_len + p.end_margin, ymax),
                ),
                aisle_entry: Pose2D::new(-p.end_margin, 0.0, 0.0),
            }
        }
        LayoutKind::Parallel => {
            let row_len = p.parallel_slot_count as f64 * p.parallel_slot_length;
            let slots = (0..p.parallel_slot_count)
                .map(|i| SlotSpec {
                    id: i,
                    center: Pose2D::new(
                        (i as f64 + 0.5) * p.parallel_slot_length,
                        -0.5 * p.parallel_slot_width,
                        0.0,
                    ),
                    width: p.parallel_slot_width,
                    depth: p.parallel_slot_length,
                    kind: SlotKind::Parallel,
                })
                .collect();
            LotLayout {
                kind,
                slots,
                static_obstacles: Vec::new(),
                bounds: Aabb::new(
                    Point2::new(-p.end_margin, -p.parallel_slot_width - p.shoulder),
                    Point2::new(row_len + p.end_margin, p.lane_width + p.shoulder),
                ),
                aisle_entry: Pose2D::new(-p.end_margin, 0.5 * p.lane_width, 0.0),
            }
        }
    }
}

/// Rear-axle pose that centers the vehicle body in the slot.
///
/// Perpendicular slots are entered in reverse so the nose faces the aisle;
/// parallel slots keep the lane heading.
pub fn goal_pose(slot: &SlotSpec, vehicle: &VehicleParams) -> Pose2D {
    let yaw = match slot.kind {
        SlotKind::Perpendicular => slot.center.yaw + PI,
        SlotKind::Parallel => slot.center.yaw,
    };
    Pose2D::new(slot.center.x, slot.center.y, yaw).advance(-vehicle.center_offset())
}

/// Nominal start for `slot`: on the aisle centerline, `entry_lead` past the slot.
pub fn nominal_start(layout: &LotLayout, slot: &SlotSpec, params: &LayoutParams) -> Pose2D {
    let entry = layout.aisle_entry;
    let dir = entry.heading();
    let along = slot.center.position().sub(entry.position()).dot(dir);
    entry.advance(along + params.entry_lead)
}

/// Start pose at the given (longitudinal, lateral, heading) offsets from nominal.
pub fn perturbed_start(layout: &LotLayout, slot: &SlotSpec, params: &LayoutParams, offsets: (f64, f64, f64)) -> Pose2D {
    let nominal = nominal_start(layout, slot, params);
    let p = nominal.to_world(Point2::new(offsets.0, offsets.1));
    Pose2D::new(p.x, p.y, nominal.yaw + offsets.2)
}

/// Draws a collision-free randomized start in the aisle next to `slot`.
pub fn sample_start_pose<R: Rng + ?Sized>(
    layout: &LotLayout,
    slot: &SlotSpec,
    params: &LayoutParams,
    vehicle: &VehicleParams,
    rng: &mut R,
) -> Result<VehicleState> {
    let yaw_range = params.start_yaw_range_deg.to_radians();
    for _ in 0..100 {
        let offsets = (
            rng.gen_range(-params.start_long_range..=params.start_long_range),
            rng.gen_range(-params.start_lat_range..=params.start_lat_range),
            rng.gen_range(-yaw_range..=yaw_range),
        );
        let pose = perturbed_start(layout, slot, params, offsets);
        if !layout.static_collision(&footprint_rect(&pose, vehicle)) {
            return Ok(VehicleState::at_rest(pose));
        }
    }
    Err(Error::StartSamplingFailed { slot: slot.id })
}

/// A walker on a cyclic polyline. An empty or single-point route stands still.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianAgent {
    pub position: Point2,
    pub waypoints: Vec<Point2>,
    pub speed: f64,
    pub radius: f64,
    /// Index of the waypoint the current leg starts from.
    pub leg: usize,
    /// Distance already covered on the current leg.
    pub along: f64,
}

impl PedestrianAgent {
    pub fn stationary(position: Point2, radius: f64) -> Self {
        Self {
            position,
            waypoints: Vec::new(),
            speed: 1e-9,
            radius,
            leg: 0,
            along: 0.0,
        }
    }

    /// Agent placed `along` metres into leg `leg` of a cyclic route.
    pub fn on_route(waypoints: Vec<Point2>, speed: f64, radius: f64, leg: usize, along: f64) -> Self {
        let mut a = Self {
            position: waypoints.first().copied().unwrap_or_default(),
            waypoints,
            speed,
            radius,
            leg,
            along,
        };
        a.position = a.locate(a.leg, a.along);
        a
    }

    fn leg_ends(&self, leg: usize) -> (Point2, Point2) {
        let n = self.waypoints.len();
        (self.waypoints[leg % n], self.waypoints[(leg + 1) % n])
    }

    fn locate(&self, leg: usize, along: f64) -> Point2 {
        if self.waypoints.len() < 2 {
            return self.position;
        }
        let (a, b) = self.leg_ends(leg);
        let len = a.dist(b);
        if len <= 0.0 {
            return a;
        }
        a.add(b.sub(a).scale((along / len).min(1.0)))
    }

    /// Leg and offset after walking `dist` further.
    fn advanced(&self, dist: f64) -> (usize, f64) {
        let n = self.waypoints.len();
        let cycle: f64 = (0..n).map(|i| {
            let (a, b) = self.leg_ends(i);
            a.dist(b)
        }).sum();
        if n < 2 || cycle <= 0.0 {
            return (self.leg, self.along);
        }
        let (mut leg, mut along) = (self.leg % n, self.along + dist % cycle);
        loop {
            let (a, b) = self.leg_ends(leg);
            let len = a.dist(b);
            if along < len {
                return (leg, along);
            }
            along -= len;
            leg = (leg + 1) % n;
        }
    }

    /// Walks `speed * dt` along the route, wrapping at the end of the cycle.
    pub fn step(&mut self, dt: f64) {
        let (leg, along) = self.advanced(self.speed * dt);
        self.leg = leg;
        self.along = along;
        self.position = self.locate(leg, along);
    }

    /// Pedestrian courtesy towards a vehicle with footprint `body` that is
    /// about to sweep `corridor`.
    ///
    /// An agent outside the corridor waits rather than step within `margin`
    /// of it. An agent inside heads for the nearest way out: on along its
    /// route, back along it, or sideways (carrying the route along), never
    /// through the body.
    pub fn step_giving_way(&mut self, dt: f64, corridor: &[OrientedRect], body: &OrientedRect, margin: f64) {
        let gap = |p: Point2| corridor.iter().map(|r| r.signed_distance(p)).fold(f64::INFINITY, f64::min);
        let (leg, along) = self.advanced(self.speed * dt);
        let next = self.locate(leg, along);
        let now = gap(self.position);
        if now > self.radius {
            let then = gap(next);
            if then > self.radius + margin || then >= now {
                self.leg = leg;
                self.along = along;
                self.position = next;
            }
            return;
        }
        if self.waypoints.len() < 2 {
            return;
        }
        let (a, b) = self.leg_ends(self.leg);
        let dir = b.sub(a).scale(1.0 / a.dist(b).max(1e-12));
        let perp = Point2::new(-dir.y, dir.x);
        let leg_len = a.dist(b);
        let exit_steps = |d: Point2, reach: f64| {
            (1..=ESCAPE_PROBES).find_map(|k| {
                let dist = k as f64 * ESCAPE_PROBE_STEP;
                if dist > reach + ESCAPE_PROBE_STEP {
                    return Some(None);
                }
                let p = self.position.add(d.scale(dist.min(reach)));
                if body.signed_distance(p) <= self.radius {
                    Some(None)
                } else if gap(p) > self.radius + margin {
                    Some(Some(k))
                } else {
                    None
                }
            })
            .flatten()
        };
        // on along the leg, back along it, or sideways without limit
        let ways = [
            (dir, leg_len - self.along),
            (dir.scale(-1.0), self.along),
            (perp, f64::INFINITY),
            (perp.scale(-1.0), f64::INFINITY),
        ];
        let best = (0..ways.len())
            .filter_map(|i| exit_steps(ways[i].0, ways[i].1).map(|k| (k, i)))
            .min();
        match best.map(|(_, i)| i) {
            Some(0) | None => {
                self.leg = leg;
                self.along = along;
                self.position = next;
            }
            Some(1) => {
                let back = self.position.add(dir.scale(-(self.speed * dt).min(self.along)));
                if self.waypoints.len() == 2 {
                    self.leg = 1 - self.leg % 2;
                    self.along = (leg_len - self.along).max(0.0);
                    let (leg, along) = self.advanced(self.speed * dt);
                    self.leg = leg;
                    self.along = along;
                    self.position = self.locate(leg, along);
                } else {
                    self.along = (self.along - self.speed * dt).max(0.0);
                    self.position = back;
                }
            }
            Some(i) => {
                let shift = ways[i].0.scale(self.speed * dt);
                self.position = self.position.add(shift);
                for w in &mut self.waypoints {
                    *w = w.add(shift);
                }
            }
        }
    }
}

/// Look-ahead used by a pedestrian searching for the way out of a corridor.
const ESCAPE_PROBES: usize = 100;
const ESCAPE_PROBE_STEP: f64 = 0.1;

/// Spawns the pedestrian agents that cross the aisle around `slot`.
///
/// Agents never start on top of `avoid` (the ego start footprint).
pub fn spawn_pedestrians<R: Rng + ?Sized>(
    layout: &LotLayout,
    slot: &SlotSpec,
    params: &LayoutParams,
    avoid: &OrientedRect,
    rng: &mut R,
) -> Vec<PedestrianAgent> {
    let r = params.pedestrian_radius;
    let (y_lo, y_hi) = match layout.kind {
        LayoutKind::ReverseIn => (-0.5 * params.aisle_width + r, 0.5 * params.aisle_width - r),
        LayoutKind::Parallel => (r, params.lane_width - r),
    };
    let mut agents = Vec::with_capacity(params.pedestrian_count);
    for _ in 0..params.pedestrian_count {
        let mut chosen = None;
        for _ in 0..100 {
            let x = slot.center.x + rng.gen_range(-params.pedestrian_spread..=params.pedestrian_spread);
            let up = rng.gen_bool(0.5);
            let (a, b) = if up {
                (Point2::new(x, y_lo), Point2::new(x, y_hi))
            } else {
                (Point2::new(x, y_hi), Point2::new(x, y_lo))
            };
            let along = rng.gen_range(0.0..a.dist(b));
            let agent = PedestrianAgent::on_route(vec![a, b], params.pedestrian_speed, r, 0, along);
            if avoid.distance_to(agent.position) > r + params.pedestrian_yield_margin {
                chosen = Some(agent);
                break;
            }
        }
        agents.extend(chosen);
    }
    agents
}

pub fn step_pedestrians(agents: &mut [PedestrianAgent], dt: f64) {
    for a in agents {
        a.step(dt);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionKind {
    Clear,
    StaticHit,
    PedestrianHit,
}

pub fn check_collision(rect: &OrientedRect, layout: &LotLayout, agents: &[PedestrianAgent]) -> CollisionKind {
    if layout.static_collision(rect) {
        CollisionKind::StaticHit
    } else if agents.iter().any(|a| rect.intersects_disc(a.position, a.radius)) {
        CollisionKind::PedestrianHit
    } else {
        CollisionKind::Clear
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub layout: LayoutKind,
    pub target_slot: usize,
    pub pedestrians: bool,
    pub repetition: u32,
    pub seed: u64,
}

pub const GENERATION_TAG: u64 = 0x6765_6e65_7261_7465;
pub const EVALUATION_TAG: u64 = 0x6576_616c_7561_7465;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Episode seed: a SplitMix64 chain over
/// `(master_seed ^ tag, layout, slot, pedestrians, repetition)`.
pub fn episode_seed(master_seed: u64, tag: u64, layout: LayoutKind, slot: usize, pedestrians: bool, repetition: u32) -> u64 {
    [layout.index(), slot as u64, pedestrians as u64, repetition as u64]
        .into_iter()
        .fold(splitmix64(master_seed ^ tag), |h, field| splitmix64(h ^ field))
}

/// Full generation catalogue ordered by (layout, slot, pedestrians, repetition).
pub fn enumerate_episodes(master_seed: u64) -> Vec<ScenarioConfig> {
    let mut out = Vec::with_capacity(704);
    for layout in LayoutKind::ALL {
        for slot in 0..layout.slot_count() {
            for pedestrians in [false, true] {
                for repetition in 0..16 {
                    out.push(ScenarioConfig {
                        layout,
                        target_slot: slot,
                        pedestrians,
                        repetition,
                        seed: episode_seed(master_seed, GENERATION_TAG, layout, slot, pedestrians, repetition),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInstance {
    pub config: ScenarioConfig,
    /// Lot with every non-target slot occupied.
    pub layout: LotLayout,
    pub start: VehicleState,
    pub goal: Pose2D,
    pub agents: Vec<PedestrianAgent>,
}

impl ScenarioInstance {
    pub fn target(&self) -> &SlotSpec {
        self.layout
            .slot(self.config.target_slot)
            .expect("instance target slot exists")
    }
}

/// Materializes a config: occupies the other slots, samples the start and spawns agents.
pub fn build_instance(config: &ScenarioConfig, params: &LayoutParams, vehicle: &VehicleParams) -> Result<ScenarioInstance> {
    let empty = build_layout_with(config.layout, params);
    let slot = *empty.slot(config.target_slot).ok_or(Error::InvalidSlot {
        layout: config.layout,
        slot: config.target_slot,
    })?;
    let layout = empty.occupied_except(slot.id, params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = sample_start_pose(&layout, &slot, params, vehicle, &mut rng)?;
    let agents = if config.pedestrians {
        spawn_pedestrians(&layout, &slot, params, &footprint_rect(&start.pose, vehicle), &mut rng)
    } else {
        Vec::new()
    };
    Ok(ScenarioInstance {
        config: *config,
        goal: goal_pose(&slot, vehicle),
        layout,
        start,
        agents,
    })
}

/// Heading difference helper used by outcome classification.
pub fn yaw_error(a: &Pose2D, b: &Pose2D) -> f64 {
    normalize_angle(a.yaw - b.yaw).abs()
}
