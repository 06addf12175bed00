//! Closed-loop execution of a single scenario.

use crate::dataset::FrameRecord;
use crate::geometry::{OrientedRect, Pose2D};
use crate::mpc::{build_reference, control_step, MpcParams, RefTrajectory, SpeedProfile};
use crate::planner::{plan, PlannedPath, PlannerParams};
use crate::reeds_shepp::Direction;
use crate::vehicle::{accel_to_pedals, footprint_rect, step_kinematics, Gear, VehicleParams, VehicleState};
use crate::world::{
    check_collision, yaw_error, CollisionKind, LayoutParams, LotLayout, PedestrianAgent, ScenarioConfig,
    ScenarioInstance,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub control_hz: u32,
    pub log_hz: u32,
    pub timeout_s: f64,
    pub success_pos_tol: f64,
    pub success_yaw_tol_deg: f64,
    pub stop_speed: f64,
    pub dwell_s: f64,
    pub ped_lookahead_s: f64,
    pub ped_inflation: f64,
    pub blocked_replan_s: f64,
    /// Timing limits applied to planned paths.
    pub profile: SpeedProfile,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            control_hz: 20,
            log_hz: 10,
            timeout_s: 60.0,
            success_pos_tol: 0.5,
            success_yaw_tol_deg: 5.0,
            stop_speed: 0.05,
            dwell_s: 1.0,
            ped_lookahead_s: 2.0,
            ped_inflation: 0.3,
            blocked_replan_s: 5.0,
            profile: SpeedProfile::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.control_hz == 0 || self.log_hz == 0 || !self.control_hz.is_multiple_of(self.log_hz) {
            return Err("engine.control_hz must be a positive multiple of engine.log_hz".into());
        }
        if !(self.timeout_s > 0.0) {
            return Err("engine.timeout_s must be positive".into());
        }
        if !(self.success_pos_tol > 0.0 && self.success_yaw_tol_deg > 0.0 && self.stop_speed > 0.0) {
            return Err("engine tolerances must be positive".into());
        }
        if self.dwell_s < 0.0 || self.ped_lookahead_s < 0.0 || self.ped_inflation < 0.0 || self.blocked_replan_s < 0.0 {
            return Err("engine durations and margins must be non-negative".into());
        }
        let p = &self.profile;
        if !(p.v_fwd_max > 0.0 && p.v_rev_max > 0.0 && p.accel > 0.0) {
            return Err("engine.profile limits must be positive".into());
        }
        Ok(())
    }

    pub fn control_dt(&self) -> f64 {
        1.0 / self.control_hz as f64
    }

    pub fn yaw_tol(&self) -> f64 {
        self.success_yaw_tol_deg.to_radians()
    }
}

/// Everything a closed-loop run needs besides the scenario itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub vehicle: VehicleParams,
    pub layout: LayoutParams,
    pub planner: PlannerParams,
    pub mpc: MpcParams,
    pub engine: EngineConfig,
}

impl SimParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.vehicle.validate()?;
        self.layout.validate()?;
        self.planner.validate()?;
        self.mpc.validate()?;
        self.engine.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    TargetSuccess,
    TargetFailure,
    NonTarget,
    Collision,
    Timeout,
    PlanFailure,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::TargetSuccess,
        Outcome::TargetFailure,
        Outcome::NonTarget,
        Outcome::Collision,
        Outcome::Timeout,
        Outcome::PlanFailure,
    ];
}

/// Why the loop stopped; the outcome is derived from this plus the final pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Settled,
    Collision(CollisionKind),
    Timeout,
    PlanFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub config: ScenarioConfig,
    pub outcome: Outcome,
    pub termination: Termination,
    pub duration_s: f64,
    pub final_state: VehicleState,
    pub final_pos_err: f64,
    pub final_yaw_err: f64,
    pub replanned: bool,
    pub frames: Vec<FrameRecord>,
}

impl EpisodeRecord {
    pub fn hold_frames(&self) -> usize {
        self.frames.iter().filter(|f| f.hold).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    Proceed,
    Hold,
}

/// Footprints swept along the next `ped_lookahead_s` of the reference,
/// current pose first, each grown by `inflate`.
pub fn swept_corridor(
    state: &VehicleState,
    reference: &RefTrajectory,
    ref_index: usize,
    cfg: &EngineConfig,
    vehicle: &VehicleParams,
    inflate: f64,
) -> Vec<OrientedRect> {
    let steps = (cfg.ped_lookahead_s / reference.dt).round() as usize;
    let last = reference.samples.len().saturating_sub(1);
    let from = ref_index.min(last);
    let to = (from + steps).min(last);
    std::iter::once(state.pose)
        .chain(reference.samples[from..=to].iter().map(|s| s.pose))
        .map(|pose| footprint_rect(&pose, vehicle).inflated(inflate))
        .collect()
}

/// Holds when a pedestrian disc touches the corridor inflated by
/// `ped_inflation`.
pub fn safety_gate(
    state: &VehicleState,
    agents: &[PedestrianAgent],
    reference: &RefTrajectory,
    ref_index: usize,
    cfg: &EngineConfig,
    vehicle: &VehicleParams,
) -> GateDecision {
    if agents.is_empty() {
        return GateDecision::Proceed;
    }
    let corridor = swept_corridor(state, reference, ref_index, cfg, vehicle, cfg.ped_inflation);
    let blocked = corridor
        .iter()
        .any(|rect| agents.iter().any(|a| rect.intersects_disc(a.position, a.radius)));
    if blocked {
        GateDecision::Hold
    } else {
        GateDecision::Proceed
    }
}

/// Classifies a finished run and returns `(outcome, pos_err, yaw_err)`.
///
/// Collision beats timeout, which beats the slot-based categories.
pub fn classify_outcome(
    final_state: &VehicleState,
    termination: Termination,
    instance: &ScenarioInstance,
    cfg: &EngineConfig,
    vehicle: &VehicleParams,
) -> (Outcome, f64, f64) {
    let center = vehicle.body_center(&final_state.pose);
    let pos_err = center.dist(vehicle.body_center(&instance.goal));
    let yaw_err = yaw_error(&final_state.pose, &instance.goal);
    let outcome = match termination {
        Termination::Collision(_) => Outcome::Collision,
        Termination::Timeout => Outcome::Timeout,
        Termination::PlanFailure => Outcome::PlanFailure,
        Termination::Settled => match instance.layout.slot_containing(center) {
            Some(s) if s.id == instance.config.target_slot => {
                if pos_err <= cfg.success_pos_tol && yaw_err <= cfg.yaw_tol() {
                    Outcome::TargetSuccess
                } else {
                    Outcome::TargetFailure
                }
            }
            Some(_) => Outcome::NonTarget,
            None => Outcome::Timeout,
        },
    };
    (outcome, pos_err, yaw_err)
}

/// Static stand-in for a blocking pedestrian during the replan.
fn pedestrian_obstacle(agent: &PedestrianAgent, grow: f64) -> OrientedRect {
    let side = 2.0 * (agent.radius + grow);
    OrientedRect::new(agent.position, 0.0, side, side)
}

fn replan_around(
    pose: &Pose2D,
    goal: &Pose2D,
    layout: &LotLayout,
    agents: &[PedestrianAgent],
    params: &SimParams,
) -> Option<PlannedPath> {
    for grow in [params.engine.ped_inflation, 0.0] {
        let mut blocked = layout.clone();
        blocked
            .static_obstacles
            .extend(agents.iter().map(|a| pedestrian_obstacle(a, grow)));
        if let Ok(path) = plan(pose, goal, &blocked, &params.vehicle, &params.planner) {
            return Some(path);
        }
    }
    None
}

/// Index of the reference sample nearest to `pose`, searched forward from
/// `from` and never past the end of the current direction segment.
fn progress_index(reference: &RefTrajectory, from: usize, pose: &Pose2D, window: usize) -> usize {
    let (_, end) = reference.segment_range(from);
    let to = (from + window).min(end - 1);
    let p = pose.position();
    (from..=to)
        .min_by(|&a, &b| {
            let da = reference.samples[a].pose.position().dist(p);
            let db = reference.samples[b].pose.position().dist(p);
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .unwrap_or(from)
}

/// Distance below which a stopped vehicle counts as having finished a segment.
const SEGMENT_END_TOL: f64 = 0.3;

fn reached_segment_end(reference: &RefTrajectory, ref_index: usize, pose: &Pose2D) -> bool {
    let (_, end) = reference.segment_range(ref_index);
    ref_index + 1 == end || reference.samples[end - 1].pose.position().dist(pose.position()) <= SEGMENT_END_TOL
}

fn gear_of(direction: Direction) -> Gear {
    match direction {
        Direction::Fwd => Gear::Forward,
        Direction::Rev => Gear::Reverse,
    }
}

struct Logger<'a> {
    frames: Vec<FrameRecord>,
    target: usize,
    log_hz: u32,
    vehicle: &'a VehicleParams,
}

impl Logger<'_> {
    fn log(
        &mut self,
        state: &VehicleState,
        command: (f64, f64),
        hold: bool,
        agents: &[PedestrianAgent],
    ) {
        let index = self.frames.len();
        let pedals = accel_to_pedals(command.0, command.1, state.gear, self.vehicle);
        let frame = FrameRecord {
            t: index as f64 / self.log_hz as f64,
            x: state.pose.x,
            y: state.pose.y,
            yaw: state.pose.yaw,
            speed: state.v,
            accel: command.0,
            steer: command.1,
            throttle: pedals.throttle,
            brake: pedals.brake,
            steer_norm: pedals.steer_norm,
            reverse: pedals.reverse,
            gear: state.gear,
            hold,
            pedestrians: agents.iter().map(|a| [a.position.x, a.position.y]).collect(),
            target_slot_id: self.target,
            bev_file: FrameRecord::bev_name(index),
        };
        self.frames.push(frame);
    }
}

/// Plans, then tracks the plan at the control rate until the vehicle settles,
/// collides or runs out of time. Deterministic for a given instance.
pub fn run_episode(instance: &ScenarioInstance, params: &SimParams) -> EpisodeRecord {
    let cfg = &params.engine;
    let vehicle = &params.vehicle;
    let dt = cfg.control_dt();
    let log_every = (cfg.control_hz / cfg.log_hz) as u64;
    let max_ticks = (cfg.timeout_s * cfg.control_hz as f64).round() as u64;
    let dwell_ticks = (cfg.dwell_s * cfg.control_hz as f64).round() as u64;
    let replan_ticks = (cfg.blocked_replan_s * cfg.control_hz as f64).round() as u64;
    let margin = params.layout.pedestrian_yield_margin;

    let mut state = instance.start;
    let mut agents = instance.agents.clone();
    let mut logger = Logger {
        frames: Vec::new(),
        target: instance.config.target_slot,
        log_hz: cfg.log_hz,
        vehicle,
    };

    let finish = |state: VehicleState, termination: Termination, ticks: u64, replanned: bool, frames| {
        let (outcome, pos_err, yaw_err) = classify_outcome(&state, termination, instance, cfg, vehicle);
        EpisodeRecord {
            config: instance.config,
            outcome,
            termination,
            duration_s: ticks as f64 / cfg.control_hz as f64,
            final_state: state,
            final_pos_err: pos_err,
            final_yaw_err: yaw_err,
            replanned,
            frames,
        }
    };

    let path = match plan(&state.pose, &instance.goal, &instance.layout, vehicle, &params.planner) {
        Ok(p) => p,
        Err(_) => {
            logger.log(&state, (0.0, 0.0), false, &agents);
            return finish(state, Termination::PlanFailure, 0, false, logger.frames);
        }
    };
    let mut reference = build_reference(&path, vehicle, &params.mpc, &cfg.profile);
    let mut ref_index = 0usize;
    state.gear = gear_of(reference.samples[0].direction);
    // look-ahead window for progress tracking, in reference samples
    let window = ((1.0 / reference.dt).ceil() as usize).max(2);

    let mut command = (0.0, 0.0);
    let mut hold = false;
    let mut hold_ticks = 0u64;
    let mut settle_ticks = 0u64;
    let mut stall_ticks = 0u64;
    let mut replanned = false;
    logger.log(&state, command, hold, &agents);

    let mut tick = 0u64;
    let termination = loop {
        if tick >= max_ticks {
            break Termination::Timeout;
        }

        if !agents.is_empty() {
            let corridor = swept_corridor(&state, &reference, ref_index, cfg, vehicle, cfg.ped_inflation);
            let body = footprint_rect(&state.pose, vehicle);
            for a in agents.iter_mut() {
                a.step_giving_way(dt, &corridor, &body, margin);
            }
        }

        ref_index = progress_index(&reference, ref_index, &state.pose, window);
        let stopped = state.v.abs() < cfg.stop_speed;
        let mut at_segment_end = reached_segment_end(&reference, ref_index, &state.pose);
        if stopped && !at_segment_end {
            // the tracker parked itself short of the segment end
            stall_ticks += 1;
            if stall_ticks > dwell_ticks && ref_index + window >= reference.segment_range(ref_index).1 {
                at_segment_end = true;
            }
        } else {
            stall_ticks = 0;
        }
        let (_, seg_end) = reference.segment_range(ref_index);
        if stopped && at_segment_end && seg_end < reference.samples.len() {
            stall_ticks = 0;
            at_segment_end = false;
            ref_index = seg_end;
            state.gear = gear_of(reference.samples[ref_index].direction);
        }
        let final_stop = stopped && at_segment_end && seg_end == reference.samples.len();

        hold = safety_gate(&state, &agents, &reference, ref_index, cfg, vehicle) == GateDecision::Hold;
        if hold {
            hold_ticks += 1;
            let brake = vehicle.max_decel.min(state.v.abs() / dt);
            command = (-state.v.signum() * brake, state.steer);
            if hold_ticks > replan_ticks && !replanned {
                replanned = true;
                if let Some(p) = replan_around(&state.pose, &instance.goal, &instance.layout, &agents, params) {
                    reference = build_reference(&p, vehicle, &params.mpc, &cfg.profile);
                    ref_index = 0;
                    state.gear = gear_of(reference.samples[0].direction);
                    hold_ticks = 0;
                }
            }
        } else {
            hold_ticks = 0;
            command = match control_step(&state, &reference, ref_index, vehicle, &params.mpc) {
                Ok((a, d, _)) => (a, d),
                Err(_) => {
                    (-state.v.signum() * vehicle.max_decel.min(state.v.abs() / dt), state.steer)
                }
            };
        }

        state = step_kinematics(&state, command.0, command.1, dt, vehicle);
        tick += 1;

        let rect = footprint_rect(&state.pose, vehicle);
        let hit = check_collision(&rect, &instance.layout, &agents);
        if tick.is_multiple_of(log_every) {
            logger.log(&state, command, hold, &agents);
        }
        if hit != CollisionKind::Clear {
            break Termination::Collision(hit);
        }

        if final_stop && !hold && state.v.abs() < cfg.stop_speed {
            settle_ticks += 1;
            if settle_ticks >= dwell_ticks {
                break Termination::Settled;
            }
        } else {
            settle_ticks = 0;
        }
    };

    finish(state, termination, tick, replanned, logger.frames)
}
