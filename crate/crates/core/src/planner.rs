//! Hybrid A* over (x, y, yaw, direction) with Reeds-Shepp analytic expansion.

use crate::error::{Error, Result};
use crate::geometry::{arc_move, normalize_angle, Point2, Pose2D};
use crate::reeds_shepp::{sample_path, shortest_path, Direction, RSPath, Steer};
use crate::vehicle::{footprint_rect, VehicleParams};
use crate::world::LotLayout;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    pub xy_resolution: f64,
    pub yaw_resolution: f64,
    pub steering_set: Vec<f64>,
    pub primitive_arc_length: f64,
    pub reverse_weight: f64,
    /// Metre-equivalent cost of each forward/reverse switch.
    pub switch_cost: f64,
    /// Per primitive, per radian of steering.
    pub steer_cost: f64,
    /// Per radian of steering change between consecutive primitives.
    pub steer_change_cost: f64,
    pub goal_pos_tol: f64,
    pub goal_yaw_tol: f64,
    /// Upper bound on the expansions between two analytic shots.
    pub analytic_period: usize,
    pub node_budget: usize,
    /// Margin around the body kept obstacle-free while searching, so the
    /// tracker has room for small deviations.
    pub clearance: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            xy_resolution: 0.5,
            yaw_resolution: 10f64.to_radians(),
            steering_set: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
            primitive_arc_length: 0.75,
            reverse_weight: 2.0,
            switch_cost: 3.0,
            steer_cost: 1.0,
            steer_change_cost: 1.5,
            goal_pos_tol: 0.2,
            goal_yaw_tol: 3f64.to_radians(),
            analytic_period: 10,
            node_budget: 200_000,
            clearance: 0.25,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.xy_resolution > 0.0 && self.yaw_resolution > 0.0) {
            return Err("planner resolutions must be positive".into());
        }
        if self.primitive_arc_length < std::f64::consts::SQRT_2 * self.xy_resolution {
            return Err("planner.primitive_arc_length must be at least sqrt(2) * xy_resolution".into());
        }
        if !(self.clearance >= 0.0) {
            return Err("planner.clearance must be non-negative".into());
        }
        if !self.steering_set.contains(&0.0) {
            return Err("planner.steering_set must contain 0".into());
        }
        let mut sorted = self.steering_set.clone();
        sorted.sort_by(f64::total_cmp);
        let symmetric = sorted
            .iter()
            .zip(sorted.iter().rev())
            .all(|(a, b)| (a + b).abs() < 1e-12);
        if !symmetric {
            return Err("planner.steering_set must be symmetric about 0".into());
        }
        if self.reverse_weight < 1.0 {
            return Err("planner.reverse_weight must be >= 1".into());
        }
        if self.analytic_period == 0 || self.node_budget == 0 {
            return Err("planner.analytic_period and node_budget must be positive".into());
        }
        Ok(())
    }

    pub fn max_steer(&self) -> f64 {
        self.steering_set.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    /// Spacing of swept-footprint checks.
    pub fn check_step(&self) -> f64 {
        0.5 * self.xy_resolution
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub pose: Pose2D,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    pub points: Vec<PathPoint>,
    /// Indices whose direction differs from the previous point's.
    pub switch_indices: Vec<usize>,
    /// Penalized cost in metre-equivalents.
    pub cost: f64,
}

impl PlannedPath {
    fn from_points(points: Vec<PathPoint>, cost: f64) -> Self {
        let switch_indices = (1..points.len())
            .filter(|&i| points[i].direction != points[i - 1].direction)
            .collect();
        Self {
            points,
            switch_indices,
            cost,
        }
    }

    /// Unpenalized arc length.
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].pose.dist(&w[1].pose))
            .sum()
    }
}

/// 8-connected obstacle-aware distance-to-goal grid.
#[derive(Debug, Clone)]
pub struct HolonomicField {
    pub origin: Point2,
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub blocked: Vec<bool>,
}

impl HolonomicField {
    pub fn cell_of(&self, p: Point2) -> Option<(usize, usize)> {
        let ix = ((p.x - self.origin.x) / self.resolution).floor();
        let iy = ((p.y - self.origin.y) / self.resolution).floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.nx as f64 || iy >= self.ny as f64 {
            return None;
        }
        Some((ix as usize, iy as usize))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2 {
        Point2::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Field value at `p`; blocked cells borrow their best free neighbour.
    pub fn lookup(&self, p: Point2) -> f64 {
        let Some((ix, iy)) = self.cell_of(p) else {
            return f64::INFINITY;
        };
        let idx = iy * self.nx + ix;
        if !self.blocked[idx] {
            return self.values[idx];
        }
        let mut best = f64::INFINITY;
        for (jx, jy, w) in self.neighbours(ix, iy) {
            let j = jy * self.nx + jx;
            if !self.blocked[j] {
                best = best.min(self.values[j] + w);
            }
        }
        best
    }

    pub fn neighbours(&self, ix: usize, iy: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        const STEPS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        STEPS.iter().filter_map(move |&(dx, dy)| {
            let jx = ix as i64 + dx;
            let jy = iy as i64 + dy;
            if jx < 0 || jy < 0 || jx >= self.nx as i64 || jy >= self.ny as i64 {
                return None;
            }
            let w = if dx != 0 && dy != 0 {
                std::f64::consts::SQRT_2 * self.resolution
            } else {
                self.resolution
            };
            Some((jx as usize, jy as usize, w))
        })
    }
}

#[derive(PartialEq)]
struct QueueItem {
    f: f64,
    seq: u64,
    idx: usize,
}

impl Eq for QueueItem {}

impl Ord for QueueItem {
    // min-heap on f, earlier insertion first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra distances from `goal` over the cells of the layout bounds.
///
/// Cells whose centers lie within `inflation` of an obstacle or the bounds
/// are blocked; unreachable cells hold `+inf`.
pub fn holonomic_distance_field(layout: &LotLayout, goal: Point2, resolution: f64, inflation: f64) -> HolonomicField {
    let b = layout.bounds;
    let nx = (b.width() / resolution).ceil() as usize;
    let ny = (b.height() / resolution).ceil() as usize;
    let mut field = HolonomicField {
        origin: b.min,
        resolution,
        nx,
        ny,
        values: vec![f64::INFINITY; nx * ny],
        blocked: vec![false; nx * ny],
    };
    for iy in 0..ny {
        for ix in 0..nx {
            let c = field.cell_center(ix, iy);
            let edge = (c.x - b.min.x)
                .min(b.max.x - c.x)
                .min(c.y - b.min.y)
                .min(b.max.y - c.y);
            field.blocked[iy * nx + ix] =
                edge < inflation || layout.static_obstacles.iter().any(|o| o.distance_to(c) < inflation);
        }
    }
    let Some((gx, gy)) = field.cell_of(goal) else {
        return field;
    };
    let start = gy * nx + gx;
    field.values[start] = 0.0;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(QueueItem { f: 0.0, seq, idx: start });
    while let Some(QueueItem { f, idx, .. }) = heap.pop() {
        if f > field.values[idx] {
            continue;
        }
        let (ix, iy) = (idx % nx, idx / nx);
        let nbrs: Vec<_> = field.neighbours(ix, iy).collect();
        for (jx, jy, w) in nbrs {
            let j = jy * nx + jx;
            if field.blocked[j] {
                continue;
            }
            let nf = f + w;
            if nf < field.values[j] {
                field.values[j] = nf;
                seq += 1;
                heap.push(QueueItem { f: nf, seq, idx: j });
            }
        }
    }
    field
}

#[derive(Debug, Clone, Copy)]
pub struct SearchNode {
    pub pose: Pose2D,
    pub direction: Direction,
    pub steer: f64,
    pub g: f64,
    pub parent: Option<usize>,
}

/// Successors of `node` by every (steer, direction) primitive whose swept footprint is free.
pub fn expand_node(
    node: &SearchNode,
    layout: &LotLayout,
    vehicle: &VehicleParams,
    params: &PlannerParams,
) -> Vec<SearchNode> {
    let arc = params.primitive_arc_length;
    let n_checks = (arc / params.check_step()).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(2 * params.steering_set.len());
    for &steer in &params.steering_set {
        let curvature = steer.tan() / vehicle.wheelbase;
        for direction in [Direction::Fwd, Direction::Rev] {
            let signed = direction.sign() * arc;
            let free = (1..=n_checks).all(|k| {
                let p = arc_move(&node.pose, curvature, signed * k as f64 / n_checks as f64);
                !blocked(layout, &p, vehicle, params)
            });
            if !free {
                continue;
            }
            out.push(SearchNode {
                pose: arc_move(&node.pose, curvature, signed),
                direction,
                steer,
                g: node.g + primitive_cost(node, direction, steer, params),
                parent: None,
            });
        }
    }
    out
}

fn primitive_cost(parent: &SearchNode, direction: Direction, steer: f64, params: &PlannerParams) -> f64 {
    let mut c = params.primitive_arc_length
        * match direction {
            Direction::Fwd => 1.0,
            Direction::Rev => params.reverse_weight,
        };
    if parent.parent.is_some() && direction != parent.direction {
        c += params.switch_cost;
    }
    c + params.steer_cost * steer.abs() + params.steer_change_cost * (steer - parent.steer).abs()
}

/// Penalized cost of an RS tail appended to `node`, with the same cost model as the primitives.
fn tail_cost(node: &SearchNode, path: &RSPath, params: &PlannerParams, has_parent: bool) -> f64 {
    let max_steer = params.max_steer();
    let mut cost = 0.0;
    let mut dir = node.direction;
    let mut steer = node.steer;
    let mut first = !has_parent;
    for seg in &path.segments {
        let seg_steer = seg.steer.sign() * max_steer;
        cost += seg.length
            * match seg.direction {
                Direction::Fwd => 1.0,
                Direction::Rev => params.reverse_weight,
            };
        if seg.direction != dir && !first {
            cost += params.switch_cost;
        }
        first = false;
        cost += params.steer_cost * seg_steer.abs() * seg.length / params.primitive_arc_length;
        cost += params.steer_change_cost * (seg_steer - steer).abs();
        dir = seg.direction;
        steer = seg_steer;
    }
    cost
}

pub fn rs_turning_radius(vehicle: &VehicleParams, params: &PlannerParams) -> f64 {
    vehicle.wheelbase / params.max_steer().tan()
}

/// Collision-free Reeds-Shepp connection from `node` to `goal`, if one exists.
///
/// Returns the dense samples after the node pose together with the RS path.
pub fn analytic_expansion(
    node: &SearchNode,
    goal: &Pose2D,
    layout: &LotLayout,
    vehicle: &VehicleParams,
    params: &PlannerParams,
) -> Option<(Vec<PathPoint>, RSPath)> {
    let path = shortest_path(&node.pose, goal, rs_turning_radius(vehicle, params));
    let samples = sample_path(&path, &node.pose, params.check_step());
    let free = samples
        .iter()
        .skip(1)
        .all(|(p, _)| !blocked(layout, p, vehicle, params));
    if !free {
        return None;
    }
    let tail = samples
        .into_iter()
        .skip(1)
        .map(|(pose, direction)| PathPoint { pose, direction })
        .collect();
    Some((tail, path))
}

type NodeKey = (i64, i64, i64, bool);

fn key_of(pose: &Pose2D, direction: Direction, params: &PlannerParams) -> NodeKey {
    (
        (pose.x / params.xy_resolution).floor() as i64,
        (pose.y / params.xy_resolution).floor() as i64,
        (normalize_angle(pose.yaw) / params.yaw_resolution).round() as i64,
        direction == Direction::Rev,
    )
}

fn within_goal(pose: &Pose2D, goal: &Pose2D, params: &PlannerParams) -> bool {
    pose.dist(goal) <= params.goal_pos_tol && pose.yaw_diff(goal) <= params.goal_yaw_tol
}

/// Grid octile distances overshoot the Euclidean metric by at most this factor.
const OCTILE_EXCESS: f64 = 1.082_392_200_292_394;

/// Heuristic combining the Reeds-Shepp length with the scaled holonomic field.
pub struct Heuristic<'a> {
    pub field: &'a HolonomicField,
    pub goal: Pose2D,
    pub radius: f64,
}

impl Heuristic<'_> {
    pub fn holonomic(&self, pose: &Pose2D) -> f64 {
        let v = self.field.lookup(pose.position());
        if v.is_infinite() {
            return v;
        }
        (v / OCTILE_EXCESS - std::f64::consts::SQRT_2 * self.field.resolution).max(0.0)
    }

    pub fn value(&self, pose: &Pose2D) -> f64 {
        let rs = shortest_path(pose, &self.goal, self.radius).total_length;
        rs.max(self.holonomic(pose))
    }
}

/// The body grown by the search clearance hits something.
fn blocked(layout: &LotLayout, pose: &Pose2D, vehicle: &VehicleParams, params: &PlannerParams) -> bool {
    layout.static_collision(&footprint_rect(pose, vehicle).inflated(params.clearance))
}

/// Plans a collision-free maneuver from `start` to `goal` against static obstacles.
pub fn plan(
    start: &Pose2D,
    goal: &Pose2D,
    layout: &LotLayout,
    vehicle: &VehicleParams,
    params: &PlannerParams,
) -> Result<PlannedPath> {
    if layout.static_collision(&footprint_rect(start, vehicle)) {
        return Err(Error::InvalidStart);
    }
    if layout.static_collision(&footprint_rect(goal, vehicle)) {
        return Err(Error::InvalidGoal);
    }
    let first_point = |direction| PathPoint {
        pose: *start,
        direction,
    };
    if within_goal(start, goal, params) {
        return Ok(PlannedPath::from_points(vec![first_point(Direction::Fwd)], 0.0));
    }

    let field = holonomic_distance_field(layout, goal.position(), params.xy_resolution, 0.5 * vehicle.body_width);
    let heuristic = Heuristic {
        field: &field,
        goal: *goal,
        radius: rs_turning_radius(vehicle, params),
    };

    let mut nodes = vec![SearchNode {
        pose: *start,
        direction: Direction::Fwd,
        steer: 0.0,
        g: 0.0,
        parent: None,
    }];
    let mut best_g: HashMap<NodeKey, f64> = HashMap::new();
    let mut closed: HashMap<NodeKey, ()> = HashMap::new();
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    let h0 = heuristic.value(start);
    open.push(QueueItem { f: h0, seq, idx: 0 });

    let mut expanded = 0usize;
    let mut since_shot = usize::MAX;
    while let Some(QueueItem { idx, .. }) = open.pop() {
        let node = nodes[idx];
        let key = key_of(&node.pose, node.direction, params);
        if closed.insert(key, ()).is_some() {
            continue;
        }
        if within_goal(&node.pose, goal, params) {
            return Ok(reconstruct(&nodes, idx, Vec::new(), node.g, vehicle, params));
        }

        let h = heuristic.value(&node.pose);
        let period = ((h / (4.0 * params.primitive_arc_length)).ceil() as usize).clamp(1, params.analytic_period);
        if since_shot >= period {
            since_shot = 0;
            if let Some((tail, rs)) = analytic_expansion(&node, goal, layout, vehicle, params) {
                let cost = node.g + tail_cost(&node, &rs, params, node.parent.is_some());
                return Ok(reconstruct(&nodes, idx, tail, cost, vehicle, params));
            }
        }
        since_shot = since_shot.saturating_add(1);

        expanded += 1;
        if expanded > params.node_budget {
            break;
        }
        for mut succ in expand_node(&node, layout, vehicle, params) {
            let skey = key_of(&succ.pose, succ.direction, params);
            if closed.contains_key(&skey) {
                continue;
            }
            if best_g.get(&skey).is_some_and(|&g| g <= succ.g) {
                continue;
            }
            let hs = heuristic.value(&succ.pose);
            if hs.is_infinite() {
                continue;
            }
            best_g.insert(skey, succ.g);
            succ.parent = Some(idx);
            nodes.push(succ);
            seq += 1;
            open.push(QueueItem {
                f: succ.g + hs,
                seq,
                idx: nodes.len() - 1,
            });
        }
    }
    Err(Error::NoPathFound { expanded })
}

fn reconstruct(
    nodes: &[SearchNode],
    last: usize,
    tail: Vec<PathPoint>,
    cost: f64,
    vehicle: &VehicleParams,
    params: &PlannerParams,
) -> PlannedPath {
    let mut chain = vec![last];
    while let Some(p) = nodes[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    chain.reverse();

    let n_checks = (params.primitive_arc_length / params.check_step()).ceil().max(1.0) as usize;
    let first_dir = chain
        .get(1)
        .map(|&i| nodes[i].direction)
        .or_else(|| tail.first().map(|p| p.direction))
        .unwrap_or(Direction::Fwd);
    let mut points = vec![PathPoint {
        pose: nodes[chain[0]].pose,
        direction: first_dir,
    }];
    for w in chain.windows(2) {
        let (parent, child) = (&nodes[w[0]], &nodes[w[1]]);
        let curvature = child.steer.tan() / vehicle.wheelbase;
        let signed = child.direction.sign() * params.primitive_arc_length;
        for k in 1..=n_checks {
            let pose = if k == n_checks {
                child.pose
            } else {
                arc_move(&parent.pose, curvature, signed * k as f64 / n_checks as f64)
            };
            points.push(PathPoint {
                pose,
                direction: child.direction,
            });
        }
    }
    points.extend(tail);
    PlannedPath::from_points(points, cost)
}

/// Steering letter for a planner steering angle.
pub fn steer_letter(steer: f64) -> Steer {
    match steer.partial_cmp(&0.0) {
        Some(Ordering::Greater) => Steer::Left,
        Some(Ordering::Less) => Steer::Right,
        _ => Steer::Straight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, OrientedRect};
    use crate::world::LayoutKind;

    fn empty_world(half: f64) -> LotLayout {
        LotLayout {
            kind: LayoutKind::ReverseIn,
            slots: Vec::new(),
            static_obstacles: Vec::new(),
            bounds: Aabb::new(Point2::new(-half, -half), Point2::new(half, half)),
            aisle_entry: Pose2D::default(),
        }
    }

    fn root(pose: Pose2D) -> SearchNode {
        SearchNode {
            pose,
            direction: Direction::Fwd,
            steer: 0.0,
            g: 0.0,
            parent: None,
        }
    }

    #[test]
    fn start_at_goal() {
        let w = empty_world(20.0);
        let p = Pose2D::new(0.0, 0.0, 0.0);
        let g = Pose2D::new(0.1, 0.0, 0.01);
        let path = plan(&p, &g, &w, &VehicleParams::default(), &PlannerParams::default()).unwrap();
        assert_eq!(path.points.len(), 1);
        assert_eq!(path.cost, 0.0);
    }

    #[test]
    fn straight_ahead_in_empty_world() {
        let w = empty_world(20.0);
        let params = PlannerParams::default();
        let path = plan(
            &Pose2D::new(0.0, 0.0, 0.0),
            &Pose2D::new(10.0, 0.0, 0.0),
            &w,
            &VehicleParams::default(),
            &params,
        )
        .unwrap();
        let len = path.length();
        assert!((10.0 - 1e-9..=10.0 + params.primitive_arc_length).contains(&len), "{len}");
    }

    #[test]
    fn walled_goal_is_unreachable() {
        let mut w = empty_world(20.0);
        for (cx, cy, yaw) in [(8.0, 0.0, 0.0), (-8.0, 0.0, 0.0), (0.0, 8.0, std::f64::consts::FRAC_PI_2), (0.0, -8.0, std::f64::consts::FRAC_PI_2)] {
            w.static_obstacles.push(OrientedRect::new(Point2::new(cx, cy), yaw + std::f64::consts::FRAC_PI_2, 17.0, 1.0));
        }
        let mut params = PlannerParams::default();
        params.node_budget = 20_000;
        let res = plan(
            &Pose2D::new(-15.0, -15.0, 0.0),
            &Pose2D::new(0.0, 0.0, 0.0),
            &w,
            &VehicleParams::default(),
            &params,
        );
        assert!(matches!(res, Err(Error::NoPathFound { .. })), "{res:?}");
    }

    #[test]
    fn successor_costs() {
        let w = empty_world(20.0);
        let v = VehicleParams::default();
        let mut params = PlannerParams::default();
        params.steering_set = vec![-0.6, 0.0, 0.6];
        let succ = expand_node(&root(Pose2D::default()), &w, &v, &params);
        assert!(succ.len() <= 6);
        let straight = succ
            .iter()
            .find(|s| s.steer == 0.0 && s.direction == Direction::Fwd)
            .unwrap();
        assert!((straight.pose.x - 0.75).abs() < 1e-12 && straight.pose.y.abs() < 1e-12);
        assert!((straight.g - 0.75).abs() < 1e-12);
        let rev = succ
            .iter()
            .find(|s| s.steer == 0.0 && s.direction == Direction::Rev)
            .unwrap();
        assert!((rev.g - 1.5).abs() < 1e-12);
    }

    #[test]
    fn reverse_cost_with_weight_two() {
        let w = empty_world(20.0);
        let v = VehicleParams::default();
        let params = PlannerParams {
            primitive_arc_length: 0.7,
            ..Default::default()
        };
        let parent = SearchNode {
            direction: Direction::Rev,
            ..root(Pose2D::default())
        };
        let succ = expand_node(&parent, &w, &v, &params);
        let rev = succ
            .iter()
            .find(|s| s.steer == 0.0 && s.direction == Direction::Rev)
            .unwrap();
        assert!((rev.g - 1.4).abs() < 1e-12);
    }

    #[test]
    fn switch_penalty_applies_after_first_move() {
        let params = PlannerParams::default();
        let parent = SearchNode {
            parent: Some(0),
            ..root(Pose2D::default())
        };
        let c = primitive_cost(&parent, Direction::Rev, 0.0, &params);
        assert!((c - (0.75 * 2.0 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn field_basics() {
        let w = empty_world(10.0);
        let f = holonomic_distance_field(&w, Point2::new(0.25, 0.25), 0.5, 1.0);
        let (gx, gy) = f.cell_of(Point2::new(0.25, 0.25)).unwrap();
        assert_eq!(f.get(gx, gy), 0.0);
        for k in 1..8 {
            assert!((f.get(gx + k, gy) - k as f64 * 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_shot() {
        let w = empty_world(20.0);
        let v = VehicleParams::default();
        let params = PlannerParams::default();
        let goal = Pose2D::new(2.0, 0.0, 0.0);
        let (tail, rs) = analytic_expansion(&root(Pose2D::default()), &goal, &w, &v, &params).unwrap();
        assert!((rs.total_length - 2.0).abs() < 1e-12);
        let last = tail.last().unwrap().pose;
        assert!(last.dist(&goal) < 1e-6);

        let mut walled = empty_world(20.0);
        walled
            .static_obstacles
            .push(OrientedRect::new(Point2::new(4.0, 0.0), 0.0, 0.5, 6.0));
        let far = Pose2D::new(8.0, 0.0, 0.0);
        assert!(analytic_expansion(&root(Pose2D::default()), &far, &walled, &v, &params).is_none());
    }
}
