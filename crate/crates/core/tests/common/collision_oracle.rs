//! Swept-footprint collision check written from scratch: body corners come
//! from the rear-axle pose and the vehicle dimensions, and overlap is a plain
//! separating-axis test over polygon edge normals.

use parkgen::geometry::{OrientedRect, Pose2D};
use parkgen::planner::PathPoint;
use parkgen::vehicle::VehicleParams;
use parkgen::world::LotLayout;

pub type Poly = Vec<[f64; 2]>;

pub fn body_corners(pose: &Pose2D, v: &VehicleParams) -> Poly {
    let (s, c) = pose.yaw.sin_cos();
    let back = -v.rear_overhang;
    let front = v.body_length - v.rear_overhang;
    let half = 0.5 * v.body_width;
    [(back, -half), (front, -half), (front, half), (back, half)]
        .iter()
        .map(|&(lx, ly)| [pose.x + c * lx - s * ly, pose.y + s * lx + c * ly])
        .collect()
}

pub fn rect_corners(r: &OrientedRect) -> Poly {
    let (s, c) = r.yaw.sin_cos();
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(a, b)| {
            let (lx, ly) = (a * r.half_length, b * r.half_width);
            [r.center.x + c * lx - s * ly, r.center.y + s * lx + c * ly]
        })
        .collect()
}

fn project(poly: &Poly, axis: [f64; 2]) -> (f64, f64) {
    poly.iter()
        .map(|p| p[0] * axis[0] + p[1] * axis[1])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)))
}

/// Convex polygons overlap with positive area.
pub fn polygons_overlap(a: &Poly, b: &Poly) -> bool {
    for poly in [a, b] {
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let axis = [q[1] - p[1], p[0] - q[0]];
            let (a0, a1) = project(a, axis);
            let (b0, b1) = project(b, axis);
            if a1 <= b0 || b1 <= a0 {
                return false;
            }
        }
    }
    true
}

pub fn pose_collides(pose: &Pose2D, layout: &LotLayout, v: &VehicleParams) -> bool {
    let body = body_corners(pose, v);
    let b = layout.bounds;
    let outside = body
        .iter()
        .any(|p| p[0] < b.min.x || p[0] > b.max.x || p[1] < b.min.y || p[1] > b.max.y);
    outside || layout.static_obstacles.iter().any(|o| polygons_overlap(&body, &rect_corners(o)))
}

/// Index of the first colliding pose when the path is swept at `step` metres.
pub fn first_collision(points: &[PathPoint], layout: &LotLayout, v: &VehicleParams, step: f64) -> Option<usize> {
    if points.first().is_some_and(|p| pose_collides(&p.pose, layout, v)) {
        return Some(0);
    }
    for (i, w) in points.windows(2).enumerate() {
        let (a, b) = (w[0].pose, w[1].pose);
        let n = ((a.dist(&b) / step).ceil() as usize).max(1);
        let mut dyaw = b.yaw - a.yaw;
        dyaw = (dyaw + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        for k in 1..=n {
            let t = k as f64 / n as f64;
            let p = Pose2D::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.yaw + t * dyaw);
            if pose_collides(&p, layout, v) {
                return Some(i + 1);
            }
        }
    }
    None
}
