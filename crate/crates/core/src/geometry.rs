//! Planar primitives shared by the vehicle model, the world and the planner.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    // rem_euclid can land exactly on -pi after the shift for tiny negative inputs
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// A planar pose. `yaw` is kept in `(-pi, pi]` by every constructor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Point2 {
        Point2::new(self.yaw.cos(), self.yaw.sin())
    }

    pub fn dist(&self, o: &Pose2D) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    /// Absolute wrapped heading difference.
    pub fn yaw_diff(&self, o: &Pose2D) -> f64 {
        normalize_angle(self.yaw - o.yaw).abs()
    }

    /// Expresses `world` in the frame of `self`.
    pub fn to_local(&self, world: Point2) -> Point2 {
        world.sub(self.position()).rotate(-self.yaw)
    }

    /// Maps a point given in the frame of `self` to the world frame.
    pub fn to_world(&self, local: Point2) -> Point2 {
        local.rotate(self.yaw).add(self.position())
    }

    /// Pose after moving `dist` along the heading.
    pub fn advance(&self, dist: f64) -> Pose2D {
        let (s, c) = self.yaw.sin_cos();
        Pose2D::new(self.x + dist * c, self.y + dist * s, self.yaw)
    }
}

/// Moves `signed_len` along a constant-curvature arc. A zero curvature is a straight line.
pub fn arc_move(pose: &Pose2D, curvature: f64, signed_len: f64) -> Pose2D {
    if curvature.abs() < 1e-12 {
        let (s, c) = pose.yaw.sin_cos();
        return Pose2D::new(pose.x + signed_len * c, pose.y + signed_len * s, pose.yaw);
    }
    let dtheta = curvature * signed_len;
    let yaw1 = pose.yaw + dtheta;
    Pose2D::new(
        pose.x + (yaw1.sin() - pose.yaw.sin()) / curvature,
        pose.y + (pose.yaw.cos() - yaw1.cos()) / curvature,
        yaw1,
    )
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Oriented rectangle stored by its center, heading and half extents.
///
/// `half_length` runs along the heading, `half_width` across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub center: Point2,
    pub yaw: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedRect {
    pub fn new(center: Point2, yaw: f64, length: f64, width: f64) -> Self {
        Self {
            center,
            yaw: normalize_angle(yaw),
            half_length: 0.5 * length,
            half_width: 0.5 * width,
        }
    }

    pub fn axes(&self) -> [Point2; 2] {
        let (s, c) = self.yaw.sin_cos();
        [Point2::new(c, s), Point2::new(-s, c)]
    }

    /// Corners in counter-clockwise order, starting at rear-right.
    pub fn corners(&self) -> [Point2; 4] {
        let [u, v] = self.axes();
        let (hl, hw) = (self.half_length, self.half_width);
        let c = self.center;
        [
            c.add(u.scale(-hl)).add(v.scale(-hw)),
            c.add(u.scale(hl)).add(v.scale(-hw)),
            c.add(u.scale(hl)).add(v.scale(hw)),
            c.add(u.scale(-hl)).add(v.scale(hw)),
        ]
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_length * self.half_width
    }

    pub fn bounding_radius(&self) -> f64 {
        self.half_length.hypot(self.half_width)
    }

    /// Point in the rectangle's own frame.
    pub fn local(&self, p: Point2) -> Point2 {
        p.sub(self.center).rotate(-self.yaw)
    }

    pub fn contains(&self, p: Point2) -> bool {
        let l = self.local(p);
        l.x.abs() <= self.half_length && l.y.abs() <= self.half_width
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        let l = self.local(p);
        let dx = (l.x.abs() - self.half_length).max(0.0);
        let dy = (l.y.abs() - self.half_width).max(0.0);
        dx.hypot(dy)
    }

    /// Like [`distance_to`](Self::distance_to), negative inside (depth below the
    /// nearest edge).
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let l = self.local(p);
        let ex = l.x.abs() - self.half_length;
        let ey = l.y.abs() - self.half_width;
        if ex > 0.0 || ey > 0.0 {
            ex.max(0.0).hypot(ey.max(0.0))
        } else {
            ex.max(ey)
        }
    }

    pub fn intersects_disc(&self, c: Point2, r: f64) -> bool {
        self.distance_to(c) <= r
    }

    /// Separating-axis overlap test. Touching boundaries count as overlap.
    pub fn intersects(&self, other: &OrientedRect) -> bool {
        let d = other.center.sub(self.center);
        let rr = self.bounding_radius() + other.bounding_radius();
        if d.dot(d) > rr * rr {
            return false;
        }
        let a = self.axes();
        let b = other.axes();
        for axis in a.iter().chain(b.iter()) {
            let pa = self.half_length * a[0].dot(*axis).abs() + self.half_width * a[1].dot(*axis).abs();
            let pb =
                other.half_length * b[0].dot(*axis).abs() + other.half_width * b[1].dot(*axis).abs();
            if d.dot(*axis).abs() > pa + pb {
                return false;
            }
        }
        true
    }

    /// Whether every corner of `other` lies inside `self`.
    pub fn contains_rect(&self, other: &OrientedRect) -> bool {
        other.corners().iter().all(|c| self.contains(*c))
    }

    pub fn aabb(&self) -> Aabb {
        let cs = self.corners();
        let mut min = cs[0];
        let mut max = cs[0];
        for c in &cs[1..] {
            min.x = min.x.min(c.x);
            min.y = min.y.min(c.y);
            max.x = max.x.max(c.x);
            max.y = max.y.max(c.y);
        }
        Aabb::new(min, max)
    }

    pub fn inflated(&self, margin: f64) -> OrientedRect {
        OrientedRect {
            half_length: self.half_length + margin,
            half_width: self.half_width + margin,
            ..*self
        }
    }
}

/// Shoelace signed area; positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i].cross(poly[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
        for k in -50..50 {
            let a = normalize_angle(k as f64 * 0.37);
            assert!(a > -PI && a <= PI);
        }
    }

    #[test]
    fn rect_corners_ccw() {
        let r = OrientedRect::new(Point2::new(1.0, 2.0), 0.7, 4.0, 2.0);
        assert!((signed_area(&r.corners()) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn sat_cases() {
        let a = OrientedRect::new(Point2::new(0.0, 0.0), 0.0, 2.0, 2.0);
        let b = OrientedRect::new(Point2::new(1.9, 0.0), 0.0, 2.0, 2.0);
        let c = OrientedRect::new(Point2::new(2.5, 0.0), PI / 4.0, 1.0, 1.0);
        let d = OrientedRect::new(Point2::new(1.6, 1.6), PI / 4.0, 1.0, 1.0);
        assert!(a.intersects(&b));
        assert!(!a.intersects(&c));
        // Diagonal neighbour clears the corner only along the rotated axis.
        assert!(!a.intersects(&d));
    }

    #[test]
    fn arc_move_full_circle() {
        let p = Pose2D::new(0.0, 0.0, 0.0);
        let q = arc_move(&p, 0.5, 2.0 * PI * 2.0);
        assert!(q.x.abs() < 1e-12 && q.y.abs() < 1e-12 && q.yaw.abs() < 1e-12);
    }
}
