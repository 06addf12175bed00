//! Shortest bounded-curvature paths with forward and reverse motion.
//!
//! Candidate words come from the nine base formulas (CSC, CCC, CCCC, CCSC and
//! CCSCC families) evaluated under the timeflip, reflect and backwards
//! transforms, which together cover all 48 Reeds-Shepp words.

use crate::geometry::{arc_move, normalize_angle, Pose2D};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Steer {
    Left,
    Straight,
    Right,
}

impl Steer {
    /// Curvature sign for a unit turning radius.
    pub fn sign(self) -> f64 {
        match self {
            Steer::Left => 1.0,
            Steer::Straight => 0.0,
            Steer::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Direction {
    #[default]
    Fwd,
    Rev,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Fwd => 1.0,
            Direction::Rev => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Fwd => Direction::Rev,
            Direction::Rev => Direction::Fwd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub steer: Steer,
    pub direction: Direction,
    /// Metres, non-negative.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSPath {
    pub segments: Vec<Segment>,
    pub turning_radius: f64,
    pub total_length: f64,
}

impl RSPath {
    /// Pose reached by following every segment from `start`.
    pub fn end_pose(&self, start: &Pose2D) -> Pose2D {
        self.segments
            .iter()
            .fold(*start, |p, s| segment_move(&p, s, self.turning_radius, s.length))
    }

    pub fn direction_changes(&self) -> usize {
        self.segments
            .windows(2)
            .filter(|w| w[0].direction != w[1].direction)
            .count()
    }
}

fn segment_move(p: &Pose2D, seg: &Segment, radius: f64, dist: f64) -> Pose2D {
    arc_move(p, seg.steer.sign() / radius, seg.direction.sign() * dist)
}

const ZERO: f64 = 1e-10;

fn mod2pi(x: f64) -> f64 {
    normalize_angle(x)
}

fn polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = mod2pi(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 { mod2pi(t1 + PI) } else { mod2pi(t1) };
    (tau, mod2pi(tau - u + v - phi))
}

// L+ S+ L+
fn lp_sp_lp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u, t) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if t >= -ZERO {
        let v = mod2pi(phi - t);
        if v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

// L+ S+ R+
fn lp_sp_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, t1) = polar(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let theta = 2f64.atan2(u);
        let t = mod2pi(t1 + theta);
        let v = mod2pi(t - phi);
        if t >= -ZERO && v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

// L+ R- L
fn lp_rm_l(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if u1 <= 4.0 {
        let u = -2.0 * (0.25 * u1).asin();
        let t = mod2pi(theta + 0.5 * u + PI);
        let v = mod2pi(phi - t + u);
        if t >= -ZERO && u <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

// L+ R+u L-u R-
fn lp_rup_lum_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = 0.25 * (2.0 + xi.hypot(eta));
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

// L+ R-u L-u R+
fn lp_rum_lum_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -0.5 * PI {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

// L+ R-pi/2 S- L-
fn lp_rm_sm_lm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (rho, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = mod2pi(theta + r.atan2(-2.0));
        let v = mod2pi(phi - FRAC_PI_2 - t);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

// L+ R-pi/2 S- R-
fn lp_rm_sm_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = mod2pi(t + FRAC_PI_2 - phi);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

// L+ R-pi/2 S- L-pi/2 R+
fn lp_rm_s_lm_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= ZERO {
            let t = mod2pi(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = mod2pi(t - phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

use Steer::{Left as L, Right as R, Straight as S};

/// Candidate word: steering letters plus signed lengths at unit radius.
type Word = (Vec<Steer>, Vec<f64>);

fn reflect(types: &[Steer]) -> Vec<Steer> {
    types
        .iter()
        .map(|s| match s {
            L => R,
            R => L,
            S => S,
        })
        .collect()
}

/// Pushes the four timeflip/reflect variants of a base formula.
fn push_symmetric(
    out: &mut Vec<Word>,
    f: fn(f64, f64, f64) -> Option<(f64, f64, f64)>,
    (x, y, phi): (f64, f64, f64),
    types: &[Steer],
    lengths: impl Fn(f64, f64, f64) -> Vec<f64>,
) {
    let neg = |v: Vec<f64>| v.into_iter().map(|l| -l).collect::<Vec<_>>();
    if let Some((t, u, v)) = f(x, y, phi) {
        out.push((types.to_vec(), lengths(t, u, v)));
    }
    if let Some((t, u, v)) = f(-x, y, -phi) {
        out.push((types.to_vec(), neg(lengths(t, u, v))));
    }
    if let Some((t, u, v)) = f(x, -y, -phi) {
        out.push((reflect(types), lengths(t, u, v)));
    }
    if let Some((t, u, v)) = f(-x, -y, phi) {
        out.push((reflect(types), neg(lengths(t, u, v))));
    }
}

/// Every base-formula solution for a goal at `(x, y, phi)` in the start frame, unit radius.
fn candidate_words(x: f64, y: f64, phi: f64) -> Vec<Word> {
    let mut out = Vec::new();
    let fwd = (x, y, phi);
    let (sp, cp) = phi.sin_cos();
    let back = (x * cp + y * sp, x * sp - y * cp, phi);

    // CSC
    push_symmetric(&mut out, lp_sp_lp, fwd, &[L, S, L], |t, u, v| vec![t, u, v]);
    push_symmetric(&mut out, lp_sp_rp, fwd, &[L, S, R], |t, u, v| vec![t, u, v]);
    // CCC
    push_symmetric(&mut out, lp_rm_l, fwd, &[L, R, L], |t, u, v| vec![t, u, v]);
    push_symmetric(&mut out, lp_rm_l, back, &[L, R, L], |t, u, v| vec![v, u, t]);
    // CCCC
    push_symmetric(&mut out, lp_rup_lum_rm, fwd, &[L, R, L, R], |t, u, v| vec![t, u, -u, v]);
    push_symmetric(&mut out, lp_rum_lum_rp, fwd, &[L, R, L, R], |t, u, v| vec![t, u, u, v]);
    // CCSC and its backwards CSCC
    push_symmetric(&mut out, lp_rm_sm_lm, fwd, &[L, R, S, L], |t, u, v| vec![t, -FRAC_PI_2, u, v]);
    push_symmetric(&mut out, lp_rm_sm_rm, fwd, &[L, R, S, R], |t, u, v| vec![t, -FRAC_PI_2, u, v]);
    push_symmetric(&mut out, lp_rm_sm_lm, back, &[L, S, R, L], |t, u, v| vec![v, u, -FRAC_PI_2, t]);
    push_symmetric(&mut out, lp_rm_sm_rm, back, &[R, S, R, L], |t, u, v| vec![v, u, -FRAC_PI_2, t]);
    // CCSCC
    push_symmetric(&mut out, lp_rm_s_lm_rp, fwd, &[L, R, S, L, R], |t, u, v| {
        vec![t, -FRAC_PI_2, u, -FRAC_PI_2, v]
    });
    out
}

/// Drops zero-length pieces and merges neighbours that share steering and direction.
fn normalize_word(types: &[Steer], signed: &[f64], radius: f64) -> Vec<Segment> {
    let mut segs: Vec<Segment> = Vec::with_capacity(types.len());
    for (&steer, &len) in types.iter().zip(signed) {
        if len.abs() <= ZERO {
            continue;
        }
        let direction = if len > 0.0 { Direction::Fwd } else { Direction::Rev };
        let length = len.abs() * radius;
        match segs.last_mut() {
            Some(last) if last.steer == steer && last.direction == direction => last.length += length,
            _ => segs.push(Segment {
                steer,
                direction,
                length,
            }),
        }
    }
    segs
}

/// Lexicographic key used to order equally long optima.
fn encoding(segs: &[Segment]) -> Vec<(Steer, Direction, u64)> {
    segs.iter()
        .map(|s| (s.steer, s.direction, s.length.to_bits()))
        .collect()
}

/// Shortest forward/reverse path from `q0` to `q1` with minimum turning radius `turning_radius`.
pub fn shortest_path(q0: &Pose2D, q1: &Pose2D, turning_radius: f64) -> RSPath {
    assert!(turning_radius > 0.0, "turning radius must be positive");
    let local = q0.to_local(q1.position());
    let phi = normalize_angle(q1.yaw - q0.yaw);
    let (x, y) = (local.x / turning_radius, local.y / turning_radius);
    if x.abs() < 1e-12 && y.abs() < 1e-12 && phi.abs() < 1e-12 {
        return RSPath {
            segments: Vec::new(),
            turning_radius,
            total_length: 0.0,
        };
    }

    let mut best: Option<(f64, Vec<Segment>)> = None;
    for (types, lengths) in candidate_words(x, y, phi) {
        let unit_len: f64 = lengths.iter().map(|l| l.abs()).sum();
        let segs = normalize_word(&types, &lengths, turning_radius);
        let better = match &best {
            None => true,
            Some((bl, bs)) => {
                if (unit_len - bl).abs() <= 1e-12 {
                    encoding(&segs) < encoding(bs)
                } else {
                    unit_len < *bl
                }
            }
        };
        if better {
            best = Some((unit_len, segs));
        }
    }
    let (_, segments) = best.expect("some Reeds-Shepp word always applies");
    let total_length = segments.iter().map(|s| s.length).sum();
    RSPath {
        segments,
        turning_radius,
        total_length,
    }
}

/// Samples `path` from `q0` at arc-length spacing of at most `step`, endpoints included.
///
/// Each sample is computed from its segment's start pose, so samples lie exactly
/// on the arcs. A cusp pose is tagged with the direction of the segment it ends.
pub fn sample_path(path: &RSPath, q0: &Pose2D, step: f64) -> Vec<(Pose2D, Direction)> {
    assert!(step > 0.0, "sample step must be positive");
    let first_dir = path.segments.first().map_or(Direction::Fwd, |s| s.direction);
    let mut out = vec![(*q0, first_dir)];
    let mut seg_start = *q0;
    for seg in &path.segments {
        let n = (seg.length / step).ceil().max(1.0) as usize;
        for i in 1..=n {
            let d = seg.length * i as f64 / n as f64;
            out.push((segment_move(&seg_start, seg, path.turning_radius, d), seg.direction));
        }
        seg_start = segment_move(&seg_start, seg, path.turning_radius, seg.length);
    }
    out
}
