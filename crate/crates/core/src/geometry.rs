//! Planar geometry helpers shared by the planners and the simulator.

use core::f64::consts::{PI, TAU};

/// A point in the world frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    /// World-frame bearing from `self` towards `other`.
    pub fn bearing_to(self, other: Point) -> f64 {
        libm::atan2(other.y - self.y, other.x - self.x)
    }

    pub fn offset(self, heading: f64, dist: f64) -> Point {
        Point::new(
            self.x + dist * libm::cos(heading),
            self.y + dist * libm::sin(heading),
        )
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_to_pi(angle: f64) -> f64 {
    let mut a = libm::fmod(angle, TAU);
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_to_two_pi(angle: f64) -> f64 {
    let a = libm::fmod(angle, TAU);
    let a = if a < 0.0 { a + TAU } else { a };
    // fmod of a tiny negative value can round up to exactly TAU
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Absolute angular distance in `[0, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    libm::fabs(wrap_to_pi(a - b))
}

/// Euclidean distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Axis-aligned box `[min_x, max_x] × [min_y, max_y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct Aabb {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Aabb {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x: min_x.min(max_x),
            min_y: min_y.min(max_y),
            max_x: max_x.max(min_x),
            max_y: max_y.max(min_y),
        }
    }

    pub fn centered(center: Point, width: f64, height: f64) -> Self {
        Self::new(
            center.x - width / 2.0,
            center.y - height / 2.0,
            center.x + width / 2.0,
            center.y + height / 2.0,
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// Distance from `p` to the box, zero inside.
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.min_x - p.x).max(0.0).max(p.x - self.max_x);
        let dy = (self.min_y - p.y).max(0.0).max(p.y - self.max_y);
        libm::hypot(dx, dy)
    }

    /// Whether the disk of `radius` centered at `p` overlaps the box.
    pub fn intersects_disk(&self, p: Point, radius: f64) -> bool {
        self.distance_to(p) < radius
    }

    /// Whether the open interiors of two boxes overlap.
    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.min_x < other.max_x
            && other.min_x < self.max_x
            && self.min_y < other.max_y
            && other.min_y < self.max_y
    }

    /// Slab test. Returns the smallest `t ≥ 0` at which the ray
    /// `origin + t·(cos θ, sin θ)` meets the box, if any.
    pub fn ray_entry(&self, origin: Point, heading: f64) -> Option<f64> {
        let dir = [libm::cos(heading), libm::sin(heading)];
        let o = [origin.x, origin.y];
        let lo = [self.min_x, self.min_y];
        let hi = [self.max_x, self.max_y];
        let mut t_min = f64::NEG_INFINITY;
        let mut t_max = f64::INFINITY;
        for axis in 0..2 {
            if libm::fabs(dir[axis]) < 1e-12 {
                if o[axis] < lo[axis] || o[axis] > hi[axis] {
                    return None;
                }
            } else {
                let t1 = (lo[axis] - o[axis]) / dir[axis];
                let t2 = (hi[axis] - o[axis]) / dir[axis];
                t_min = t_min.max(t1.min(t2));
                t_max = t_max.min(t1.max(t2));
            }
        }
        if t_max < t_min.max(0.0) {
            None
        } else {
            Some(t_min.max(0.0))
        }
    }
}
