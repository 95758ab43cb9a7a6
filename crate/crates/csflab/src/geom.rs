//! Small planar-geometry primitives shared across the crate.

use std::ops::{Add, Mul, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Z-component of the cross product, i.e. the signed parallelogram area.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction; `None` for (near-)zero vectors.
    pub fn unit(self) -> Option<Point> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(Point::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    /// Rotate by +90 degrees (counterclockwise).
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Total length of a polyline.
pub fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Unsigned angle between two direction vectors, in `[0, pi]`.
///
/// Uses `atan2` of cross/dot, which stays accurate for nearly parallel and
/// nearly antiparallel vectors alike.
pub fn angle_between(u: Point, v: Point) -> f64 {
    u.cross(v).abs().atan2(u.dot(v))
}

/// Squared distance from `p` to the segment `[a, b]`.
pub fn dist_sq_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len_sq = ab.dot(ab);
    if len_sq == 0.0 {
        let d = p - a;
        return d.dot(d);
    }
    let s = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    let proj = a + ab * s;
    let d = p - proj;
    d.dot(d)
}

/// Linear interpolation between `a` and `b`.
pub fn lerp(a: Point, b: Point, s: f64) -> Point {
    a + (b - a) * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_and_dot() {
        let e1 = Point::new(1.0, 0.0);
        let e2 = Point::new(0.0, 1.0);
        assert_eq!(e1.cross(e2), 1.0);
        assert_eq!(e2.cross(e1), -1.0);
        assert_eq!(e1.dot(e2), 0.0);
    }

    #[test]
    fn angle_between_axes_is_right_angle() {
        let a = angle_between(Point::new(1.0, 0.0), Point::new(0.0, -3.0));
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn angle_between_antiparallel() {
        let a = angle_between(Point::new(2.0, 1.0), Point::new(-4.0, -2.0));
        assert!((a - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn point_segment_distance_clamps_to_endpoints() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert!((dist_sq_point_segment(Point::new(2.0, 0.0), a, b) - 1.0).abs() < 1e-15);
        assert!((dist_sq_point_segment(Point::new(0.5, 2.0), a, b) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn length_of_unit_square_path() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, 0.0),
        ];
        assert!((polyline_length(&pts) - 4.0).abs() < 1e-15);
    }
}
