use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A 2D vector in field coordinates (meters, or meters per cycle for velocities).
///
/// The field frame puts the center spot at the origin, +x toward the right goal
/// and +y toward the bottom touchline. Angles are measured in degrees from +x
/// toward +y.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Vector of length `r` pointing at `dir_deg`.
    pub fn polar(r: f64, dir_deg: f64) -> Self {
        let rad = dir_deg.to_radians();
        Vec2::new(r * rad.cos(), r * rad.sin())
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn length_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Direction of the vector in degrees, normalized to [-180, 180).
    /// The zero vector points at 0.
    pub fn dir_deg(self) -> f64 {
        if self.x == 0.0 && self.y == 0.0 {
            0.0
        } else {
            normalize_angle(self.y.atan2(self.x).to_degrees())
        }
    }

    pub fn rotated(self, deg: f64) -> Vec2 {
        let (s, c) = deg.to_radians().sin_cos();
        Vec2::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    /// Rescales the vector so its length does not exceed `max`.
    pub fn clamp_length(self, max: f64) -> Vec2 {
        let len = self.length();
        if len > max && len > 0.0 {
            self * (max / len)
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Normalizes an angle in degrees to [-180, 180).
pub fn normalize_angle(deg: f64) -> f64 {
    if !deg.is_finite() {
        return deg;
    }
    let mut a = (deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return 360.0 for tiny negative inputs
    if a >= 180.0 {
        a -= 360.0;
    }
    a
}

/// Smallest signed difference `a - b` in degrees, in [-180, 180).
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalize_wraps_into_half_open_range() {
        assert_eq!(normalize_angle(180.0), -180.0);
        assert_eq!(normalize_angle(-180.0), -180.0);
        assert_eq!(normalize_angle(540.0), -180.0);
        assert_abs_diff_eq!(normalize_angle(359.0), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-190.0), 170.0, epsilon = 1e-12);
        assert!(normalize_angle(-1e-17) < 180.0);
    }

    #[test]
    fn polar_and_direction_agree() {
        let v = Vec2::polar(2.0, 30.0);
        assert_abs_diff_eq!(v.length(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.dir_deg(), 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(Vec2::new(-1.0, 0.0).dir_deg(), -180.0, epsilon = 1e-12);
    }

    #[test]
    fn clamp_length_only_shrinks() {
        assert_eq!(Vec2::new(3.5, 0.0).clamp_length(3.0), Vec2::new(3.0, 0.0));
        assert_eq!(Vec2::new(1.0, 0.0).clamp_length(3.0), Vec2::new(1.0, 0.0));
    }
}
