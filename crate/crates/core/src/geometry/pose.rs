use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::Real;

/// Wraps an angle in radians into `[-pi, pi)`.
pub fn normalize_angle<T: Real>(angle: T) -> T {
    let two_pi = T::TAU();
    let wrapped = angle - two_pi * ((angle + T::PI()) / two_pi).floor();
    // floating error can land exactly on +pi
    if wrapped >= T::PI() {
        wrapped - two_pi
    } else {
        wrapped
    }
}

/// Planar pose. Heading is measured counter-clockwise from the +x axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct Pose2<T: Real> {
    pub position: Vector2<T>,
    pub heading: T,
}

impl<T: Real> Pose2<T> {
    pub fn new(x: T, y: T, heading: T) -> Self {
        Self {
            position: Vector2::new(x, y),
            heading: normalize_angle(heading),
        }
    }

    /// Unit vector along the heading.
    pub fn forward(&self) -> Vector2<T> {
        Vector2::new(self.heading.cos(), self.heading.sin())
    }

    /// Unit vector pointing to the right of the heading.
    pub fn right(&self) -> Vector2<T> {
        Vector2::new(self.heading.sin(), -self.heading.cos())
    }

    /// Expresses a world point in this pose's frame as `(forward, left)`.
    pub fn to_local(&self, point: &Vector2<T>) -> Vector2<T> {
        let d = point - self.position;
        let f = self.forward();
        Vector2::new(d.dot(&f), -d.dot(&self.right()))
    }

    /// Clockwise-positive bearing of `point` relative to the heading, in radians.
    /// A target to the right yields a positive bearing.
    pub fn bearing_to(&self, point: &Vector2<T>) -> T {
        let d = point - self.position;
        normalize_angle(self.heading - d.y.atan2(d.x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn normalize_range() {
        for k in -20..20 {
            let a = normalize_angle(0.37 + k as f64 * PI);
            assert!((-PI..PI).contains(&a), "{a}");
        }
        assert_eq!(normalize_angle(PI), -PI);
        assert_eq!(normalize_angle(-PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn bearing_sign_is_clockwise_positive() {
        let pose = Pose2::new(0.0, 0.0, 0.0);
        assert!(pose.bearing_to(&Vector2::new(5.0, -1.0)) > 0.0);
        assert!(pose.bearing_to(&Vector2::new(5.0, 1.0)) < 0.0);
        assert_eq!(pose.bearing_to(&Vector2::new(5.0, 0.0)), 0.0);
    }

    #[test]
    fn local_frame() {
        let pose = Pose2::new(1.0, 1.0, PI / 2.0);
        let l = pose.to_local(&Vector2::new(0.0, 3.0));
        assert!((l.x - 2.0).abs() < 1e-12);
        assert!((l.y - 1.0).abs() < 1e-12);
    }
}
