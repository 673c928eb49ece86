use std::sync::Arc;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::geometry::Cylinder;

/// A pedestrian walking a closed waypoint loop at constant speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PedestrianState {
    pub id: u32,
    pub extent: Cylinder<f64>,
    /// m/s
    pub speed: f64,
    /// Index of the waypoint the current segment starts from.
    pub segment: usize,
    pub waypoints: Arc<[Vector2<f64>]>,
    /// Odometer: arc length walked since the episode started.
    pub travelled: f64,
}

impl PedestrianState {
    pub fn position(&self) -> Vector2<f64> {
        self.extent.center
    }

    pub fn loop_length(&self) -> f64 {
        let n = self.waypoints.len();
        (0..n)
            .map(|i| (self.waypoints[(i + 1) % n] - self.waypoints[i]).norm())
            .sum()
    }

    /// Walks `distance` metres along the loop.
    pub fn walk(&mut self, distance: f64) {
        let n = self.waypoints.len();
        if n < 2 || distance <= 0.0 || self.loop_length() <= 0.0 {
            return;
        }
        let mut remaining = distance;
        let mut pos = self.extent.center;
        loop {
            let target = self.waypoints[(self.segment + 1) % n];
            let gap = (target - pos).norm();
            if remaining < gap {
                pos += (target - pos) * (remaining / gap);
                break;
            }
            remaining -= gap;
            pos = target;
            self.segment = (self.segment + 1) % n;
            if remaining <= 0.0 {
                break;
            }
        }
        self.extent.center = pos;
        self.travelled += distance;
    }
}

/// Moves the pedestrian `speed * dt` along its loop, wrapping from the last
/// waypoint back to the first.
pub fn pedestrian_advance(ped: &PedestrianState, dt: f64) -> PedestrianState {
    let mut next = ped.clone();
    next.walk(ped.speed * dt);
    next
}
