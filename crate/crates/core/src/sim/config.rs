use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::geometry::{point_in_polygon, Camera, Polygon, Pose2};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Agent motion constants. Angular quantities are in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Kinematics {
    /// Constant forward speed, m/s.
    pub speed: f64,
    /// TURN magnitude, deg/s².
    pub alpha: f64,
    /// Steering sensitivity.
    pub kappa: f64,
    /// Angular velocity bound, deg/s.
    pub omega_max: f64,
    pub agent_radius: f64,
}

impl Default for Kinematics {
    fn default() -> Self {
        Self {
            speed: 6.0,
            alpha: 35.0,
            kappa: 2.0,
            omega_max: 90.0,
            agent_radius: 0.5,
        }
    }
}

/// Forecast horizon `H` and stride `s` in simulation frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSettings {
    pub horizon: usize,
    pub stride: usize,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        Self {
            horizon: 5,
            stride: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianSpec {
    /// Closed loop of waypoints; the pedestrian returns to the first after the last.
    pub waypoints: Vec<Vector2<f64>>,
    /// Uniform speed range `[min, max]`, m/s.
    pub speed_range: [f64; 2],
    /// Uniform range for the starting arc-length fraction along the loop.
    #[serde(default)]
    pub phase_range: [f64; 2],
    #[serde(default = "default_ped_radius")]
    pub radius: f64,
    #[serde(default = "default_ped_height")]
    pub height: f64,
}

fn default_ped_radius() -> f64 {
    0.3
}

fn default_ped_height() -> f64 {
    1.7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub id: String,
    /// Drivable region: union of these polygons.
    pub road: Vec<Polygon<f64>>,
    /// Prohibited regions such as sidewalks; never drivable.
    #[serde(default)]
    pub boundary: Vec<Polygon<f64>>,
    pub start: Pose2<f64>,
    pub goal: Vector2<f64>,
    pub goal_radius: f64,
    /// Guidance polyline followed by the scripted policies; empty means straight to goal.
    #[serde(default)]
    pub route: Vec<Vector2<f64>>,
    #[serde(default)]
    pub pedestrians: Vec<PedestrianSpec>,
    /// Seconds.
    pub time_limit: f64,
    /// Simulation step, seconds.
    pub dt: f64,
    #[serde(default)]
    pub kinematics: Kinematics,
    #[serde(default)]
    pub forecast: ForecastSettings,
    #[serde(default)]
    pub camera: Camera<f64>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn is_drivable(&self, p: &Vector2<f64>) -> bool {
        self.road.iter().any(|poly| point_in_polygon(p, poly))
            && !self.boundary.iter().any(|poly| point_in_polygon(p, poly))
    }

    /// Replaces every pedestrian's speed range.
    pub fn with_speed_band(mut self, band: [f64; 2]) -> Self {
        for p in &mut self.pedestrians {
            p.speed_range = band;
        }
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive".into());
        }
        if !(self.time_limit > 0.0) {
            return bad("time_limit must be positive".into());
        }
        let k = &self.kinematics;
        if !(k.speed > 0.0
            && k.kappa > 0.0
            && k.omega_max > 0.0
            && k.agent_radius > 0.0
            && k.alpha >= 0.0)
        {
            return bad("kinematics constants must be positive".into());
        }
        if self.forecast.horizon == 0 || self.forecast.stride == 0 {
            return bad("forecast horizon and stride must be at least 1".into());
        }
        if !(self.goal_radius > 0.0) {
            return bad("goal_radius must be positive".into());
        }
        if self.road.is_empty() || self.road.iter().any(|p| p.len() < 3) {
            return bad("road needs at least one polygon with three vertices".into());
        }
        if self.boundary.iter().any(|p| p.len() < 3) {
            return bad("boundary polygons need three vertices".into());
        }
        if !self.is_drivable(&self.goal) {
            return bad("goal is off-road".into());
        }
        if !self.is_drivable(&self.start.position) {
            return bad("start overlaps an obstacle or lies off-road".into());
        }
        for (i, p) in self.pedestrians.iter().enumerate() {
            let [lo, hi] = p.speed_range;
            if !(lo >= 0.0 && lo <= hi) {
                return bad(format!(
                    "pedestrian {i}: speed range must satisfy 0 <= min <= max"
                ));
            }
            let [a, b] = p.phase_range;
            if !(0.0 <= a && a <= b && b <= 1.0) {
                return bad(format!("pedestrian {i}: phase range must lie in [0, 1]"));
            }
            if p.waypoints.len() < 2 {
                return bad(format!("pedestrian {i}: needs at least two waypoints"));
            }
            if !(p.radius > 0.0 && p.height > 0.0) {
                return bad(format!(
                    "pedestrian {i}: radius and height must be positive"
                ));
            }
        }
        self.camera.validate()
    }
}
