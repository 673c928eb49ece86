//! Policies: scripted controllers and the external-process bridge.

pub mod bridge;
mod scripted;

pub use scripted::{
    AvoidParams, Corridor, ForecastAvoid, PixelAvoid, PixelParams, PurePursuit, PursuitParams,
    Straight,
};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::forecast::Forecast;
use crate::geometry::{Camera, Pose2};
use crate::render::ObservationStack;
use crate::sim::{Action, StepOutcome};
use crate::Error;

/// What a policy must be given each step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Needs {
    pub observation: bool,
    pub privileged: bool,
}

/// World-space state handed to scripted policies only.
#[derive(Clone, Debug)]
pub struct Privileged<'a> {
    pub pose: Pose2<f64>,
    pub omega: f64,
    pub speed: f64,
    pub agent_radius: f64,
    pub goal: Vector2<f64>,
    pub route: &'a [Vector2<f64>],
    /// `(id, ground position, radius)` of every pedestrian.
    pub pedestrians: Vec<(u32, Vector2<f64>, f64)>,
    /// World-space forecasts of the active forecaster (empty without one).
    pub forecasts: &'a [Forecast<f64>],
}

#[derive(Clone, Debug)]
pub struct PolicyInput<'a> {
    pub step: u64,
    /// Configured TURN magnitude, deg/s².
    pub alpha: f64,
    pub camera: &'a Camera<f64>,
    pub observation: Option<&'a ObservationStack>,
    pub privileged: Option<Privileged<'a>>,
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    fn needs(&self) -> Needs;

    /// Called once before the first step of an episode.
    fn reset(&mut self, _scenario: &str, _seed: u64) -> Result<(), Error> {
        Ok(())
    }

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action, Error>;

    /// Called after the terminating step with the final observation, if any.
    fn finish(
        &mut self,
        _step: u64,
        _outcome: &StepOutcome,
        _observation: Option<&ObservationStack>,
    ) -> Result<(), Error> {
        Ok(())
    }
}

/// Serializable description of a scripted policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PolicySpec {
    Straight,
    PurePursuit(PursuitParams),
    ForecastAvoid(AvoidParams),
    PixelAvoid(PixelParams),
}

impl PolicySpec {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "straight" => PolicySpec::Straight,
            "pure-pursuit" => PolicySpec::PurePursuit(PursuitParams::default()),
            "forecast-avoid" => PolicySpec::ForecastAvoid(AvoidParams::default()),
            "pixel-avoid" => PolicySpec::PixelAvoid(PixelParams::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Straight => "straight",
            PolicySpec::PurePursuit(_) => "pure-pursuit",
            PolicySpec::ForecastAvoid(_) => "forecast-avoid",
            PolicySpec::PixelAvoid(_) => "pixel-avoid",
        }
    }

    pub fn build(&self) -> Box<dyn Policy> {
        match self {
            PolicySpec::Straight => Box::new(Straight),
            PolicySpec::PurePursuit(p) => Box::new(PurePursuit::new(*p)),
            PolicySpec::ForecastAvoid(p) => Box::new(ForecastAvoid::new(*p)),
            PolicySpec::PixelAvoid(p) => Box::new(PixelAvoid::new(p.clone())),
        }
    }
}
