//! Scenario definition, agent kinematics, pedestrian motion and episode stepping.

mod agent;
mod config;
mod pedestrian;
pub mod presets;
mod world;

pub use agent::{apply_action, Action, AgentState};
pub use config::{ForecastSettings, Kinematics, PedestrianSpec, ScenarioConfig, SCHEMA_VERSION};
pub use pedestrian::{pedestrian_advance, PedestrianState};
pub use world::{check_termination, sample_scenario, StepOutcome, TerminationCause, WorldState};

/// Reward for reaching the goal.
pub const SUCCESS_REWARD: f64 = 10.0;
/// Penalty for collision, leaving the road, or running out of time.
pub const FAILURE_REWARD: f64 = -10.0;
