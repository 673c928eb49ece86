use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    apply_action, pedestrian_advance, Action, AgentState, PedestrianState, ScenarioConfig,
};
use super::{FAILURE_REWARD, SUCCESS_REWARD};
use crate::geometry::Cylinder;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationCause {
    Success,
    Collision,
    OutOfBound,
    Timeout,
}

impl TerminationCause {
    pub const ALL: [TerminationCause; 4] = [
        TerminationCause::Success,
        TerminationCause::Collision,
        TerminationCause::OutOfBound,
        TerminationCause::Timeout,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationCause::Success => "success",
            TerminationCause::Collision => "collision",
            TerminationCause::OutOfBound => "out_of_bound",
            TerminationCause::Timeout => "timeout",
        }
    }

    pub fn reward(&self) -> f64 {
        match self {
            TerminationCause::Success => SUCCESS_REWARD,
            _ => FAILURE_REWARD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub reward: f64,
    pub terminated: bool,
    pub cause: Option<TerminationCause>,
}

impl StepOutcome {
    fn from_cause(cause: Option<TerminationCause>) -> Self {
        Self {
            reward: cause.map_or(0.0, |c| c.reward()),
            terminated: cause.is_some(),
            cause,
        }
    }
}

/// Complete simulation state for one episode.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub config: Arc<ScenarioConfig>,
    pub agent: AgentState,
    pub pedestrians: Vec<PedestrianState>,
    pub step: u64,
    pub elapsed: f64,
    /// Realized agent path length, metres.
    pub path_length: f64,
    pub terminated: Option<TerminationCause>,
    pub rng: ChaCha8Rng,
}

impl PartialEq for WorldState {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.agent == other.agent
            && self.pedestrians == other.pedestrians
            && self.step == other.step
            && self.elapsed.to_bits() == other.elapsed.to_bits()
            && self.path_length.to_bits() == other.path_length.to_bits()
            && self.terminated == other.terminated
            && self.rng == other.rng
    }
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Builds the initial world: pedestrian speeds (and starting phases) are drawn
/// uniformly from their ranges with a generator seeded by `seed`.
pub fn sample_scenario(config: Arc<ScenarioConfig>, seed: u64) -> Result<WorldState, Error> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pedestrians = Vec::with_capacity(config.pedestrians.len());
    for (i, spec) in config.pedestrians.iter().enumerate() {
        let speed = uniform(&mut rng, spec.speed_range);
        let phase = uniform(&mut rng, spec.phase_range);
        let waypoints: Arc<[_]> = spec.waypoints.clone().into();
        let mut ped = PedestrianState {
            id: i as u32,
            extent: Cylinder::new(waypoints[0], spec.radius, spec.height)?,
            speed,
            segment: 0,
            waypoints,
            travelled: 0.0,
        };
        let offset = phase * ped.loop_length();
        ped.walk(offset);
        ped.travelled = 0.0;
        pedestrians.push(ped);
    }
    Ok(WorldState {
        agent: AgentState {
            pose: config.start,
            omega: 0.0,
            speed: config.kinematics.speed,
        },
        pedestrians,
        step: 0,
        elapsed: 0.0,
        path_length: 0.0,
        terminated: None,
        rng,
        config,
    })
}

/// Termination test on a post-step state.
/// Priority: collision, then out-of-bound, then success, then timeout.
pub fn check_termination(world: &WorldState) -> Option<TerminationCause> {
    let cfg = &world.config;
    let pos = world.agent.pose.position;
    let r_agent = cfg.kinematics.agent_radius;
    if world
        .pedestrians
        .iter()
        .any(|p| (p.position() - pos).norm() < r_agent + p.extent.radius)
    {
        return Some(TerminationCause::Collision);
    }
    if !cfg.is_drivable(&pos) {
        return Some(TerminationCause::OutOfBound);
    }
    if (cfg.goal - pos).norm() <= cfg.goal_radius {
        return Some(TerminationCause::Success);
    }
    if world.elapsed >= cfg.time_limit - 1e-9 {
        return Some(TerminationCause::Timeout);
    }
    None
}

impl WorldState {
    pub fn is_terminated(&self) -> bool {
        self.terminated.is_some()
    }

    pub fn pedestrian(&self, id: u32) -> Option<&PedestrianState> {
        self.pedestrians.iter().find(|p| p.id == id)
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome, Error> {
        if self.terminated.is_some() {
            return Err(Error::StepAfterTermination);
        }
        let cfg = Arc::clone(&self.config);
        self.agent = apply_action(&self.agent, action, &cfg.kinematics, cfg.dt);
        for ped in &mut self.pedestrians {
            *ped = pedestrian_advance(ped, cfg.dt);
        }
        self.step += 1;
        self.elapsed = self.step as f64 * cfg.dt;
        self.path_length += self.agent.speed * cfg.dt;
        let cause = check_termination(self);
        self.terminated = cause;
        Ok(StepOutcome::from_cause(cause))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{presets, PedestrianSpec};
    use nalgebra::Vector2;

    fn stationary_ped(at: Vector2<f64>) -> PedestrianSpec {
        PedestrianSpec {
            waypoints: vec![at, at + Vector2::new(0.0, 1.0)],
            speed_range: [0.0, 0.0],
            phase_range: [0.0, 0.0],
            radius: 0.3,
            height: 1.7,
        }
    }

    #[test]
    fn degenerate_speed_range() {
        let mut cfg = presets::open_field(40.0);
        for k in 0..5 {
            let mut p = stationary_ped(Vector2::new(10.0, k as f64));
            p.speed_range = [1.0, 1.0];
            cfg.pedestrians.push(p);
        }
        let w = sample_scenario(Arc::new(cfg), 9).unwrap();
        assert!(w.pedestrians.iter().all(|p| p.speed == 1.0));
        assert_eq!(w.agent.omega, 0.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = Arc::new(presets::s_turn(3));
        assert_eq!(
            sample_scenario(cfg.clone(), 42).unwrap(),
            sample_scenario(cfg, 42).unwrap()
        );
    }

    #[test]
    fn uniform_sampler_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..1000).map(|_| uniform(&mut rng, [0.3, 1.5])).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(xs.iter().all(|&x| (0.3..=1.5).contains(&x)));
        assert!((mean - 0.9).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn goal_one_step_ahead_succeeds() {
        let mut cfg = presets::open_field(40.0);
        cfg.goal = Vector2::new(0.3, 0.0);
        let mut w = sample_scenario(Arc::new(cfg), 0).unwrap();
        let out = w.step(Action::Noop).unwrap();
        assert_eq!(out.cause, Some(TerminationCause::Success));
        assert_eq!(out.reward, 10.0);
        assert!(matches!(
            w.step(Action::Noop),
            Err(Error::StepAfterTermination)
        ));
    }

    #[test]
    fn pedestrian_on_start_collides() {
        let mut cfg = presets::open_field(40.0);
        cfg.pedestrians.push(stationary_ped(Vector2::new(0.0, 0.0)));
        let mut w = sample_scenario(Arc::new(cfg), 0).unwrap();
        let out = w.step(Action::Noop).unwrap();
        assert_eq!(out.cause, Some(TerminationCause::Collision));
        assert_eq!(out.reward, -10.0);
    }

    #[test]
    fn termination_priorities() {
        let mut cfg = presets::open_field(40.0);
        cfg.pedestrians.push(stationary_ped(Vector2::new(0.0, 0.0)));
        let mut w = sample_scenario(Arc::new(cfg), 0).unwrap();
        // agent centred on goal -> success
        w.agent.pose.position = w.config.goal;
        assert_eq!(check_termination(&w), Some(TerminationCause::Success));
        // off-road and touching a pedestrian -> collision wins
        w.agent.pose.position = Vector2::new(0.0, 0.0);
        let far = Vector2::new(-500.0, 0.0);
        w.agent.pose.position = far;
        w.pedestrians[0].extent.center = far + Vector2::new(0.5, 0.0);
        assert_eq!(check_termination(&w), Some(TerminationCause::Collision));
        w.pedestrians[0].extent.center = Vector2::new(30.0, 30.0);
        assert_eq!(check_termination(&w), Some(TerminationCause::OutOfBound));
        // mid-road at the time limit -> timeout
        w.agent.pose.position = Vector2::new(5.0, 0.0);
        w.elapsed = w.config.time_limit;
        assert_eq!(check_termination(&w), Some(TerminationCause::Timeout));
    }

    #[test]
    fn rollout_is_reproducible() {
        let cfg = Arc::new(presets::s_turn(1));
        let run = || {
            let mut w = sample_scenario(cfg.clone(), 11).unwrap();
            let mut outs = Vec::new();
            for i in 0..200 {
                if w.is_terminated() {
                    break;
                }
                let a = Action::turn_sign(((i / 7) % 3) as i8 - 1, 35.0);
                outs.push(w.step(a).unwrap());
            }
            (outs, w)
        };
        let (a, wa) = run();
        let (b, wb) = run();
        assert_eq!(a, b);
        assert_eq!(wa, wb);
        // exactly one terminal outcome, rewards zero elsewhere
        let terminal = a.iter().filter(|o| o.terminated).count();
        assert!(terminal <= 1);
        assert!(a.iter().filter(|o| !o.terminated).all(|o| o.reward == 0.0));
    }

    #[test]
    fn pedestrian_arc_length_conservation() {
        let cfg = Arc::new(presets::s_turn(2));
        let mut w = sample_scenario(cfg, 5).unwrap();
        w.config = Arc::new({
            let mut c = (*w.config).clone();
            c.time_limit = 1000.0;
            c
        });
        let mut steps = 0;
        while !w.is_terminated() && steps < 100 {
            w.step(Action::Noop).unwrap();
            steps += 1;
        }
        for p in &w.pedestrians {
            assert!((p.travelled - p.speed * w.elapsed).abs() < 1e-9);
        }
    }
}
