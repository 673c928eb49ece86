//! Closed-loop episodes: forecasting, rendering and policy stepping.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::forecast::{
    ade, cvm_forecast, fde, gt_forecast, gt_forecast_image, kf_forecast, kf_init, kf_step,
    Algorithm, BoxState, Forecast, Horizon, KfParams, KfState, Space, Track, DEFAULT_HISTORY,
};
use crate::geometry::{Camera, ImageBox, Pose2};
use crate::metrics::{shortest_path, Episode, Region};
use crate::policy::{Policy, PolicyInput, Privileged};
use crate::render::{
    overlay_ap, overlay_box_forecast, Approach, LabelImage, ObservationStack, Overlay,
    SceneRenderer,
};
use crate::sim::{sample_scenario, Action, ScenarioConfig, TerminationCause, WorldState};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Forecaster {
    None,
    Cvm,
    Kf,
    Gt,
}

impl Forecaster {
    pub fn algorithm(self) -> Option<Algorithm> {
        match self {
            Forecaster::None => None,
            Forecaster::Cvm => Some(Algorithm::Cvm),
            Forecaster::Kf => Some(Algorithm::Kf),
            Forecaster::Gt => Some(Algorithm::Gt),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Some(Forecaster::None),
            "cvm" => Some(Forecaster::Cvm),
            "kf" => Some(Forecaster::Kf),
            "gt" => Some(Forecaster::Gt),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Forecaster::None => "none",
            Forecaster::Cvm => "cvm",
            Forecaster::Kf => "kf",
            Forecaster::Gt => "gt",
        }
    }
}

/// Observation approach plus the forecaster feeding it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApproachSpec {
    pub approach: Approach,
    pub forecaster: Forecaster,
    pub space: Space,
}

impl ApproachSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.forecaster == Forecaster::None && self.approach.mode().overlay != Overlay::None {
            return Err(Error::InvalidConfig(format!(
                "approach {} draws forecasts but the forecaster is none",
                self.approach
            )));
        }
        Ok(())
    }

    /// Short label, e.g. `seg+ap/cvm/3d`.
    pub fn label(&self) -> String {
        let space = match self.space {
            Space::World => "3d",
            Space::Image => "2d",
        };
        format!("{}/{}/{}", self.approach, self.forecaster.as_str(), space)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeSettings {
    pub approach: ApproachSpec,
    /// Filter noise for world-space tracks (metres).
    pub kf: KfParams<f64>,
    /// Filter noise for image-space tracks (pixels).
    pub kf_image: KfParams<f64>,
    pub history: usize,
    /// Keep the per-step log.
    pub log_steps: bool,
    /// Score every forecast whose horizon completes against the realized future.
    pub check_forecasts: bool,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self {
            approach: ApproachSpec {
                approach: Approach::Seg,
                forecaster: Forecaster::None,
                space: Space::World,
            },
            kf: KfParams::default(),
            kf_image: KfParams::image(),
            history: DEFAULT_HISTORY,
            log_steps: false,
            check_forecasts: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: u64,
    pub action: Action,
    pub reward: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub omega: f64,
}

/// ADE/FDE of one forecast scored against what actually happened.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastScore {
    pub object_id: u32,
    pub made_at: u64,
    pub ade: f64,
    pub fde: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub record: Episode<f64>,
    pub steps: Vec<StepLog>,
    pub forecast_scores: Vec<ForecastScore>,
}

/// Per-episode forecaster: tracks, filters and forecasts for every pedestrian.
#[derive(Clone, Debug)]
pub struct ForecastBank {
    forecaster: Forecaster,
    space: Space,
    horizon: Horizon,
    history: usize,
    kf: KfParams<f64>,
    tracks: BTreeMap<u32, Track<f64>>,
    filters: BTreeMap<u32, KfState<f64>>,
}

impl ForecastBank {
    pub fn new(
        forecaster: Forecaster,
        space: Space,
        horizon: Horizon,
        history: usize,
        kf: KfParams<f64>,
    ) -> Self {
        Self {
            forecaster,
            space,
            horizon,
            history,
            kf,
            tracks: BTreeMap::new(),
            filters: BTreeMap::new(),
        }
    }

    /// Feeds the current observation of every pedestrian and returns the
    /// forecasts (in the bank's space) of all tracks with at least two samples.
    pub fn update(
        &mut self,
        world: &WorldState,
        camera: &Camera<f64>,
        pose: &Pose2<f64>,
    ) -> Result<Vec<Forecast<f64>>, Error> {
        if self.forecaster == Forecaster::None {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for ped in &world.pedestrians {
            let meas = match self.space {
                Space::World => Some(BoxState::from_cylinder(&ped.extent)),
                Space::Image => camera
                    .project_cylinder(pose, &ped.extent)
                    .map(|b| BoxState::from_image_box(&b)),
            };
            let Some(meas) = meas else {
                self.tracks.remove(&ped.id);
                self.filters.remove(&ped.id);
                continue;
            };
            let track = self
                .tracks
                .entry(ped.id)
                .or_insert_with(|| Track::with_capacity(ped.id, self.space, self.history));
            track.push(world.step, meas)?;
            let filter = match self.filters.get(&ped.id) {
                Some(s) => kf_step(s, &meas, &self.kf)?,
                None => kf_init(&meas, &self.kf),
            };
            self.filters.insert(ped.id, filter);
            if track.len() < 2 {
                continue;
            }
            let fc = match self.forecaster {
                Forecaster::None => unreachable!(),
                Forecaster::Cvm => cvm_forecast(track, self.horizon)?,
                Forecaster::Kf => {
                    kf_forecast(&self.filters[&ped.id], ped.id, self.space, self.horizon)
                }
                Forecaster::Gt => match self.space {
                    Space::World => gt_forecast(world, ped.id, self.horizon)?,
                    Space::Image => {
                        match gt_forecast_image(world, ped.id, self.horizon, camera, pose)? {
                            Some(f) => f,
                            None => continue,
                        }
                    }
                },
            };
            out.push(fc);
        }
        Ok(out)
    }
}

/// Image boxes of a forecast as seen from `pose`.
pub fn forecast_image_boxes(
    fc: &Forecast<f64>,
    camera: &Camera<f64>,
    pose: &Pose2<f64>,
) -> Vec<ImageBox<f64>> {
    fc.boxes()
        .filter_map(|b| match fc.space {
            Space::Image => Some(b.to_image_box()),
            Space::World => camera.cylinder_box(pose, &b.to_cylinder()?),
        })
        .collect()
}

/// Ground footprints of an image-space forecast: each box's bottom centre is
/// back-projected and its width converted to metres at that depth.
pub fn image_forecast_to_world(
    fc: &Forecast<f64>,
    camera: &Camera<f64>,
    pose: &Pose2<f64>,
) -> Forecast<f64> {
    let f = camera.focal_length();
    let entries = fc
        .entries
        .iter()
        .filter_map(|(k, b)| {
            let g = camera.pixel_to_ground(pose, b.cx, b.cy + 0.5 * b.h)?;
            let z = camera.world_to_camera(pose, &Vector3::new(g.x, g.y, 0.0)).z;
            Some((*k, BoxState::new(g.x, g.y, b.w * z / f, b.h * z / f)))
        })
        .collect();
    Forecast {
        object_id: fc.object_id,
        algorithm: fc.algorithm,
        space: Space::World,
        entries,
    }
}

/// Paints BOX or AP overlays for `forecasts`, farthest pedestrian first.
pub fn paint_overlays(
    img: &mut LabelImage,
    overlay: Overlay,
    world: &WorldState,
    forecasts: &[Forecast<f64>],
    camera: &Camera<f64>,
    pose: &Pose2<f64>,
) {
    if overlay == Overlay::None {
        return;
    }
    let mut order: Vec<(f64, &Forecast<f64>)> = forecasts
        .iter()
        .filter_map(|fc| {
            let ped = world.pedestrian(fc.object_id)?;
            Some(((ped.position() - pose.position).norm(), fc))
        })
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.object_id.cmp(&b.1.object_id)));
    for (_, fc) in order {
        let boxes = forecast_image_boxes(fc, camera, pose);
        match overlay {
            Overlay::None => {}
            Overlay::Box => overlay_box_forecast(img, &boxes),
            Overlay::Ap => {
                let ped = world.pedestrian(fc.object_id).expect("filtered above");
                if let (Some(bt), Some(btk)) =
                    (camera.project_cylinder(pose, &ped.extent), boxes.last())
                {
                    if boxes.len() == fc.len() {
                        overlay_ap(img, &bt, btk);
                    }
                }
            }
        }
    }
}

struct Pending {
    forecast: Forecast<f64>,
    made_at: u64,
    pose: Pose2<f64>,
    realized: Vec<BoxState<f64>>,
}

/// Runs episodes of one scenario under fixed settings.
#[derive(Clone, Debug)]
pub struct EpisodeRunner {
    config: Arc<ScenarioConfig>,
    settings: EpisodeSettings,
    renderer: Arc<SceneRenderer>,
    shortest: f64,
}

/// Shortest drivable path from the start to the goal.
pub fn scenario_shortest_path(cfg: &ScenarioConfig) -> Result<f64, Error> {
    let region = Region {
        road: &cfg.road,
        holes: &cfg.boundary,
    };
    shortest_path(&region, cfg.start.position, cfg.goal)
        .ok_or_else(|| Error::InvalidConfig(format!("{}: goal unreachable from start", cfg.id)))
}

impl EpisodeRunner {
    pub fn new(config: Arc<ScenarioConfig>, settings: EpisodeSettings) -> Result<Self, Error> {
        let shortest = scenario_shortest_path(&config)?;
        let renderer = Arc::new(SceneRenderer::new(&config, config.camera));
        Self::with_parts(config, settings, renderer, shortest)
    }

    /// Reuses a render cache and shortest-path length computed for the same
    /// road geometry.
    pub fn with_parts(
        config: Arc<ScenarioConfig>,
        settings: EpisodeSettings,
        renderer: Arc<SceneRenderer>,
        shortest: f64,
    ) -> Result<Self, Error> {
        config.validate()?;
        settings.approach.validate()?;
        Ok(Self {
            config,
            settings,
            renderer,
            shortest,
        })
    }

    pub fn config(&self) -> &Arc<ScenarioConfig> {
        &self.config
    }

    pub fn settings(&self) -> &EpisodeSettings {
        &self.settings
    }

    pub fn shortest(&self) -> f64 {
        self.shortest
    }

    pub fn renderer(&self) -> &Arc<SceneRenderer> {
        &self.renderer
    }

    fn frame(&self, world: &WorldState, forecasts: &[Forecast<f64>]) -> LabelImage {
        let mode = self.settings.approach.approach.mode();
        let camera = self.renderer.camera();
        let mut img = self.renderer.render(world, mode.pedestrian_style);
        paint_overlays(
            &mut img,
            mode.overlay,
            world,
            forecasts,
            camera,
            &world.agent.pose,
        );
        img
    }

    /// Observation frames an episode would produce for a fixed action script,
    /// newest frame per step. Used for visual dumps.
    pub fn frames(
        &self,
        seed: u64,
        actions: impl IntoIterator<Item = Action>,
    ) -> Result<Vec<LabelImage>, Error> {
        let mut world = sample_scenario(Arc::clone(&self.config), seed)?;
        let mut bank = self.bank();
        let camera = *self.renderer.camera();
        let mut out = Vec::new();
        let forecasts = bank.update(&world, &camera, &world.agent.pose.clone())?;
        out.push(self.frame(&world, &forecasts));
        for a in actions {
            if world.is_terminated() {
                break;
            }
            world.step(a)?;
            let forecasts = bank.update(&world, &camera, &world.agent.pose.clone())?;
            out.push(self.frame(&world, &forecasts));
        }
        Ok(out)
    }

    fn bank(&self) -> ForecastBank {
        let s = &self.settings;
        ForecastBank::new(
            s.approach.forecaster,
            s.approach.space,
            Horizon::from(self.config.forecast),
            s.history,
            match s.approach.space {
                Space::World => s.kf,
                Space::Image => s.kf_image,
            },
        )
    }

    pub fn run(&self, policy: &mut dyn Policy, seed: u64) -> Result<EpisodeOutcome, Error> {
        let cfg = Arc::clone(&self.config);
        let camera = *self.renderer.camera();
        let needs = policy.needs();
        policy.reset(&cfg.id, seed)?;
        let mut world = sample_scenario(Arc::clone(&cfg), seed)?;
        let mut bank = self.bank();
        let mut stack: Option<ObservationStack> = None;
        let mut steps = Vec::new();
        let mut pending: Vec<Pending> = Vec::new();
        let mut scores = Vec::new();

        loop {
            let pose = world.agent.pose;
            let forecasts = bank.update(&world, &camera, &pose)?;
            if needs.observation {
                let frame = self.frame(&world, &forecasts);
                match stack.as_mut() {
                    Some(s) => s.push_frame(frame),
                    None => stack = Some(ObservationStack::reset(frame)),
                }
            }
            if world.is_terminated() {
                break;
            }
            if self.settings.check_forecasts {
                pending.extend(forecasts.iter().map(|f| Pending {
                    forecast: f.clone(),
                    made_at: world.step,
                    pose,
                    realized: Vec::new(),
                }));
            }
            let world_forecasts: Vec<Forecast<f64>> = match self.settings.approach.space {
                Space::World => forecasts,
                Space::Image => forecasts
                    .iter()
                    .map(|f| image_forecast_to_world(f, &camera, &pose))
                    .collect(),
            };
            let privileged = needs.privileged.then(|| Privileged {
                pose,
                omega: world.agent.omega,
                speed: world.agent.speed,
                agent_radius: cfg.kinematics.agent_radius,
                goal: cfg.goal,
                route: &cfg.route,
                pedestrians: world
                    .pedestrians
                    .iter()
                    .map(|p| (p.id, p.position(), p.extent.radius))
                    .collect(),
                forecasts: &world_forecasts,
            });
            let input = PolicyInput {
                step: world.step,
                alpha: cfg.kinematics.alpha,
                camera: &camera,
                observation: stack.as_ref(),
                privileged,
            };
            let action = policy.act(&input)?;
            let outcome = world.step(action)?;
            if self.settings.log_steps {
                steps.push(StepLog {
                    step: world.step,
                    action,
                    reward: outcome.reward,
                    x: world.agent.pose.position.x,
                    y: world.agent.pose.position.y,
                    heading: world.agent.pose.heading,
                    omega: world.agent.omega,
                });
            }
            if self.settings.check_forecasts {
                pending.retain_mut(|p| {
                    let offset = (world.step - p.made_at) as usize;
                    let due = p.forecast.entries.get(p.realized.len()).map(|e| e.0);
                    if due == Some(offset) {
                        let Some(ped) = world.pedestrian(p.forecast.object_id) else {
                            return false;
                        };
                        let actual = match p.forecast.space {
                            Space::World => Some(BoxState::from_cylinder(&ped.extent)),
                            Space::Image => camera
                                .cylinder_box(&p.pose, &ped.extent)
                                .map(|b| BoxState::from_image_box(&b)),
                        };
                        let Some(actual) = actual else {
                            return false;
                        };
                        p.realized.push(actual);
                    }
                    if p.realized.len() == p.forecast.len() {
                        if let (Ok(a), Ok(f)) =
                            (ade(&p.forecast, &p.realized), fde(&p.forecast, &p.realized))
                        {
                            scores.push(ForecastScore {
                                object_id: p.forecast.object_id,
                                made_at: p.made_at,
                                ade: a,
                                fde: f,
                            });
                        }
                        return false;
                    }
                    true
                });
            }
            if outcome.terminated {
                if needs.observation {
                    let forecasts = bank.update(&world, &camera, &world.agent.pose.clone())?;
                    let frame = self.frame(&world, &forecasts);
                    if let Some(s) = stack.as_mut() {
                        s.push_frame(frame);
                    }
                }
                policy.finish(world.step, &outcome, stack.as_ref())?;
                break;
            }
        }

        let cause = world.terminated.unwrap_or(TerminationCause::Timeout);
        Ok(EpisodeOutcome {
            record: Episode {
                scenario_id: cfg.id.clone(),
                seed,
                cause,
                shortest: self.shortest,
                path: world.path_length,
                steps: world.step,
            },
            steps,
            forecast_scores: scores,
        })
    }
}

/// Ground position helper for tests and tools.
pub fn ground(x: f64, y: f64) -> Vector2<f64> {
    Vector2::new(x, y)
}
