use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{Needs, Policy, PolicyInput, Privileged};
use crate::geometry::Pose2;
use crate::render::Class;
use crate::sim::Action;
use crate::Error;

fn require<'a, 'b>(input: &'b PolicyInput<'a>) -> Result<&'b Privileged<'a>, Error> {
    input
        .privileged
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("policy needs the privileged bundle".into()))
}

/// Always NOOP.
#[derive(Clone, Copy, Debug, Default)]
pub struct Straight;

impl Policy for Straight {
    fn name(&self) -> &str {
        "straight"
    }

    fn needs(&self) -> Needs {
        Needs::default()
    }

    fn act(&mut self, _input: &PolicyInput<'_>) -> Result<Action, Error> {
        Ok(Action::Noop)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PursuitParams {
    /// Distance ahead along the route to aim at, metres.
    pub lookahead: f64,
    pub deadband_deg: f64,
}

impl Default for PursuitParams {
    fn default() -> Self {
        Self {
            lookahead: 8.0,
            deadband_deg: 5.0,
        }
    }
}

impl PursuitParams {
    /// Point `lookahead` metres past the closest route point, or the goal when
    /// the route is missing, exhausted or the goal is nearer.
    pub fn target(
        &self,
        pose: &Pose2<f64>,
        route: &[Vector2<f64>],
        goal: Vector2<f64>,
    ) -> Vector2<f64> {
        if route.len() < 2 || (goal - pose.position).norm() <= self.lookahead {
            return goal;
        }
        let p = pose.position;
        let (mut best, mut best_s, mut s) = (f64::INFINITY, 0.0, 0.0);
        for w in route.windows(2) {
            let d = w[1] - w[0];
            let len = d.norm();
            let t = if len > 0.0 {
                ((p - w[0]).dot(&d) / (len * len)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let dist = (w[0] + d * t - p).norm();
            if dist < best {
                best = dist;
                best_s = s + t * len;
            }
            s += len;
        }
        let mut want = best_s + self.lookahead;
        for w in route.windows(2) {
            let len = (w[1] - w[0]).norm();
            if want <= len && len > 0.0 {
                return w[0] + (w[1] - w[0]) * (want / len);
            }
            want -= len;
        }
        goal
    }

    /// Signed distance (left positive) from the closest route segment, `None`
    /// without a route.
    pub fn route_offset(p: &Vector2<f64>, route: &[Vector2<f64>]) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for w in route.windows(2) {
            let d = w[1] - w[0];
            let len2 = d.norm_squared();
            if len2 == 0.0 {
                continue;
            }
            let t = ((p - w[0]).dot(&d) / len2).clamp(0.0, 1.0);
            let r = p - (w[0] + d * t);
            let dist = r.norm();
            if best.is_none_or(|(b, _)| dist < b) {
                let side = d.x * r.y - d.y * r.x;
                best = Some((dist, if side < 0.0 { -dist } else { dist }));
            }
        }
        best.map(|(_, o)| o)
    }

    /// `+1` right, `-1` left, `0` inside the deadband.
    pub fn steer(&self, pose: &Pose2<f64>, target: &Vector2<f64>) -> i8 {
        let bearing = pose.bearing_to(target).to_degrees();
        if bearing.abs() <= self.deadband_deg {
            0
        } else if bearing > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Bang-bang pursuit of a lookahead point on the route.
#[derive(Clone, Copy, Debug, Default)]
pub struct PurePursuit {
    pub params: PursuitParams,
}

impl PurePursuit {
    pub fn new(params: PursuitParams) -> Self {
        Self { params }
    }
}

impl Policy for PurePursuit {
    fn name(&self) -> &str {
        "pure-pursuit"
    }

    fn needs(&self) -> Needs {
        Needs {
            observation: false,
            privileged: true,
        }
    }

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action, Error> {
        let pv = require(input)?;
        let target = self.params.target(&pv.pose, pv.route, pv.goal);
        Ok(command(
            self.params.steer(&pv.pose, &target),
            pv.omega,
            input.alpha,
        ))
    }
}

/// Turn command for `sign`. A turn against the current rotation starts with
/// NOOP, which stops the rotation at once instead of ramping it down.
fn command(sign: i8, omega: f64, alpha: f64) -> Action {
    if omega * f64::from(sign) < 0.0 {
        Action::Noop
    } else {
        Action::turn_sign(sign, alpha)
    }
}

/// Straight strip ahead of the agent swept over the lookahead time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corridor {
    pub pose: Pose2<f64>,
    pub length: f64,
    pub half_width: f64,
}

impl Corridor {
    /// Lateral (left-positive) offset of a disc that overlaps the corridor.
    pub fn hit(&self, center: &Vector2<f64>, radius: f64) -> Option<f64> {
        let local = self.pose.to_local(center);
        let (fwd, left) = (local.x, local.y);
        (fwd >= -radius && fwd <= self.length + radius && left.abs() <= self.half_width + radius)
            .then_some(left)
    }
}

/// Chooses the avoidance turn from hit offsets: away from the side the hits
/// lie on, toward `goal_sign` on a tie. `None` without hits.
fn avoidance_sign(hits: &[f64], goal_sign: i8) -> Option<i8> {
    if hits.is_empty() {
        return None;
    }
    let mean = hits.iter().sum::<f64>() / hits.len() as f64;
    Some(if mean > 1e-9 {
        1
    } else if mean < -1e-9 || goal_sign < 0 {
        -1
    } else {
        1
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AvoidParams {
    pub pursuit: PursuitParams,
    /// Extra corridor width beyond the agent diameter, metres.
    pub margin: f64,
    /// Corridor length as travel time at the current speed, seconds.
    pub lookahead_time: f64,
    /// Steps an avoidance turn is kept after the corridor clears.
    pub hold_steps: u32,
    /// Avoidance never steers further out once the agent, looking half the
    /// corridor ahead, is this far from the route, metres.
    pub max_route_offset: f64,
}

impl Default for AvoidParams {
    fn default() -> Self {
        Self {
            pursuit: PursuitParams::default(),
            margin: 0.3,
            lookahead_time: 1.5,
            hold_steps: 5,
            max_route_offset: 2.5,
        }
    }
}

impl AvoidParams {
    pub fn corridor(&self, pose: Pose2<f64>, speed: f64, agent_radius: f64) -> Corridor {
        Corridor {
            pose,
            length: speed * self.lookahead_time,
            half_width: agent_radius + 0.5 * self.margin,
        }
    }

    /// Drops an avoidance sign that would carry the agent off the route band.
    pub fn guard(
        &self,
        avoid: Option<i8>,
        pose: &Pose2<f64>,
        speed: f64,
        route: &[Vector2<f64>],
    ) -> Option<i8> {
        let sign = avoid?;
        let ahead = pose.position + pose.forward() * (0.5 * speed * self.lookahead_time);
        match PursuitParams::route_offset(&ahead, route) {
            Some(o)
                if (sign > 0 && o <= -self.max_route_offset)
                    || (sign < 0 && o >= self.max_route_offset) =>
            {
                None
            }
            _ => Some(sign),
        }
    }
}

/// Keeps the last avoidance sign for a few steps so the manoeuvre is not
/// abandoned the moment the obstacle leaves the corridor.
#[derive(Clone, Copy, Debug, Default)]
struct Hold {
    sign: i8,
    left: u32,
}

impl Hold {
    fn choose(&mut self, avoid: Option<i8>, steer: i8, hold_steps: u32) -> i8 {
        match avoid {
            Some(s) => {
                *self = Hold {
                    sign: s,
                    left: hold_steps,
                };
                s
            }
            None if self.left > 0 => {
                self.left -= 1;
                self.sign
            }
            None => steer,
        }
    }
}

/// Pure pursuit that turns away from forecast footprints entering its corridor.
#[derive(Clone, Copy, Debug, Default)]
pub struct ForecastAvoid {
    pub params: AvoidParams,
    hold: Hold,
}

impl ForecastAvoid {
    pub fn new(params: AvoidParams) -> Self {
        Self {
            params,
            hold: Hold::default(),
        }
    }
}

impl Policy for ForecastAvoid {
    fn name(&self) -> &str {
        "forecast-avoid"
    }

    fn reset(&mut self, _scenario: &str, _seed: u64) -> Result<(), Error> {
        self.hold = Hold::default();
        Ok(())
    }

    fn needs(&self) -> Needs {
        Needs {
            observation: false,
            privileged: true,
        }
    }

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action, Error> {
        let pv = require(input)?;
        let p = self.params;
        let target = p.pursuit.target(&pv.pose, pv.route, pv.goal);
        let steer = p.pursuit.steer(&pv.pose, &target);
        let corridor = p.corridor(pv.pose, pv.speed, pv.agent_radius);
        let hits: Vec<f64> = pv
            .forecasts
            .iter()
            .flat_map(|f| f.boxes())
            .filter_map(|b| corridor.hit(&b.center(), 0.5 * b.w))
            .collect();
        let goal_sign = if pv.pose.bearing_to(&target) < 0.0 {
            -1
        } else {
            1
        };
        let avoid = avoidance_sign(&hits, goal_sign);
        let sign = self.hold.choose(avoid, steer, p.hold_steps);
        let sign = if p.guard(Some(sign), &pv.pose, pv.speed, pv.route).is_none() {
            self.hold = Hold::default();
            steer
        } else {
            sign
        };
        Ok(command(sign, pv.omega, input.alpha))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PixelParams {
    pub avoid: AvoidParams,
    /// Classes treated as obstacles when reading the observation.
    pub classes: Vec<Class>,
}

impl Default for PixelParams {
    fn default() -> Self {
        Self {
            avoid: AvoidParams::default(),
            classes: vec![Class::Pedestrian, Class::ForecastBox, Class::ForecastPath],
        }
    }
}

/// Corridor test on the newest observation frame: in every column the lowest
/// obstacle-class pixel is back-projected to the ground. Navigation uses the
/// privileged pose and route.
#[derive(Clone, Debug, Default)]
pub struct PixelAvoid {
    pub params: PixelParams,
    hold: Hold,
}

impl PixelAvoid {
    pub fn new(params: PixelParams) -> Self {
        Self {
            params,
            hold: Hold::default(),
        }
    }

    /// Left offsets of obstacle columns whose nearest ground contact is inside the corridor.
    pub fn corridor_hits(&self, input: &PolicyInput<'_>, corridor: &Corridor) -> Vec<f64> {
        let Some(obs) = input.observation else {
            return Vec::new();
        };
        let img = obs.newest();
        let local = Pose2::new(0.0, 0.0, 0.0);
        let ego = Corridor {
            pose: local,
            ..*corridor
        };
        let mut hits = Vec::new();
        for c in 0..img.width() {
            let Some(r) = (0..img.height())
                .rev()
                .find(|&r| self.params.classes.contains(&img.get(c, r)))
            else {
                continue;
            };
            if let Some(g) = input
                .camera
                .pixel_to_ground(&local, c as f64 + 0.5, r as f64 + 0.5)
            {
                if let Some(left) = ego.hit(&g, 0.0) {
                    hits.push(left);
                }
            }
        }
        hits
    }
}

impl Policy for PixelAvoid {
    fn name(&self) -> &str {
        "pixel-avoid"
    }

    fn reset(&mut self, _scenario: &str, _seed: u64) -> Result<(), Error> {
        self.hold = Hold::default();
        Ok(())
    }

    fn needs(&self) -> Needs {
        Needs {
            observation: true,
            privileged: true,
        }
    }

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action, Error> {
        let pv = require(input)?;
        let p = self.params.avoid;
        let target = p.pursuit.target(&pv.pose, pv.route, pv.goal);
        let steer = p.pursuit.steer(&pv.pose, &target);
        let corridor = p.corridor(pv.pose, pv.speed, pv.agent_radius);
        let hits = self.corridor_hits(input, &corridor);
        let goal_sign = if pv.pose.bearing_to(&target) < 0.0 {
            -1
        } else {
            1
        };
        let avoid = avoidance_sign(&hits, goal_sign);
        let sign = self.hold.choose(avoid, steer, p.hold_steps);
        let sign = if p.guard(Some(sign), &pv.pose, pv.speed, pv.route).is_none() {
            self.hold = Hold::default();
            steer
        } else {
            sign
        };
        Ok(command(sign, pv.omega, input.alpha))
    }
}
