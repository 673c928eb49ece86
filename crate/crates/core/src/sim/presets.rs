//! Built-in scenarios: the S-turn suite, the urban grid route sets and an
//! obstacle-free open field used in tests.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ForecastSettings, Kinematics, PedestrianSpec, ScenarioConfig, SCHEMA_VERSION};
use crate::geometry::{Camera, Polygon, Pose2};
use crate::Error;

/// Number of variants in the S-turn suite.
pub const S_TURN_VARIANTS: usize = 20;
/// Speed range used when evaluating presets, m/s.
pub const EVAL_SPEED_RANGE: [f64; 2] = [0.3, 1.5];
/// Speed range of the training-time distribution, m/s.
pub const TRAIN_SPEED_RANGE: [f64; 2] = [0.6, 1.2];

const S_TURN_LENGTH: f64 = 90.0;
const S_TURN_AMPLITUDE: f64 = 8.0;
const S_TURN_ROAD_WIDTH: f64 = 8.0;
const SIDEWALK_WIDTH: f64 = 2.5;
const S_TURN_PEDESTRIANS: usize = 5;
const S_TURN_SUITE_SEED: u64 = 0x5EED_5700;

/// A named group of scenarios reported together (e.g. seen vs unseen routes).
#[derive(Clone, Debug)]
pub struct ScenarioSet {
    pub name: String,
    pub scenarios: Vec<ScenarioConfig>,
}

fn v(x: f64, y: f64) -> Vector2<f64> {
    Vector2::new(x, y)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon<f64> {
    vec![v(x0, y0), v(x1, y0), v(x1, y1), v(x0, y1)]
}

fn base(
    id: String,
    road: Vec<Polygon<f64>>,
    start: Pose2<f64>,
    goal: Vector2<f64>,
) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        id,
        road,
        boundary: Vec::new(),
        start,
        goal,
        goal_radius: 2.0,
        route: Vec::new(),
        pedestrians: Vec::new(),
        time_limit: 30.0,
        dt: 0.05,
        kinematics: Kinematics::default(),
        forecast: ForecastSettings::default(),
        camera: Camera::default(),
    }
}

/// Straight obstacle-free road from the origin along +x to `(length, 0)`.
pub fn open_field(length: f64) -> ScenarioConfig {
    let mut cfg = base(
        "open-field".into(),
        vec![rect(-5.0, -10.0, length + 5.0, 10.0)],
        Pose2::new(0.0, 0.0, 0.0),
        v(length, 0.0),
    );
    cfg.goal_radius = 1.0;
    cfg.time_limit = 60.0;
    cfg
}

fn s_turn_center(x: f64) -> (Vector2<f64>, Vector2<f64>) {
    let k = std::f64::consts::TAU / S_TURN_LENGTH;
    let c = v(x, S_TURN_AMPLITUDE * (k * x).sin());
    let t = v(1.0, S_TURN_AMPLITUDE * k * (k * x).cos()).normalize();
    (c, v(-t.y, t.x))
}

fn offset_band(xs: &[f64], inner: f64, outer: f64) -> Polygon<f64> {
    let mut poly: Vec<Vector2<f64>> = xs
        .iter()
        .map(|&x| {
            let (c, n) = s_turn_center(x);
            c + n * inner
        })
        .collect();
    poly.extend(xs.iter().rev().map(|&x| {
        let (c, n) = s_turn_center(x);
        c + n * outer
    }));
    poly
}

/// One variant of the S-turn suite. Variants share the road and differ in
/// where and which way the pedestrians cross.
pub fn s_turn(variant: usize) -> ScenarioConfig {
    let xs: Vec<f64> = (0..=60).map(|i| i as f64 * S_TURN_LENGTH / 60.0).collect();
    let half = S_TURN_ROAD_WIDTH / 2.0;
    let road = offset_band(&xs, half, -half);
    let (c0, n0) = s_turn_center(3.0);
    let heading = (-n0.x).atan2(n0.y);
    let (goal, _) = s_turn_center(S_TURN_LENGTH - 3.0);
    let mut cfg = base(
        format!("s-turn-{variant:02}"),
        vec![road],
        Pose2::new(c0.x, c0.y, heading),
        goal,
    );
    cfg.boundary = vec![
        offset_band(&xs, half, half + SIDEWALK_WIDTH),
        offset_band(&xs, -half - SIDEWALK_WIDTH, -half),
    ];
    cfg.route = (0..=90).map(|i| s_turn_center(i as f64).0).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(S_TURN_SUITE_SEED + variant as u64);
    let (lo, hi) = (18.0, 82.0);
    let slot = (hi - lo) / S_TURN_PEDESTRIANS as f64;
    for k in 0..S_TURN_PEDESTRIANS {
        let x = lo + slot * k as f64 + rng.gen_range(1.0..slot - 1.0);
        let (c, n) = s_turn_center(x);
        let reach = half + 2.0;
        let dir = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        cfg.pedestrians.push(PedestrianSpec {
            waypoints: vec![c + n * (reach * dir), c - n * (reach * dir)],
            speed_range: EVAL_SPEED_RANGE,
            phase_range: [0.0, 1.0],
            radius: 0.3,
            height: 1.7,
        });
    }
    cfg
}

pub fn s_turn_suite() -> Vec<ScenarioConfig> {
    (0..S_TURN_VARIANTS).map(s_turn).collect()
}

const GRID_SPACING: f64 = 40.0;
const GRID_COLS: usize = 4;
const GRID_ROWS: usize = 2;
const GRID_ROAD_WIDTH: f64 = 10.0;

/// Routes as intersection sequences `(col, row)`. The first twelve are the
/// seen (training) combinations, the last four unseen.
const GRID_ROUTES: [&[(usize, usize)]; 16] = [
    &[(0, 0), (1, 0), (2, 0), (3, 0)],
    &[(3, 0), (2, 0), (1, 0), (0, 0)],
    &[(0, 1), (1, 1), (2, 1), (3, 1)],
    &[(3, 1), (2, 1), (1, 1), (0, 1)],
    &[(0, 0), (0, 1), (1, 1), (2, 1)],
    &[(1, 0), (1, 1), (2, 1), (3, 1)],
    &[(3, 1), (3, 0), (2, 0), (1, 0)],
    &[(2, 1), (2, 0), (1, 0), (0, 0)],
    &[(0, 1), (0, 0), (1, 0), (2, 0)],
    &[(1, 1), (1, 0), (2, 0), (3, 0)],
    &[(3, 0), (3, 1), (2, 1), (1, 1)],
    &[(2, 0), (2, 1), (1, 1), (0, 1)],
    &[(0, 0), (1, 0), (1, 1), (2, 1), (2, 0), (3, 0)],
    &[(3, 1), (2, 1), (2, 0), (1, 0), (1, 1), (0, 1)],
    &[(0, 1), (1, 1), (1, 0), (2, 0), (2, 1), (3, 1)],
    &[(3, 0), (2, 0), (2, 1), (1, 1), (1, 0), (0, 0)],
];

pub const URBAN_SEEN_ROUTES: std::ops::Range<usize> = 0..12;
pub const URBAN_UNSEEN_ROUTES: std::ops::Range<usize> = 12..16;

fn node(c: usize, r: usize) -> Vector2<f64> {
    v(c as f64 * GRID_SPACING, r as f64 * GRID_SPACING)
}

/// Urban grid with eight intersections; `route` indexes the route table.
pub fn urban_grid(route: usize) -> Result<ScenarioConfig, Error> {
    let nodes = GRID_ROUTES
        .get(route)
        .ok_or_else(|| Error::UnknownPreset(format!("urban-grid route {route}")))?;
    let h = GRID_ROAD_WIDTH / 2.0;
    let (xmax, ymax) = (
        (GRID_COLS - 1) as f64 * GRID_SPACING,
        (GRID_ROWS - 1) as f64 * GRID_SPACING,
    );
    let mut road = Vec::new();
    for r in 0..GRID_ROWS {
        let y = r as f64 * GRID_SPACING;
        road.push(rect(-h, y - h, xmax + h, y + h));
    }
    for c in 0..GRID_COLS {
        let x = c as f64 * GRID_SPACING;
        road.push(rect(x - h, -h, x + h, ymax + h));
    }
    let s = SIDEWALK_WIDTH;
    let mut boundary = vec![
        rect(-h - s, -h - s, xmax + h + s, -h),
        rect(-h - s, ymax + h, xmax + h + s, ymax + h + s),
        rect(-h - s, -h, -h, ymax + h),
        rect(xmax + h, -h, xmax + h + s, ymax + h),
    ];
    for c in 0..GRID_COLS - 1 {
        for r in 0..GRID_ROWS - 1 {
            let (x0, y0) = (c as f64 * GRID_SPACING, r as f64 * GRID_SPACING);
            boundary.push(rect(
                x0 + h,
                y0 + h,
                x0 + GRID_SPACING - h,
                y0 + GRID_SPACING - h,
            ));
        }
    }
    let route_pts: Vec<Vector2<f64>> = nodes.iter().map(|&(c, r)| node(c, r)).collect();
    let d = route_pts[1] - route_pts[0];
    let start = Pose2::new(route_pts[0].x, route_pts[0].y, d.y.atan2(d.x));
    let goal = *route_pts.last().expect("routes are non-empty");
    let split = if URBAN_SEEN_ROUTES.contains(&route) {
        "seen"
    } else {
        "unseen"
    };
    let mut cfg = base(format!("urban-grid-{split}-{route:02}"), road, start, goal);
    cfg.boundary = boundary;
    cfg.goal_radius = 2.5;
    let length: f64 = route_pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    cfg.time_limit = (2.5 * length / cfg.kinematics.speed).ceil();
    cfg.route = route_pts;

    // one crossing pedestrian at the middle of every street segment
    let reach = h + 2.0;
    for r in 0..GRID_ROWS {
        for c in 0..GRID_COLS - 1 {
            let mid = (node(c, r) + node(c + 1, r)) / 2.0;
            cfg.pedestrians.push(crossing(mid, v(0.0, 1.0), reach));
        }
    }
    for c in 0..GRID_COLS {
        for r in 0..GRID_ROWS - 1 {
            let mid = (node(c, r) + node(c, r + 1)) / 2.0;
            cfg.pedestrians.push(crossing(mid, v(1.0, 0.0), reach));
        }
    }
    Ok(cfg)
}

fn crossing(mid: Vector2<f64>, across: Vector2<f64>, reach: f64) -> PedestrianSpec {
    PedestrianSpec {
        waypoints: vec![mid + across * reach, mid - across * reach],
        speed_range: EVAL_SPEED_RANGE,
        phase_range: [0.0, 1.0],
        radius: 0.3,
        height: 1.7,
    }
}

/// Resolves a preset name to one or more scenario sets.
///
/// `s-turn`, `urban-grid` (seen and unseen sets), `urban-grid-seen`,
/// `urban-grid-unseen`, `open-field`.
pub fn preset_sets(name: &str) -> Result<Vec<ScenarioSet>, Error> {
    let grid = |name: &str, routes: std::ops::Range<usize>| -> Result<ScenarioSet, Error> {
        Ok(ScenarioSet {
            name: name.into(),
            scenarios: routes.map(urban_grid).collect::<Result<_, _>>()?,
        })
    };
    Ok(match name {
        "s-turn" => vec![ScenarioSet {
            name: "s-turn".into(),
            scenarios: s_turn_suite(),
        }],
        "urban-grid" => vec![
            grid("urban-grid-seen", URBAN_SEEN_ROUTES)?,
            grid("urban-grid-unseen", URBAN_UNSEEN_ROUTES)?,
        ],
        "urban-grid-seen" => vec![grid("urban-grid-seen", URBAN_SEEN_ROUTES)?],
        "urban-grid-unseen" => vec![grid("urban-grid-unseen", URBAN_UNSEEN_ROUTES)?],
        "open-field" => vec![ScenarioSet {
            name: "open-field".into(),
            scenarios: vec![open_field(60.0)],
        }],
        other => return Err(Error::UnknownPreset(other.into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for cfg in s_turn_suite() {
            cfg.validate().unwrap();
        }
        for r in 0..GRID_ROUTES.len() {
            urban_grid(r).unwrap().validate().unwrap();
        }
        open_field(30.0).validate().unwrap();
    }

    #[test]
    fn route_splits() {
        let sets = preset_sets("urban-grid").unwrap();
        assert_eq!(sets[0].scenarios.len(), 12);
        assert_eq!(sets[1].scenarios.len(), 4);
        assert!(preset_sets("nope").is_err());
    }

    #[test]
    fn variants_are_stable_and_distinct() {
        assert_eq!(s_turn(4), s_turn(4));
        assert_ne!(s_turn(4).pedestrians, s_turn(5).pedestrians);
    }

    #[test]
    fn route_lies_on_road() {
        for cfg in s_turn_suite()
            .iter()
            .take(1)
            .chain(std::iter::once(&urban_grid(12).unwrap()))
        {
            for p in &cfg.route {
                assert!(cfg.is_drivable(p), "{} {p:?}", cfg.id);
            }
        }
    }
}
