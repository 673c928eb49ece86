use std::sync::Arc;

use nalgebra::{Rotation2, Vector2};

use super::ground::GroundGrid;
use super::raster::{polygon_spans, Span};
use super::{Class, LabelImage, PedestrianStyle, RenderMode};
use crate::geometry::{convex_hull, Camera, ImageBox, Pose2};
use crate::sim::{ScenarioConfig, WorldState};

/// Image footprint of one pedestrian.
#[derive(Clone, Debug, PartialEq)]
pub struct PedestrianLayer {
    pub id: u32,
    /// Ground distance from the camera.
    pub depth: f64,
    pub image_box: ImageBox<f64>,
    pub spans: Vec<Span>,
}

fn box_spans(b: &ImageBox<f64>, width: usize, height: usize) -> Vec<Span> {
    let clip = |v: f64, hi: usize| v.floor().clamp(0.0, hi as f64) as usize;
    let (c0, c1) = (clip(b.x, width), clip(b.x + b.w, width));
    let (r0, r1) = (clip(b.y, height), clip(b.y + b.h, height));
    if c1 <= c0 {
        return Vec::new();
    }
    (r0..r1).map(|row| Span { row, c0, c1 }).collect()
}

/// Visible pedestrians ordered far to near (ties by id), so painting in order
/// lets nearer pedestrians overdraw farther ones.
pub fn pedestrian_layers(
    world: &WorldState,
    camera: &Camera<f64>,
    pose: &Pose2<f64>,
    style: PedestrianStyle,
) -> Vec<PedestrianLayer> {
    let (w, h) = (camera.image_width as usize, camera.image_height as usize);
    let mut layers: Vec<PedestrianLayer> = world
        .pedestrians
        .iter()
        .filter_map(|p| {
            let image_box = camera.project_cylinder(pose, &p.extent)?;
            let spans = match style {
                PedestrianStyle::Box => box_spans(&image_box, w, h),
                PedestrianStyle::Contour => {
                    let samples = camera.cylinder_samples(pose, &p.extent)?;
                    polygon_spans(&convex_hull(&samples), w, h)
                }
            };
            Some(PedestrianLayer {
                id: p.id,
                depth: (p.position() - pose.position).norm(),
                image_box,
                spans,
            })
        })
        .collect();
    layers.sort_by(|a, b| b.depth.total_cmp(&a.depth).then(a.id.cmp(&b.id)));
    layers
}

/// Per-scenario render cache: the ground class grid and the ground offset
/// (forward, left) seen through every pixel centre.
#[derive(Clone, Debug)]
pub struct SceneRenderer {
    camera: Camera<f64>,
    grid: Arc<GroundGrid>,
    rays: Vec<Option<Vector2<f64>>>,
}

impl SceneRenderer {
    pub fn new(cfg: &ScenarioConfig, camera: Camera<f64>) -> Self {
        Self::with_grid(
            Arc::new(GroundGrid::build(cfg, GroundGrid::DEFAULT_CELL)),
            camera,
        )
    }

    pub fn with_grid(grid: Arc<GroundGrid>, camera: Camera<f64>) -> Self {
        let origin = Pose2::new(0.0, 0.0, 0.0);
        let (w, h) = (camera.image_width as usize, camera.image_height as usize);
        let rays = (0..w * h)
            .map(|i| {
                let (c, r) = ((i % w) as f64 + 0.5, (i / w) as f64 + 0.5);
                camera.pixel_to_ground(&origin, c, r)
            })
            .collect();
        Self { camera, grid, rays }
    }

    pub fn camera(&self) -> &Camera<f64> {
        &self.camera
    }

    pub fn grid(&self) -> &Arc<GroundGrid> {
        &self.grid
    }

    /// Ground, goal marker and pedestrians. Overlays are applied separately.
    pub fn render(&self, world: &WorldState, style: PedestrianStyle) -> LabelImage {
        let cfg = &world.config;
        let pose = world.agent.pose;
        let (w, h) = (
            self.camera.image_width as usize,
            self.camera.image_height as usize,
        );
        let mut img = LabelImage::new(w, h);
        let rot = Rotation2::new(pose.heading);
        let goal_r2 = cfg.goal_radius * cfg.goal_radius;
        for (i, ray) in self.rays.iter().enumerate() {
            let Some(local) = ray else { continue };
            let p = pose.position + rot * local;
            let (c, r) = (i % w, i / w);
            img.paint(c, r, self.grid.class_at(&p));
            if (p - cfg.goal).norm_squared() <= goal_r2 {
                img.paint(c, r, Class::Goal);
            }
        }
        for layer in pedestrian_layers(world, &self.camera, &pose, style) {
            for s in &layer.spans {
                for c in s.c0..s.c1 {
                    img.paint(c, s.row, Class::Pedestrian);
                }
            }
        }
        img
    }
}

/// Renders the scene from the agent's pose. `mode.overlay` is not consulted:
/// overlays need forecasts and are painted on top by the caller.
pub fn rasterize_scene(world: &WorldState, camera: &Camera<f64>, mode: RenderMode) -> LabelImage {
    SceneRenderer::new(&world.config, *camera).render(world, mode.pedestrian_style)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::Overlay;
    use crate::sim::{presets, sample_scenario, PedestrianSpec};

    fn mode(style: PedestrianStyle) -> RenderMode {
        RenderMode {
            pedestrian_style: style,
            overlay: Overlay::None,
        }
    }

    fn with_peds(points: &[(f64, f64)]) -> WorldState {
        let mut cfg = presets::open_field(40.0);
        for &(x, y) in points {
            let at = Vector2::new(x, y);
            cfg.pedestrians.push(PedestrianSpec {
                waypoints: vec![at, at + Vector2::new(0.0, 1.0)],
                speed_range: [0.0, 0.0],
                phase_range: [0.0, 0.0],
                radius: 0.3,
                height: 1.7,
            });
        }
        sample_scenario(Arc::new(cfg), 0).unwrap()
    }

    #[test]
    fn empty_world_over_road() {
        let world = with_peds(&[]);
        let mut w = (*world.config).clone();
        w.goal = Vector2::new(400.0, 0.0);
        let world = sample_scenario(Arc::new(w), 0).unwrap_or(world);
        let img = rasterize_scene(&world, &world.config.camera, mode(PedestrianStyle::Contour));
        for c in img.classes_present() {
            assert!(
                matches!(c, Class::Road | Class::Background | Class::Goal),
                "{c:?}"
            );
        }
        assert!(img.count(Class::Road) > 0);
    }

    #[test]
    fn box_style_fills_projected_box() {
        let world = with_peds(&[(6.0, 0.0)]);
        let cam = world.config.camera;
        let img = rasterize_scene(&world, &cam, mode(PedestrianStyle::Box));
        let b = cam
            .project_cylinder(&world.agent.pose, &world.pedestrians[0].extent)
            .unwrap();
        let (c0, c1) = (b.x.floor() as usize, (b.x + b.w).floor() as usize);
        let (r0, r1) = (b.y.floor() as usize, (b.y + b.h).floor() as usize);
        for (c, r, k) in img.pixels() {
            let inside = (c0..c1).contains(&c) && (r0..r1).contains(&r);
            assert_eq!(k == Class::Pedestrian, inside, "({c},{r})");
        }
    }

    #[test]
    fn nearer_pedestrian_wins_overlap() {
        let world = with_peds(&[(8.0, 0.0), (4.0, 0.1)]);
        let cam = world.config.camera;
        let layers = pedestrian_layers(&world, &cam, &world.agent.pose, PedestrianStyle::Contour);
        assert_eq!(layers.iter().map(|l| l.id).collect::<Vec<_>>(), vec![0, 1]);
        let mut owner = vec![None; 180 * 84];
        for l in &layers {
            for s in &l.spans {
                for c in s.c0..s.c1 {
                    owner[s.row * 180 + c] = Some(l.id);
                }
            }
        }
        let set = |id: usize| -> std::collections::HashSet<usize> {
            layers[id]
                .spans
                .iter()
                .flat_map(|s| (s.c0..s.c1).map(move |c| s.row * 180 + c))
                .collect()
        };
        let (far, near) = (set(0), set(1));
        let overlap: Vec<_> = far.intersection(&near).collect();
        assert!(!overlap.is_empty());
        for px in overlap {
            assert_eq!(owner[*px], Some(1));
        }
        let img = rasterize_scene(&world, &cam, mode(PedestrianStyle::Contour));
        assert_eq!(img.count(Class::Pedestrian), far.union(&near).count());
    }

    #[test]
    fn styles_differ_only_in_pedestrian_pixels() {
        let world = sample_scenario(Arc::new(presets::s_turn(3)), 11).unwrap();
        let mut world = world;
        for _ in 0..120 {
            world.step(crate::sim::Action::Noop).ok();
        }
        let cam = world.config.camera;
        let a = rasterize_scene(&world, &cam, mode(PedestrianStyle::Contour));
        let b = rasterize_scene(&world, &cam, mode(PedestrianStyle::Box));
        for ((_, _, x), (_, _, y)) in a.pixels().zip(b.pixels()) {
            if x != y {
                assert!(x == Class::Pedestrian || y == Class::Pedestrian);
            }
        }
        assert_eq!(
            a,
            rasterize_scene(&world, &cam, mode(PedestrianStyle::Contour))
        );
    }
}
