use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::Pose2;
use crate::{Error, Real};

/// Points sampled on each of the top and bottom circles of a cylinder.
pub const SILHOUETTE_SAMPLES: usize = 32;

/// Pinhole camera rigidly mounted on a ground pose.
///
/// Camera frame: `z` forward, `x` right, `y` down. Pitch is positive nose-down.
/// Pixels are square, so the vertical focal length equals the horizontal one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound = "T: Real + Serialize + serde::de::DeserializeOwned"
)]
pub struct Camera<T: Real> {
    pub mount_height: T,
    pub pitch: T,
    pub horizontal_fov: T,
    pub image_width: u32,
    pub image_height: u32,
    pub near_plane: T,
}

impl<T: Real> Default for Camera<T> {
    fn default() -> Self {
        Self {
            mount_height: T::lit(1.2),
            pitch: T::zero(),
            horizontal_fov: T::FRAC_PI_2(),
            image_width: 180,
            image_height: 84,
            near_plane: T::lit(0.1),
        }
    }
}

impl<T: Real> Camera<T> {
    pub fn new(mount_height: T, pitch: T, horizontal_fov: T) -> Result<Self, Error> {
        let cam = Self {
            mount_height,
            pitch,
            horizontal_fov,
            ..Self::default()
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.horizontal_fov > T::zero() && self.horizontal_fov < T::PI()) {
            return Err(Error::InvalidCamera(
                "horizontal fov must lie in (0, pi)".into(),
            ));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::InvalidCamera(
                "image dimensions must be positive".into(),
            ));
        }
        if !(self.near_plane > T::zero()) {
            return Err(Error::InvalidCamera("near plane must be positive".into()));
        }
        Ok(())
    }

    pub fn focal_length(&self) -> T {
        T::lit(self.image_width as f64 / 2.0) / (self.horizontal_fov / T::lit(2.0)).tan()
    }

    pub fn principal_point(&self) -> Vector2<T> {
        Vector2::new(
            T::lit(self.image_width as f64 / 2.0),
            T::lit(self.image_height as f64 / 2.0),
        )
    }

    /// Camera axes `(right, down, forward)` expressed in world coordinates.
    fn axes(&self, pose: &Pose2<T>) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
        let (s, c) = pose.heading.sin_cos();
        let flat_fwd = Vector3::new(c, s, T::zero());
        let right = Vector3::new(s, -c, T::zero());
        let flat_down = Vector3::new(T::zero(), T::zero(), -T::one());
        let (sp, cp) = self.pitch.sin_cos();
        let forward = flat_fwd * cp + flat_down * sp;
        let down = flat_down * cp - flat_fwd * sp;
        (right, down, forward)
    }

    fn optical_center(&self, pose: &Pose2<T>) -> Vector3<T> {
        Vector3::new(pose.position.x, pose.position.y, self.mount_height)
    }

    pub fn world_to_camera(&self, pose: &Pose2<T>, point: &Vector3<T>) -> Vector3<T> {
        let (right, down, forward) = self.axes(pose);
        let d = point - self.optical_center(pose);
        Vector3::new(d.dot(&right), d.dot(&down), d.dot(&forward))
    }

    /// Projects a camera-frame point; `None` at or behind the near plane.
    pub fn project_camera_point(&self, p: &Vector3<T>) -> Option<Vector2<T>> {
        if p.z <= self.near_plane {
            return None;
        }
        let f = self.focal_length();
        let c = self.principal_point();
        Some(Vector2::new(c.x + f * p.x / p.z, c.y + f * p.y / p.z))
    }

    pub fn project_point(&self, pose: &Pose2<T>, point: &Vector3<T>) -> Option<Vector2<T>> {
        self.project_camera_point(&self.world_to_camera(pose, point))
    }

    /// Intersects the ray through image location `(u, v)` with the ground plane.
    pub fn pixel_to_ground(&self, pose: &Pose2<T>, u: T, v: T) -> Option<Vector2<T>> {
        let f = self.focal_length();
        let c = self.principal_point();
        let (right, down, forward) = self.axes(pose);
        let dir = right * ((u - c.x) / f) + down * ((v - c.y) / f) + forward;
        if dir.z >= T::zero() {
            return None;
        }
        let origin = self.optical_center(pose);
        let t = -origin.z / dir.z;
        Some(Vector2::new(origin.x + dir.x * t, origin.y + dir.y * t))
    }

    /// Projected silhouette samples of a cylinder (top and bottom circles).
    /// Samples at or behind the near plane are dropped; `None` if none remain.
    pub fn cylinder_samples(&self, pose: &Pose2<T>, cyl: &Cylinder<T>) -> Option<Vec<Vector2<T>>> {
        self.cylinder_samples_n(pose, cyl, SILHOUETTE_SAMPLES)
    }

    pub fn cylinder_samples_n(
        &self,
        pose: &Pose2<T>,
        cyl: &Cylinder<T>,
        samples: usize,
    ) -> Option<Vec<Vector2<T>>> {
        let mut out = Vec::with_capacity(2 * samples);
        for i in 0..samples {
            let a = T::TAU() * T::lit(i as f64) / T::lit(samples as f64);
            let (s, c) = a.sin_cos();
            let gx = cyl.center.x + cyl.radius * c;
            let gy = cyl.center.y + cyl.radius * s;
            for z in [T::zero(), cyl.height] {
                if let Some(px) = self.project_point(pose, &Vector3::new(gx, gy, z)) {
                    out.push(px);
                }
            }
        }
        (!out.is_empty()).then_some(out)
    }

    /// Tight image box around the cylinder silhouette, `None` when the cylinder
    /// is behind the camera or entirely outside the image.
    pub fn project_cylinder(&self, pose: &Pose2<T>, cyl: &Cylinder<T>) -> Option<ImageBox<T>> {
        let bx = self.cylinder_box(pose, cyl)?;
        bx.intersects_image(self.image_width, self.image_height)
            .then_some(bx)
    }

    /// Silhouette box without the image-bounds test.
    pub fn cylinder_box(&self, pose: &Pose2<T>, cyl: &Cylinder<T>) -> Option<ImageBox<T>> {
        ImageBox::bounding(&self.cylinder_samples(pose, cyl)?)
    }
}

/// Ground-standing pedestrian volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct Cylinder<T: Real> {
    pub center: Vector2<T>,
    pub radius: T,
    pub height: T,
}

impl<T: Real> Cylinder<T> {
    pub fn new(center: Vector2<T>, radius: T, height: T) -> Result<Self, Error> {
        if !(radius > T::zero() && height > T::zero()) {
            return Err(Error::InvalidCylinder);
        }
        Ok(Self {
            center,
            radius,
            height,
        })
    }
}

/// Image-space box: upper-left corner `(x, y)` plus width and height, in pixels.
/// Real-valued; quantized only when rasterized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct ImageBox<T: Real> {
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
}

impl<T: Real> ImageBox<T> {
    pub fn new(x: T, y: T, w: T, h: T) -> Self {
        Self {
            x,
            y,
            w: w.max(T::zero()),
            h: h.max(T::zero()),
        }
    }

    pub fn bounding(points: &[Vector2<T>]) -> Option<Self> {
        let first = points.first()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
        for p in &points[1..] {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        Some(Self::new(x0, y0, x1 - x0, y1 - y0))
    }

    pub fn center(&self) -> Vector2<T> {
        let half = T::lit(0.5);
        Vector2::new(self.x + self.w * half, self.y + self.h * half)
    }

    pub fn bottom_left(&self) -> Vector2<T> {
        Vector2::new(self.x, self.y + self.h)
    }

    pub fn bottom_right(&self) -> Vector2<T> {
        Vector2::new(self.x + self.w, self.y + self.h)
    }

    pub fn area(&self) -> T {
        self.w * self.h
    }

    pub fn contains(&self, p: &Vector2<T>) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }

    pub fn intersects_image(&self, width: u32, height: u32) -> bool {
        self.x < T::lit(width as f64)
            && self.y < T::lit(height as f64)
            && self.x + self.w > T::zero()
            && self.y + self.h > T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn cam() -> Camera<f64> {
        Camera::new(1.0, 0.0, FRAC_PI_2).unwrap()
    }

    #[test]
    fn world_to_camera_cases() {
        let c = cam();
        let pose = Pose2::new(0.0, 0.0, 0.0);
        let p = c.world_to_camera(&pose, &Vector3::new(5.0, 0.0, 1.0));
        assert_relative_eq!(p, Vector3::new(0.0, 0.0, 5.0), epsilon = 1e-12);
        let p = c.world_to_camera(&pose, &Vector3::new(5.0, 0.0, 0.0));
        assert_relative_eq!(p, Vector3::new(0.0, 1.0, 5.0), epsilon = 1e-12);
        let rotated = Pose2::new(0.0, 0.0, FRAC_PI_2);
        let p = c.world_to_camera(&rotated, &Vector3::new(0.0, 5.0, 1.0));
        assert_relative_eq!(p, Vector3::new(0.0, 0.0, 5.0), epsilon = 1e-12);
    }

    #[test]
    fn project_point_cases() {
        let c = cam();
        let on_axis = c
            .project_camera_point(&Vector3::new(0.0, 0.0, 5.0))
            .unwrap();
        assert_relative_eq!(on_axis, Vector2::new(90.0, 42.0), epsilon = 1e-12);
        assert!(c
            .project_camera_point(&Vector3::new(1.0, 0.0, 0.0))
            .is_none());
        let edge = c
            .project_camera_point(&Vector3::new(5.0 * (FRAC_PI_2 / 2.0).tan(), 0.0, 5.0))
            .unwrap();
        assert_relative_eq!(edge.x, 180.0, epsilon = 1e-9);
    }

    #[test]
    fn pitch_tilts_down() {
        let c = Camera::new(1.0, 0.2, FRAC_PI_2).unwrap();
        let pose = Pose2::new(0.0, 0.0, 0.0);
        // a point along the pitched optical axis
        let p = Vector3::new(5.0 * 0.2f64.cos(), 0.0, 1.0 - 5.0 * 0.2f64.sin());
        let px = c.project_point(&pose, &p).unwrap();
        assert_relative_eq!(px, Vector2::new(90.0, 42.0), epsilon = 1e-9);
    }

    #[test]
    fn ground_back_projection_inverts_projection() {
        let c = Camera::<f64>::default();
        let pose = Pose2::new(3.0, -2.0, 0.7);
        let g = Vector2::new(8.0, 2.5);
        let px = c
            .project_point(&pose, &Vector3::new(g.x, g.y, 0.0))
            .unwrap();
        let back = c.pixel_to_ground(&pose, px.x, px.y).unwrap();
        assert_relative_eq!(back, g, epsilon = 1e-9);
        assert!(c.pixel_to_ground(&pose, 90.0, 10.0).is_none());
    }

    #[test]
    fn cylinder_behind_is_absent() {
        let c = Camera::<f64>::default();
        let pose = Pose2::new(0.0, 0.0, 0.0);
        let cyl = Cylinder::new(Vector2::new(-5.0, 0.0), 0.3, 1.7).unwrap();
        assert!(c.project_cylinder(&pose, &cyl).is_none());
    }

    #[test]
    fn cylinder_outside_frustum_is_absent() {
        let c = Camera::<f64>::default();
        let pose = Pose2::new(0.0, 0.0, 0.0);
        let cyl = Cylinder::new(Vector2::new(2.0, 30.0), 0.3, 1.7).unwrap();
        assert!(c.project_cylinder(&pose, &cyl).is_none());
    }

    #[test]
    fn farther_cylinder_is_smaller() {
        let c = Camera::<f64>::default();
        let pose = Pose2::new(0.0, 0.0, 0.0);
        let near = c
            .project_cylinder(
                &pose,
                &Cylinder::new(Vector2::new(5.0, 0.0), 0.3, 1.7).unwrap(),
            )
            .unwrap();
        let far = c
            .project_cylinder(
                &pose,
                &Cylinder::new(Vector2::new(10.0, 0.0), 0.3, 1.7).unwrap(),
            )
            .unwrap();
        assert!(far.area() <= near.area());
    }

    /// Dense projector: 320 samples per circle plus 20 intermediate rings.
    fn dense_box(c: &Camera<f64>, pose: &Pose2<f64>, cyl: &Cylinder<f64>) -> ImageBox<f64> {
        let mut pts = Vec::new();
        let n = SILHOUETTE_SAMPLES * 10;
        for i in 0..n {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            for k in 0..=20 {
                let z = cyl.height * k as f64 / 20.0;
                let w = Vector3::new(
                    cyl.center.x + cyl.radius * a.cos(),
                    cyl.center.y + cyl.radius * a.sin(),
                    z,
                );
                let cp = c.world_to_camera(pose, &w);
                let f = c.focal_length();
                pts.push(Vector2::new(90.0 + f * cp.x / cp.z, 42.0 + f * cp.y / cp.z));
            }
        }
        ImageBox::bounding(&pts).unwrap()
    }

    #[test]
    fn cylinder_box_matches_dense_oracle() {
        let c = Camera::<f64>::default();
        let pose = Pose2::new(0.0, 0.0, 0.0);
        let cyl = Cylinder::new(Vector2::new(6.0, 0.0), 0.3, 1.7).unwrap();
        let bx = c.project_cylinder(&pose, &cyl).unwrap();
        let oracle = dense_box(&c, &pose, &cyl);
        for (a, b) in [
            (bx.x, oracle.x),
            (bx.y, oracle.y),
            (bx.x + bx.w, oracle.x + oracle.w),
            (bx.y + bx.h, oracle.y + oracle.h),
        ] {
            assert!((a - b).abs() < 1.0, "{a} vs {b}");
        }
        assert!((bx.center().x - 90.0).abs() < 0.5);
    }

    #[test]
    fn box_contains_axis_points() {
        let c = Camera::<f64>::default();
        let pose = Pose2::new(1.0, 2.0, 0.3);
        let cyl = Cylinder::new(Vector2::new(7.0, 4.0), 0.3, 1.7).unwrap();
        let bx = c.project_cylinder(&pose, &cyl).unwrap();
        for z in [0.0, 1.7] {
            let p = c
                .project_point(&pose, &Vector3::new(cyl.center.x, cyl.center.y, z))
                .unwrap();
            assert!(bx.contains(&p));
        }
    }

    #[test]
    fn invalid_camera_rejected() {
        assert!(Camera::new(1.0, 0.0, std::f64::consts::PI).is_err());
        assert!(Camera::new(1.0, 0.0, 0.0).is_err());
        assert!(Cylinder::new(Vector2::new(0.0, 0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let c = Camera::<f32>::default();
        let pose = Pose2::new(0.0f32, 0.0, 0.0);
        let px = c
            .project_point(&pose, &Vector3::new(5.0, 0.0, 1.2))
            .unwrap();
        assert!((px.x - 90.0).abs() < 1e-4 && (px.y - 42.0).abs() < 1e-4);
    }
}
