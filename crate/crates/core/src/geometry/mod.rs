//! Poses, the pinhole camera and planar polygon helpers.

mod camera;
mod polygon;
mod pose;

pub use camera::{Camera, Cylinder, ImageBox, SILHOUETTE_SAMPLES};
pub use polygon::{
    convex_hull, point_in_polygon, point_on_segment, segment_intersection, segments_cross,
    shoelace_area, Polygon,
};
pub use pose::{normalize_angle, Pose2};
