//! Visual forecasting for navigation among moving pedestrians.
//!
//! The crate bundles a deterministic ground-vehicle simulator, constant-velocity
//! and Kalman trajectory forecasters, segmentation-style renderers that paint
//! forecasts as box sequences or augmented paths, scripted and external
//! (wire-protocol) policies, and the episode metrics used to compare them.
//!
//! Geometry, forecasting and metrics are generic over [`Real`]; the simulator,
//! renderer and policies run in `f64`. The aliases below name the `f64`
//! instantiations used throughout.

// `!(x > 0.0)` is used on purpose so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod episode;
pub mod forecast;
pub mod geometry;
pub mod metrics;
pub mod policy;
pub mod render;
mod scalar;
pub mod sim;

pub use scalar::Real;

pub type Pose2D = geometry::Pose2<f64>;
pub type CameraModel = geometry::Camera<f64>;
pub type Cylinder3D = geometry::Cylinder<f64>;
pub type BBox2D = geometry::ImageBox<f64>;
pub type BoxState = forecast::BoxState<f64>;
pub type TrackHistory = forecast::Track<f64>;
pub type KalmanState = forecast::KfState<f64>;
pub type KalmanParams = forecast::KfParams<f64>;
pub type Forecast = forecast::Forecast<f64>;
pub type EpisodeRecord = metrics::Episode<f64>;
pub type RateRow = metrics::Rates<f64>;

/// Errors raised by the core library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("cylinder radius and height must be positive")]
    InvalidCylinder,
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("unknown scenario preset `{0}`")]
    UnknownPreset(String),
    #[error("episode already terminated")]
    StepAfterTermination,
    #[error("track needs at least {needed} samples, has {have}")]
    InsufficientHistory { needed: usize, have: usize },
    #[error("track steps must be strictly increasing (last {last}, got {got})")]
    NonMonotonicStep { last: u64, got: u64 },
    #[error("innovation covariance is not invertible")]
    NumericalDegeneracy,
    #[error("unknown object id {0}")]
    UnknownObject(u32),
    #[error("length mismatch: predicted {predicted}, actual {actual}")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("forecast is empty")]
    EmptyForecast,
    #[error("record set is empty")]
    EmptySet,
    #[error("report shapes differ across seeds")]
    ShapeMismatch,
    #[error("policy protocol violation: {0}")]
    Protocol(String),
    #[error("policy did not reply in time")]
    PolicyTimeout,
    #[error("scenario json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
