//! Track histories and k-step future-box prediction.
//!
//! Every predictor works on [`BoxState`] (centre plus size), so one code path
//! serves world-space tracks (ground position, diameter, height) and
//! image-space tracks (pixel box centre, width, height).

mod cvm;
mod error;
mod ground_truth;
mod kalman;
mod track;

pub use cvm::{cvm_forecast, cvm_forecast_with, CvmFit};
pub use error::{ade, displacement_errors, fde};
pub use ground_truth::{gt_forecast, gt_forecast_image};
pub use kalman::{
    is_symmetric_psd, kf_forecast, kf_init, kf_predict, kf_step, kf_update, KfParams, KfState,
};
pub use track::{BoxState, Track, DEFAULT_HISTORY};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    World,
    Image,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    Cvm,
    Kf,
    Gt,
}

/// Horizon `H` and stride `s`: predictions at offsets `s, 2s, ..., H*s` frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub horizon: usize,
    pub stride: usize,
}

impl Default for Horizon {
    fn default() -> Self {
        Self {
            horizon: 5,
            stride: 4,
        }
    }
}

impl Horizon {
    pub fn offsets(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.horizon).map(move |i| i * self.stride)
    }

    pub fn last_offset(&self) -> usize {
        self.horizon * self.stride
    }
}

impl From<crate::sim::ForecastSettings> for Horizon {
    fn from(s: crate::sim::ForecastSettings) -> Self {
        Self {
            horizon: s.horizon,
            stride: s.stride,
        }
    }
}

/// Predicted boxes for one object at strictly increasing frame offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::Real + Serialize + serde::de::DeserializeOwned")]
pub struct Forecast<T: crate::Real> {
    pub object_id: u32,
    pub algorithm: Algorithm,
    pub space: Space,
    pub entries: Vec<(usize, BoxState<T>)>,
}

impl<T: crate::Real> Forecast<T> {
    pub fn boxes(&self) -> impl Iterator<Item = &BoxState<T>> {
        self.entries.iter().map(|(_, b)| b)
    }

    pub fn last(&self) -> Option<&BoxState<T>> {
        self.entries.last().map(|(_, b)| b)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
