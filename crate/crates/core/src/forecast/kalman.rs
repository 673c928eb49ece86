//! Constant-velocity Kalman filter over `(cx, cy, w, h)` and their rates.
//!
//! The time unit is one simulation frame, so the transition couples each
//! component with its rate by 1.

use nalgebra::{Cholesky, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::{Algorithm, BoxState, Forecast, Horizon, Space};
use crate::{Error, Real};

type Mat8<T> = SMatrix<T, 8, 8>;
type Vec8<T> = SVector<T, 8>;
type Mat4<T> = SMatrix<T, 4, 4>;
type Mat48<T> = SMatrix<T, 4, 8>;

/// Diagonal noise settings, in the track's units per frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound = "T: Real + Serialize + serde::de::DeserializeOwned"
)]
pub struct KfParams<T: Real> {
    /// Process noise on the centre.
    pub q_pos: T,
    /// Process noise on width and height.
    pub q_size: T,
    /// Process noise on every rate component.
    pub q_vel: T,
    /// Measurement noise, all four components.
    pub r: T,
    /// Initial variance of the measured components.
    pub init_pos_var: T,
    /// Initial variance of the rates.
    pub init_vel_var: T,
}

impl<T: Real> Default for KfParams<T> {
    fn default() -> Self {
        Self {
            q_pos: T::lit(1e-2),
            q_size: T::lit(1e-2),
            q_vel: T::lit(1e-4),
            r: T::lit(1e-2),
            init_pos_var: T::lit(1e-2),
            init_vel_var: T::one(),
        }
    }
}

impl<T: Real> KfParams<T> {
    /// Pixel-scale noise for image-space tracks. Box measurements jump by
    /// several pixels whenever the camera starts or stops turning, so the
    /// rates are trusted far more than single measurements.
    pub fn image() -> Self {
        Self {
            q_pos: T::lit(0.5),
            q_size: T::lit(0.5),
            q_vel: T::lit(1e-3),
            r: T::lit(50.0),
            init_pos_var: T::lit(50.0),
            init_vel_var: T::one(),
        }
    }

    /// No process noise and near-exact measurements: on a clean
    /// constant-velocity stream the estimate locks onto the true rates.
    pub fn noise_free() -> Self {
        Self {
            q_pos: T::zero(),
            q_size: T::zero(),
            q_vel: T::zero(),
            r: T::lit(1e-10),
            init_pos_var: T::lit(1e-10),
            init_vel_var: T::one(),
        }
    }

    fn process_noise(&self) -> Mat8<T> {
        Mat8::from_diagonal(&Vec8::from_column_slice(&[
            self.q_pos,
            self.q_pos,
            self.q_size,
            self.q_size,
            self.q_vel,
            self.q_vel,
            self.q_vel,
            self.q_vel,
        ]))
    }

    fn measurement_noise(&self) -> Mat4<T> {
        Mat4::from_diagonal_element(self.r)
    }
}

/// Filter mean `(cx, cy, w, h, dcx, dcy, dw, dh)` and covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KfState<T: Real> {
    pub mean: Vec8<T>,
    pub cov: Mat8<T>,
}

impl<T: Real> KfState<T> {
    pub fn box_state(&self) -> BoxState<T> {
        BoxState::new(self.mean[0], self.mean[1], self.mean[2], self.mean[3])
    }

    pub fn velocity(&self) -> [T; 4] {
        [self.mean[4], self.mean[5], self.mean[6], self.mean[7]]
    }
}

fn transition<T: Real>() -> Mat8<T> {
    let mut f = Mat8::identity();
    for i in 0..4 {
        f[(i, i + 4)] = T::one();
    }
    f
}

fn observation<T: Real>() -> Mat48<T> {
    Mat48::identity()
}

pub fn kf_init<T: Real>(z: &BoxState<T>, params: &KfParams<T>) -> KfState<T> {
    let mut mean = Vec8::zeros();
    for (i, v) in z.as_array().into_iter().enumerate() {
        mean[i] = v;
    }
    let mut diag = Vec8::from_element(params.init_pos_var);
    for i in 4..8 {
        diag[i] = params.init_vel_var;
    }
    KfState {
        mean,
        cov: Mat8::from_diagonal(&diag),
    }
}

pub fn kf_predict<T: Real>(state: &KfState<T>, params: &KfParams<T>) -> KfState<T> {
    let f = transition::<T>();
    let cov = f * state.cov * f.transpose() + params.process_noise();
    KfState {
        mean: f * state.mean,
        cov: symmetrize(&cov),
    }
}

fn symmetrize<T: Real>(m: &Mat8<T>) -> Mat8<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Symmetric within `tol` and no eigenvalue below `-tol`.
pub fn is_symmetric_psd<T: Real>(m: &Mat8<T>, tol: T) -> bool {
    let asym = (m - m.transpose()).abs().max();
    if asym > tol {
        return false;
    }
    let shifted = symmetrize(m) + Mat8::from_diagonal_element(tol);
    Cholesky::new(shifted).is_some()
}

/// Linear measurement update (Joseph form).
pub fn kf_update<T: Real>(
    state: &KfState<T>,
    z: &BoxState<T>,
    params: &KfParams<T>,
) -> Result<KfState<T>, Error> {
    let h = observation::<T>();
    let s = h * state.cov * h.transpose() + params.measurement_noise();
    let s_inv = s.try_inverse().ok_or(Error::NumericalDegeneracy)?;
    if !s_inv.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalDegeneracy);
    }
    let gain = state.cov * h.transpose() * s_inv;
    let zv = SVector::<T, 4>::from_column_slice(&z.as_array());
    let innovation = zv - h * state.mean;
    let mean = state.mean + gain * innovation;
    let ikh = Mat8::identity() - gain * h;
    let cov =
        ikh * state.cov * ikh.transpose() + gain * params.measurement_noise() * gain.transpose();
    let cov = symmetrize(&cov);
    if !is_symmetric_psd(&cov, T::lit(1e-9)) {
        return Err(Error::NumericalDegeneracy);
    }
    Ok(KfState { mean, cov })
}

/// One predict followed by one update.
pub fn kf_step<T: Real>(
    state: &KfState<T>,
    z: &BoxState<T>,
    params: &KfParams<T>,
) -> Result<KfState<T>, Error> {
    kf_update(&kf_predict(state, params), z, params)
}

/// Noise-free mean propagation, emitting boxes at the horizon offsets.
pub fn kf_forecast<T: Real>(
    state: &KfState<T>,
    object_id: u32,
    space: Space,
    horizon: Horizon,
) -> Forecast<T> {
    let f = transition::<T>();
    let mut mean = state.mean;
    let mut entries = Vec::with_capacity(horizon.horizon);
    for k in 1..=horizon.last_offset() {
        mean = f * mean;
        if k % horizon.stride == 0 {
            let mut b = BoxState::new(mean[0], mean[1], mean[2], mean[3]);
            b.w = b.w.max(T::zero());
            b.h = b.h.max(T::zero());
            entries.push((k, b));
        }
    }
    Forecast {
        object_id,
        algorithm: Algorithm::Kf,
        space,
        entries,
    }
}
