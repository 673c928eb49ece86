use super::{Algorithm, BoxState, Forecast, Horizon, Space, Track};
use crate::{Error, Real};

/// How the constant velocity is estimated from the history.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CvmFit {
    /// Difference of the last two samples.
    #[default]
    LastTwo,
    /// Least-squares slope over the last `n` samples (n >= 2).
    Window(usize),
}

fn velocity<T: Real>(track: &Track<T>, fit: CvmFit) -> Result<[T; 4], Error> {
    let have = track.len();
    if have < 2 {
        return Err(Error::InsufficientHistory { needed: 2, have });
    }
    let n = match fit {
        CvmFit::LastTwo => 2,
        CvmFit::Window(n) => n.clamp(2, have),
    };
    let samples: Vec<&(u64, BoxState<T>)> = track.iter().rev().take(n).collect();
    if n == 2 {
        let (s1, b1) = samples[0];
        let (s0, b0) = samples[1];
        let gap = T::lit((s1 - s0) as f64);
        let (a1, a0) = (b1.as_array(), b0.as_array());
        return Ok(std::array::from_fn(|i| (a1[i] - a0[i]) / gap));
    }
    let last_step = samples[0].0;
    let ts: Vec<T> = samples
        .iter()
        .map(|(s, _)| -T::lit((last_step - s) as f64))
        .collect();
    let nt = T::lit(n as f64);
    let t_mean = ts.iter().fold(T::zero(), |a, &t| a + t) / nt;
    let stt = ts
        .iter()
        .fold(T::zero(), |a, &t| a + (t - t_mean) * (t - t_mean));
    Ok(std::array::from_fn(|i| {
        let vals: Vec<T> = samples.iter().map(|(_, b)| b.as_array()[i]).collect();
        let v_mean = vals.iter().fold(T::zero(), |a, &v| a + v) / nt;
        let stv = ts
            .iter()
            .zip(&vals)
            .fold(T::zero(), |a, (&t, &v)| a + (t - t_mean) * (v - v_mean));
        stv / stt
    }))
}

/// Constant-velocity forecast from the last two samples.
pub fn cvm_forecast<T: Real>(track: &Track<T>, horizon: Horizon) -> Result<Forecast<T>, Error> {
    cvm_forecast_with(track, horizon, CvmFit::LastTwo)
}

/// Linear extrapolation of centre and size. World-space tracks keep their
/// last extent; predicted image sizes are floored at zero.
pub fn cvm_forecast_with<T: Real>(
    track: &Track<T>,
    horizon: Horizon,
    fit: CvmFit,
) -> Result<Forecast<T>, Error> {
    let vel = velocity(track, fit)?;
    let (_, last) = *track.last().expect("history checked above");
    let base = last.as_array();
    let entries = horizon
        .offsets()
        .map(|k| {
            let kt = T::lit(k as f64);
            let mut b = BoxState::from_array(std::array::from_fn(|i| base[i] + vel[i] * kt));
            if track.space == Space::World {
                b.w = last.w;
                b.h = last.h;
            }
            b.w = b.w.max(T::zero());
            b.h = b.h.max(T::zero());
            (k, b)
        })
        .collect();
    Ok(Forecast {
        object_id: track.object_id,
        algorithm: Algorithm::Cvm,
        space: track.space,
        entries,
    })
}
