//! Forecast quality: FDE/ADE of each forecaster over a set of track samples.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use visfore::forecast::{
    ade, cvm_forecast, fde, kf_forecast, kf_init, kf_predict, kf_step, Algorithm, BoxState,
    Forecast, Horizon, KfParams, Space, Track,
};
use visfore::sim::presets::EVAL_SPEED_RANGE;

use crate::output::{read_text, OutDir};
use crate::CliError;

/// One observation row of a trajectory file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub object_id: u32,
    pub step: u64,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

/// A track to forecast from: noisy observations plus the true states used
/// for scoring (the same rows when only one version is known).
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub object_id: u32,
    pub observed: Vec<(u64, BoxState<f64>)>,
    pub truth: BTreeMap<u64, BoxState<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub tracks: usize,
    /// Gaussian position noise, metres.
    pub noise: f64,
    pub seed: u64,
    /// Observed samples before the forecast is made.
    pub history: usize,
    /// Seconds per sample.
    pub dt: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            tracks: 100,
            noise: 0.05,
            seed: 1,
            history: 8,
            dt: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityRow {
    pub algorithm: Algorithm,
    pub fde: f64,
    pub ade: f64,
    pub samples: usize,
}

pub fn parse_tracks_csv(text: &str) -> Result<Vec<Sequence>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut by_id: BTreeMap<u32, Vec<TrackRow>> = BTreeMap::new();
    for row in reader.deserialize::<TrackRow>() {
        let row = row?;
        by_id.entry(row.object_id).or_default().push(row);
    }
    if by_id.is_empty() {
        return Err(CliError::spec("trajectory file has no rows"));
    }
    by_id
        .into_iter()
        .map(|(id, mut rows)| {
            rows.sort_by_key(|r| r.step);
            if rows.len() < 2 {
                return Err(CliError::spec(format!(
                    "track {id} has fewer than two samples"
                )));
            }
            if rows.windows(2).any(|w| w[0].step == w[1].step) {
                return Err(CliError::spec(format!("track {id} repeats a step")));
            }
            let observed: Vec<(u64, BoxState<f64>)> = rows
                .iter()
                .map(|r| (r.step, BoxState::new(r.cx, r.cy, r.w, r.h)))
                .collect();
            Ok(Sequence {
                object_id: id,
                truth: observed.iter().copied().collect(),
                observed,
            })
        })
        .collect()
}

/// Pedestrians walking straight at a constant speed from the evaluation
/// range, observed every `dt` with Gaussian position noise. Only the clean
/// future after the last observation is kept as truth.
pub fn synthetic_sequences(spec: &SyntheticSpec, horizon: Horizon) -> Vec<Sequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let last = spec.history as u64 - 1;
    (0..spec.tracks)
        .map(|i| {
            let p0 = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let heading: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let speed = rng.gen_range(EVAL_SPEED_RANGE[0]..EVAL_SPEED_RANGE[1]);
            let v = [
                speed * heading.cos() * spec.dt,
                speed * heading.sin() * spec.dt,
            ];
            let at =
                |t: u64| BoxState::new(p0[0] + v[0] * t as f64, p0[1] + v[1] * t as f64, 0.6, 1.7);
            let end = last + horizon.offsets().last().unwrap_or(0) as u64;
            let truth: BTreeMap<u64, BoxState<f64>> = (0..=end).map(|t| (t, at(t))).collect();
            let observed = (0..spec.history as u64)
                .map(|t| {
                    let b = at(t);
                    let (nx, ny) = (
                        gaussian(&mut rng) * spec.noise,
                        gaussian(&mut rng) * spec.noise,
                    );
                    (t, BoxState::new(b.cx + nx, b.cy + ny, b.w, b.h))
                })
                .collect();
            Sequence {
                object_id: i as u32,
                observed,
                truth,
            }
        })
        .collect()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Forecasts (CVM, KF, GT) and the truth they are scored against.
type Sample = (Vec<Forecast<f64>>, Vec<BoxState<f64>>);

/// Forecasts made after the `upto`-th observation, with the truth to score
/// them against, or `None` when the truth does not cover the horizon.
fn sample(
    seq: &Sequence,
    upto: usize,
    horizon: Horizon,
    kf: &KfParams<f64>,
) -> Result<Option<Sample>, CliError> {
    let (anchor, _) = seq.observed[upto];
    let Some(actual) = horizon
        .offsets()
        .map(|k| seq.truth.get(&(anchor + k as u64)).copied())
        .collect::<Option<Vec<_>>>()
    else {
        return Ok(None);
    };
    let mut track = Track::with_capacity(seq.object_id, Space::World, upto + 1);
    let mut filter = kf_init(&seq.observed[0].1, kf);
    track.push(seq.observed[0].0, seq.observed[0].1)?;
    for w in seq.observed[..=upto].windows(2) {
        let ((s0, _), (s1, z)) = (w[0], w[1]);
        for _ in 1..(s1 - s0) {
            filter = kf_predict(&filter, kf);
        }
        filter = kf_step(&filter, &z, kf)?;
        track.push(s1, z)?;
    }
    let gt = Forecast {
        object_id: seq.object_id,
        algorithm: Algorithm::Gt,
        space: Space::World,
        entries: horizon.offsets().zip(actual.iter().copied()).collect(),
    };
    let forecasts = vec![
        cvm_forecast(&track, horizon)?,
        kf_forecast(&filter, seq.object_id, Space::World, horizon),
        gt,
    ];
    Ok(Some((forecasts, actual)))
}

/// Mean FDE/ADE per algorithm (CVM, KF, GT). Every observation after the
/// second whose future is fully known is one sample.
pub fn evaluate(
    seqs: &[Sequence],
    horizon: Horizon,
    kf: &KfParams<f64>,
) -> Result<Vec<QualityRow>, CliError> {
    let mut sums = [(0.0, 0.0); 3];
    let mut n = 0usize;
    for seq in seqs {
        for upto in 1..seq.observed.len() {
            let Some((forecasts, actual)) = sample(seq, upto, horizon, kf)? else {
                continue;
            };
            for (acc, f) in sums.iter_mut().zip(&forecasts) {
                acc.0 += fde(f, &actual)?;
                acc.1 += ade(f, &actual)?;
            }
            n += 1;
        }
    }
    if n == 0 {
        return Err(CliError::spec("no track covers a full forecast horizon"));
    }
    Ok([Algorithm::Cvm, Algorithm::Kf, Algorithm::Gt]
        .into_iter()
        .zip(sums)
        .map(|(algorithm, (f, a))| QualityRow {
            algorithm,
            fde: f / n as f64,
            ade: a / n as f64,
            samples: n,
        })
        .collect())
}

pub fn quality_csv(rows: &[QualityRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["algorithm", "fde", "ade", "samples"])?;
    for r in rows {
        let name = match r.algorithm {
            Algorithm::Cvm => "CVM",
            Algorithm::Kf => "KF",
            Algorithm::Gt => "GT",
        };
        w.write_record([
            name.to_string(),
            format!("{:.6}", r.fde),
            format!("{:.6}", r.ade),
            r.samples.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Where the tracks come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrackSource {
    File { path: String },
    Synthetic(SyntheticSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastEvalConfig {
    pub source: TrackSource,
    pub horizon: usize,
    pub stride: usize,
    pub kf: KfParams<f64>,
}

pub fn cmd_forecast_eval(
    config: &ForecastEvalConfig,
    out: &Path,
) -> Result<Vec<QualityRow>, CliError> {
    let horizon = Horizon {
        horizon: config.horizon,
        stride: config.stride,
    };
    if horizon.horizon == 0 || horizon.stride == 0 {
        return Err(CliError::spec("horizon and stride must be positive"));
    }
    let seqs = match &config.source {
        TrackSource::File { path } => parse_tracks_csv(&read_text(Path::new(path))?)?,
        TrackSource::Synthetic(spec) => {
            if spec.history < 2 || spec.tracks == 0 {
                return Err(CliError::spec("synthetic tracks need two or more samples"));
            }
            synthetic_sequences(spec, horizon)
        }
    };
    let rows = evaluate(&seqs, horizon, &config.kf)?;
    let mut dir = OutDir::create(out)?;
    dir.write("forecast_quality.csv", &quality_csv(&rows)?)?;
    dir.finish("forecast-eval", config)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean_csv() -> String {
        let mut s = String::from("object_id,step,cx,cy,w,h\n");
        for id in 0..3u32 {
            for t in 0..40u64 {
                let t_f = t as f64;
                s.push_str(&format!(
                    "{id},{t},{},{},0.6,1.7\n",
                    1.0 + 0.05 * t_f * (id as f64 + 1.0),
                    -2.0 + 0.03 * t_f
                ));
            }
        }
        s
    }

    #[test]
    fn noiseless_tracks_give_zero_cvm_error() {
        let seqs = parse_tracks_csv(&clean_csv()).unwrap();
        let rows = evaluate(&seqs, Horizon::default(), &KfParams::default()).unwrap();
        assert_eq!(rows[0].algorithm, Algorithm::Cvm);
        assert!(rows[0].fde < 1e-12 && rows[0].ade < 1e-12, "{rows:?}");
        // 40 rows, anchors 1..=19 have the full 20-frame future
        assert_eq!(rows[0].samples, 3 * 19);
    }

    #[test]
    fn gt_rows_are_exactly_zero() {
        let seqs = synthetic_sequences(&SyntheticSpec::default(), Horizon::default());
        let rows = evaluate(&seqs, Horizon::default(), &KfParams::default()).unwrap();
        assert_eq!(rows[2].algorithm, Algorithm::Gt);
        assert_eq!((rows[2].fde, rows[2].ade), (0.0, 0.0));
    }

    #[test]
    fn short_track_is_rejected() {
        let err = parse_tracks_csv("object_id,step,cx,cy,w,h\n1,0,0,0,1,1\n").unwrap_err();
        assert!(matches!(err, CliError::InvalidSpec(_)));
    }

    #[test]
    fn malformed_csv_is_rejected() {
        let err = parse_tracks_csv("object_id,step,cx\n1,zero,3\n").unwrap_err();
        assert!(matches!(err, CliError::InvalidSpec(_)));
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..20000).map(|_| gaussian(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(
            mean.abs() < 0.03 && (var - 1.0).abs() < 0.05,
            "{mean} {var}"
        );
    }
}
