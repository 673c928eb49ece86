//! Episode outcome metrics: SPL, cause rates and seed aggregation.

mod shortest_path;

pub use shortest_path::{shortest_path, Region};

use serde::{Deserialize, Serialize};

use crate::sim::TerminationCause;
use crate::{Error, Real};

/// Outcome of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct Episode<T: Real> {
    pub scenario_id: String,
    pub seed: u64,
    pub cause: TerminationCause,
    /// Shortest drivable path from start to goal.
    pub shortest: T,
    /// Length of the path actually driven.
    pub path: T,
    pub steps: u64,
}

impl<T: Real> Episode<T> {
    pub fn is_success(&self) -> bool {
        self.cause == TerminationCause::Success
    }

    /// Checks `l > 0`, `p >= 0` and that `p` is at least the distance the
    /// agent must have covered at speed `v` over `steps` steps of `dt`.
    pub fn is_consistent(&self, speed: T, dt: T) -> bool {
        let eps = T::lit(1e-6);
        self.shortest > T::zero()
            && self.path >= T::zero()
            && self.path >= speed * dt * T::lit(self.steps as f64) - eps
    }
}

/// Success weighted by path length.
pub fn spl<T: Real>(records: &[Episode<T>]) -> Result<T, Error> {
    if records.is_empty() {
        return Err(Error::EmptySet);
    }
    let sum = records
        .iter()
        .filter(|r| r.is_success())
        .fold(T::zero(), |acc, r| {
            acc + r.shortest / r.shortest.max(r.path)
        });
    Ok(sum / T::lit(records.len() as f64))
}

/// One report cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct Rates<T: Real> {
    pub spl: T,
    pub success: T,
    pub collision: T,
    pub oob: T,
    pub timeout: T,
    pub n: usize,
}

impl<T: Real> Rates<T> {
    fn values(&self) -> [T; 5] {
        [
            self.spl,
            self.success,
            self.collision,
            self.oob,
            self.timeout,
        ]
    }

    fn from_values(v: [T; 5], n: usize) -> Self {
        Rates {
            spl: v[0],
            success: v[1],
            collision: v[2],
            oob: v[3],
            timeout: v[4],
            n,
        }
    }
}

pub fn rates<T: Real>(records: &[Episode<T>]) -> Result<Rates<T>, Error> {
    let n = records.len();
    let frac = |cause| {
        let k = records.iter().filter(|r| r.cause == cause).count();
        T::lit(k as f64) / T::lit(n as f64)
    };
    Ok(Rates {
        spl: spl(records)?,
        success: frac(TerminationCause::Success),
        collision: frac(TerminationCause::Collision),
        oob: frac(TerminationCause::OutOfBound),
        timeout: frac(TerminationCause::Timeout),
        n,
    })
}

/// Row key of an evaluation report.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub scenario_set: String,
    pub speed_band: String,
    pub approach: String,
}

/// Rates for every cell of a single seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct SeedReport<T: Real> {
    pub seed: u64,
    pub cells: Vec<(CellKey, Rates<T>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct AggregateCell<T: Real> {
    pub key: CellKey,
    pub mean: Rates<T>,
    pub std: Rates<T>,
    pub seeds: usize,
}

/// Per-cell unweighted mean and sample standard deviation across seeds.
pub fn aggregate_seeds<T: Real>(reports: &[SeedReport<T>]) -> Result<Vec<AggregateCell<T>>, Error> {
    let first = reports.first().ok_or(Error::EmptySet)?;
    let congruent = reports.iter().all(|r| {
        r.cells.len() == first.cells.len()
            && r.cells.iter().zip(&first.cells).all(|(a, b)| a.0 == b.0)
    });
    if !congruent {
        return Err(Error::ShapeMismatch);
    }
    let m = reports.len();
    let mf = T::lit(m as f64);
    let cells = first
        .cells
        .iter()
        .enumerate()
        .map(|(i, (key, _))| {
            let samples: Vec<[T; 5]> = reports.iter().map(|r| r.cells[i].1.values()).collect();
            let mut mean = [T::zero(); 5];
            for s in &samples {
                for k in 0..5 {
                    mean[k] += s[k];
                }
            }
            mean.iter_mut().for_each(|x| *x /= mf);
            let mut std = [T::zero(); 5];
            if m > 1 {
                for s in &samples {
                    for k in 0..5 {
                        std[k] += (s[k] - mean[k]) * (s[k] - mean[k]);
                    }
                }
                std.iter_mut()
                    .for_each(|x| *x = (*x / T::lit((m - 1) as f64)).sqrt());
            }
            let n = reports.iter().map(|r| r.cells[i].1.n).sum::<usize>() / m;
            AggregateCell {
                key: key.clone(),
                mean: Rates::from_values(mean, n),
                std: Rates::from_values(std, n),
                seeds: m,
            }
        })
        .collect();
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(cause: TerminationCause, l: f64, p: f64) -> Episode<f64> {
        Episode {
            scenario_id: "t".into(),
            seed: 0,
            cause,
            shortest: l,
            path: p,
            steps: 0,
        }
    }

    use TerminationCause::*;

    #[test]
    fn spl_hand_cases() {
        assert_eq!(spl(&[ep(Success, 10.0, 10.0)]).unwrap(), 1.0);
        assert_eq!(
            spl(&[ep(Success, 10.0, 20.0), ep(Collision, 10.0, 3.0)]).unwrap(),
            0.25
        );
        assert_eq!(spl(&[ep(Success, 10.0, 8.0)]).unwrap(), 1.0);
        assert!(matches!(spl::<f64>(&[]), Err(Error::EmptySet)));
    }

    #[test]
    fn rate_partition() {
        let r = rates(&vec![ep(Success, 1.0, 1.0); 3]).unwrap();
        assert_eq!(
            (r.success, r.collision, r.oob, r.timeout),
            (1.0, 0.0, 0.0, 0.0)
        );
        let r = rates(&[
            ep(Success, 1.0, 1.0),
            ep(Collision, 1.0, 1.0),
            ep(Collision, 1.0, 1.0),
            ep(OutOfBound, 1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(
            (r.success, r.collision, r.oob, r.timeout),
            (0.25, 0.5, 0.25, 0.0)
        );
        assert_eq!(r.n, 4);
    }

    fn seed_report(seed: u64, spl: f64) -> SeedReport<f64> {
        let key = CellKey {
            scenario_set: "s-turn".into(),
            speed_band: "0.6-1.2".into(),
            approach: "seg".into(),
        };
        let rates = Rates {
            spl,
            success: 1.0,
            collision: 0.0,
            oob: 0.0,
            timeout: 0.0,
            n: 10,
        };
        SeedReport {
            seed,
            cells: vec![(key, rates)],
        }
    }

    #[test]
    fn aggregation() {
        let one = aggregate_seeds(&[seed_report(1, 0.6)]).unwrap();
        assert_eq!(one[0].mean.spl, 0.6);
        assert_eq!(one[0].std.spl, 0.0);
        let flat = aggregate_seeds(&[
            seed_report(1, 0.8),
            seed_report(2, 0.8),
            seed_report(3, 0.8),
        ])
        .unwrap();
        assert!((flat[0].mean.spl - 0.8).abs() < 1e-15);
        assert!(flat[0].std.spl.abs() < 1e-15);
        let spread = aggregate_seeds(&[
            seed_report(1, 0.7),
            seed_report(2, 0.8),
            seed_report(3, 0.9),
        ])
        .unwrap();
        assert!((spread[0].mean.spl - 0.8).abs() < 1e-12);
        assert!((spread[0].std.spl - 0.1).abs() < 1e-12);
    }

    #[test]
    fn aggregation_shape_mismatch() {
        let mut b = seed_report(2, 0.5);
        b.cells[0].0.approach = "other".into();
        assert!(matches!(
            aggregate_seeds(&[seed_report(1, 0.5), b]),
            Err(Error::ShapeMismatch)
        ));
        assert!(matches!(aggregate_seeds::<f64>(&[]), Err(Error::EmptySet)));
    }

    #[test]
    fn consistency_check() {
        let mut e = ep(Success, 10.0, 6.0);
        e.steps = 20;
        assert!(e.is_consistent(6.0, 0.05));
        e.steps = 21;
        assert!(!e.is_consistent(6.0, 0.05));
    }
}
