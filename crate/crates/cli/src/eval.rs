//! Batch evaluation: every (approach, speed band, scenario set, seed, episode)
//! combination, reduced into report cells in a fixed order.

use std::fmt::Write as _;
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use visfore::episode::{
    scenario_shortest_path, ApproachSpec, EpisodeOutcome, EpisodeRunner, EpisodeSettings,
    Forecaster,
};
use visfore::forecast::{KfParams, Space};
use visfore::metrics::{aggregate_seeds, rates, AggregateCell, CellKey, Rates, SeedReport};
use visfore::policy::bridge::{BridgePolicy, ChildTransport, TcpTransport, DEFAULT_TIMEOUT};
use visfore::policy::{Policy, PolicySpec};
use visfore::render::SceneRenderer;
use visfore::sim::presets::preset_sets;
use visfore::sim::ScenarioConfig;
use visfore::EpisodeRecord;

use crate::output::{read_text, Manifest, OutDir};
use crate::CliError;

/// Default report bands, m/s.
pub const DEFAULT_SPEED_BANDS: [[f64; 2]; 3] = [[0.3, 0.6], [0.6, 1.2], [1.2, 1.5]];
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];
pub const DEFAULT_EPISODES: usize = 50;
pub const DEFAULT_HISTORY: usize = 8;

/// Who picks the actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicyChoice {
    Builtin {
        spec: PolicySpec,
    },
    /// External policy process, one per episode, speaking over stdin/stdout.
    BridgeCommand {
        argv: Vec<String>,
        timeout_ms: u64,
    },
    /// External policy listening on a TCP address, one connection per episode.
    BridgeTcp {
        addr: String,
        timeout_ms: u64,
    },
    /// One long session for the whole run; episodes are played in order.
    BridgeSession {
        endpoint: SessionEndpoint,
        timeout_ms: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "via", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SessionEndpoint {
    /// Spawn this command and talk over its stdin/stdout.
    Command { argv: Vec<String> },
    /// Wait for one policy to connect to this address.
    Listen { addr: String },
}

impl PolicyChoice {
    pub fn label(&self) -> String {
        match self {
            PolicyChoice::Builtin { spec } => spec.name().to_string(),
            _ => "bridge".into(),
        }
    }

    pub fn bridge_command(argv: Vec<String>) -> Self {
        PolicyChoice::BridgeCommand {
            argv,
            timeout_ms: DEFAULT_TIMEOUT.as_millis() as u64,
        }
    }

    /// Fresh policy instance for one episode.
    pub fn instantiate(&self) -> Result<Box<dyn Policy>, CliError> {
        Ok(match self {
            PolicyChoice::Builtin { spec } => spec.build(),
            PolicyChoice::BridgeCommand { argv, timeout_ms } => {
                Box::new(spawn_bridge(argv, *timeout_ms)?)
            }
            PolicyChoice::BridgeTcp { addr, timeout_ms } => {
                let stream = TcpStream::connect(addr)
                    .map_err(|e| CliError::Io(format!("connect {addr}: {e}")))?;
                let transport = TcpTransport::new(stream)?;
                Box::new(
                    BridgePolicy::new(Box::new(transport))
                        .with_timeout(Duration::from_millis(*timeout_ms)),
                )
            }
            PolicyChoice::BridgeSession { .. } => {
                return Err(CliError::Internal(
                    "session policies are not per-episode".into(),
                ));
            }
        })
    }
}

fn spawn_bridge(argv: &[String], timeout_ms: u64) -> Result<BridgePolicy, CliError> {
    let (prog, args) = argv
        .split_first()
        .ok_or_else(|| CliError::spec("empty policy command"))?;
    let mut cmd = Command::new(prog);
    cmd.args(args);
    let transport = ChildTransport::spawn(cmd)
        .map_err(|e| CliError::Io(format!("cannot start policy `{prog}`: {e}")))?;
    Ok(BridgePolicy::new(Box::new(transport)).with_timeout(Duration::from_millis(timeout_ms)))
}

/// Opens the single session of a `BridgeSession` policy.
fn open_session(endpoint: &SessionEndpoint, timeout_ms: u64) -> Result<BridgePolicy, CliError> {
    match endpoint {
        SessionEndpoint::Command { argv } => spawn_bridge(argv, timeout_ms),
        SessionEndpoint::Listen { addr } => {
            let listener =
                TcpListener::bind(addr).map_err(|e| CliError::Io(format!("bind {addr}: {e}")))?;
            let (stream, _) = listener
                .accept()
                .map_err(|e| CliError::Io(format!("accept on {addr}: {e}")))?;
            let transport = TcpTransport::new(stream)?;
            Ok(BridgePolicy::new(Box::new(transport))
                .with_timeout(Duration::from_millis(timeout_ms)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSetSpec {
    pub name: String,
    pub scenarios: Vec<ScenarioConfig>,
}

/// Fully resolved evaluation request. Embedded verbatim in the manifest, so a
/// manifest alone is enough to rerun the evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Preset name or scenario file the sets were resolved from.
    pub scenario: String,
    pub scenario_sets: Vec<ScenarioSetSpec>,
    pub approaches: Vec<ApproachSpec>,
    pub policy: PolicyChoice,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub speed_bands: Vec<[f64; 2]>,
    pub history: usize,
    pub kf: KfParams<f64>,
    pub kf_image: KfParams<f64>,
}

impl EvalConfig {
    /// Config with the shipped defaults for everything but the scenario,
    /// approaches and policy.
    pub fn new(
        scenario: &str,
        approaches: Vec<ApproachSpec>,
        policy: PolicyChoice,
    ) -> Result<Self, CliError> {
        Ok(Self {
            scenario: scenario.to_string(),
            scenario_sets: resolve_scenario(scenario)?,
            approaches,
            policy,
            seeds: DEFAULT_SEEDS.to_vec(),
            episodes: DEFAULT_EPISODES,
            speed_bands: DEFAULT_SPEED_BANDS.to_vec(),
            history: DEFAULT_HISTORY,
            kf: KfParams::default(),
            kf_image: KfParams::image(),
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.scenario_sets.is_empty()
            || self.scenario_sets.iter().any(|s| s.scenarios.is_empty())
        {
            return Err(CliError::spec("no scenarios to evaluate"));
        }
        for set in &self.scenario_sets {
            for cfg in &set.scenarios {
                cfg.validate()?;
            }
        }
        if self.approaches.is_empty() {
            return Err(CliError::spec("no approach given"));
        }
        for a in &self.approaches {
            a.validate()?;
        }
        if self.seeds.is_empty() {
            return Err(CliError::spec("no seeds given"));
        }
        if self.episodes == 0 {
            return Err(CliError::spec("episode count must be positive"));
        }
        if self.speed_bands.is_empty() {
            return Err(CliError::spec("no speed band given"));
        }
        for &[lo, hi] in &self.speed_bands {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(CliError::spec(format!("bad speed band [{lo}, {hi}]")));
            }
        }
        if self.history < 2 {
            return Err(CliError::spec("history must keep at least two samples"));
        }
        match &self.policy {
            PolicyChoice::BridgeCommand { argv, .. }
            | PolicyChoice::BridgeSession {
                endpoint: SessionEndpoint::Command { argv },
                ..
            } if argv.is_empty() => return Err(CliError::spec("empty policy command")),
            _ => {}
        }
        Ok(())
    }

    /// Reads either a bare config or a manifest written by a previous run.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::spec(format!("{}: {e}", path.display())))?;
        let parsed = if value.get("config").is_some() && value.get("outputs").is_some() {
            serde_json::from_value::<Manifest<EvalConfig>>(value).map(|m| m.config)
        } else {
            serde_json::from_value::<EvalConfig>(value)
        };
        parsed.map_err(|e| CliError::spec(format!("{}: {e}", path.display())))
    }
}

/// Preset name, or a path to a scenario JSON file (one config or an array).
pub fn resolve_scenario(name: &str) -> Result<Vec<ScenarioSetSpec>, CliError> {
    let path = Path::new(name);
    if name.ends_with(".json") || path.is_file() {
        let text = read_text(path)?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::spec(format!("{name}: {e}")))?;
        let scenarios: Vec<ScenarioConfig> = if value.is_array() {
            serde_json::from_value(value)
        } else {
            serde_json::from_value(value).map(|c| vec![c])
        }
        .map_err(|e| CliError::spec(format!("{name}: {e}")))?;
        for cfg in &scenarios {
            cfg.validate()?;
        }
        let set = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| name.into());
        return Ok(vec![ScenarioSetSpec {
            name: set,
            scenarios,
        }]);
    }
    Ok(preset_sets(name)?
        .into_iter()
        .map(|s| ScenarioSetSpec {
            name: s.name,
            scenarios: s.scenarios,
        })
        .collect())
}

/// Cartesian product of approaches, forecasters and spaces. The space is
/// irrelevant without a forecaster and collapses to 3D there.
pub fn approach_grid(
    approaches: &[visfore::render::Approach],
    forecasters: &[Forecaster],
    spaces: &[Space],
) -> Result<Vec<ApproachSpec>, CliError> {
    let mut out: Vec<ApproachSpec> = Vec::new();
    for &approach in approaches {
        for &forecaster in forecasters {
            for &space in spaces {
                let space = if forecaster == Forecaster::None {
                    Space::World
                } else {
                    space
                };
                let spec = ApproachSpec {
                    approach,
                    forecaster,
                    space,
                };
                spec.validate()?;
                if !out.contains(&spec) {
                    out.push(spec);
                }
            }
        }
    }
    Ok(out)
}

pub fn band_label(band: [f64; 2]) -> String {
    format!("{}-{}", band[0], band[1])
}

/// Parses `lo-hi` or `lo,hi`.
pub fn parse_band(text: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::spec(format!("speed band `{text}` is not `lo-hi`"));
    let (lo, hi) = text.split_once(['-', ',', ':']).ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok([lo, hi])
}

/// Seed of episode `index` under run seed `seed`.
pub fn episode_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

/// Worker threads: `VF_THREADS` if set, otherwise the available parallelism.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("VF_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::spec(format!(
                "VF_THREADS={v} is not a positive integer"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
    }
}

/// One finished episode with its position in the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub scenario_set: String,
    pub speed_band: String,
    pub approach: String,
    pub seed: u64,
    pub episode: usize,
    pub record: EpisodeRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRates {
    pub seed: u64,
    pub rates: Rates<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub scenario_set: String,
    pub speed_band: String,
    pub approach: String,
    pub policy: String,
    pub seeds: usize,
    pub mean: Rates<f64>,
    pub std: Rates<f64>,
    pub per_seed: Vec<SeedRates>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_sha256: String,
    pub cells: Vec<ReportCell>,
}

#[derive(Clone, Debug)]
pub struct EvalResult {
    pub episodes: Vec<EpisodeRow>,
    pub report: EvalReport,
}

impl EvalResult {
    pub fn cell(
        &self,
        scenario_set: &str,
        band: [f64; 2],
        approach: &ApproachSpec,
    ) -> Option<&ReportCell> {
        let (b, a) = (band_label(band), approach.label());
        self.report
            .cells
            .iter()
            .find(|c| c.scenario_set == scenario_set && c.speed_band == b && c.approach == a)
    }
}

#[derive(Clone, Copy, Debug)]
struct Job {
    approach: usize,
    band: usize,
    set: usize,
    seed: usize,
    episode: usize,
}

/// Runs `config` on `threads` workers. Results do not depend on `threads`.
/// A session policy always runs its episodes one after another.
pub fn run_eval(config: &EvalConfig, threads: usize) -> Result<EvalResult, CliError> {
    config.validate()?;
    if let PolicyChoice::BridgeSession {
        endpoint,
        timeout_ms,
    } = &config.policy
    {
        let session = Mutex::new(open_session(endpoint, *timeout_ms)?);
        let result = run_with(config, 1, |_, runner, seed| {
            let mut policy = session.lock().expect("session lock");
            Ok(runner.run(&mut *policy, seed)?)
        });
        // best effort: the peer may already be gone after a failure
        let _ = session.into_inner().expect("session lock").close();
        return result;
    }
    run_with(config, threads, |job_config, runner, seed| {
        // bridge transports shut their peer down when dropped
        let mut policy = job_config.policy.instantiate()?;
        Ok(runner.run(policy.as_mut(), seed)?)
    })
}

/// Shared driver: `run_episode` executes one episode; everything else
/// (ordering, reduction, report assembly) is fixed here.
pub(crate) fn run_with<F>(
    config: &EvalConfig,
    threads: usize,
    run_episode: F,
) -> Result<EvalResult, CliError>
where
    F: Fn(&EvalConfig, &EpisodeRunner, u64) -> Result<EpisodeOutcome, CliError> + Sync,
{
    // road geometry is shared by every band and approach
    let parts: Vec<Vec<(Arc<SceneRenderer>, f64)>> = config
        .scenario_sets
        .iter()
        .map(|set| {
            set.scenarios
                .iter()
                .map(|cfg| {
                    Ok((
                        Arc::new(SceneRenderer::new(cfg, cfg.camera)),
                        scenario_shortest_path(cfg)?,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let banded: Vec<Vec<Vec<Arc<ScenarioConfig>>>> = config
        .speed_bands
        .iter()
        .map(|&band| {
            config
                .scenario_sets
                .iter()
                .map(|set| {
                    set.scenarios
                        .iter()
                        .map(|c| Arc::new(c.clone().with_speed_band(band)))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut jobs = Vec::new();
    for approach in 0..config.approaches.len() {
        for band in 0..config.speed_bands.len() {
            for set in 0..config.scenario_sets.len() {
                for seed in 0..config.seeds.len() {
                    for episode in 0..config.episodes {
                        jobs.push(Job {
                            approach,
                            band,
                            set,
                            seed,
                            episode,
                        });
                    }
                }
            }
        }
    }

    let execute = |job: &Job| -> Result<EpisodeRecord, CliError> {
        let scenarios = &banded[job.band][job.set];
        let k = job.episode % scenarios.len();
        let (renderer, shortest) = &parts[job.set][k];
        let settings = EpisodeSettings {
            approach: config.approaches[job.approach],
            kf: config.kf,
            kf_image: config.kf_image,
            history: config.history,
            log_steps: false,
            check_forecasts: false,
        };
        let runner = EpisodeRunner::with_parts(
            Arc::clone(&scenarios[k]),
            settings,
            Arc::clone(renderer),
            *shortest,
        )?;
        let seed = episode_seed(config.seeds[job.seed], job.episode);
        Ok(run_episode(config, &runner, seed)?.record)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let results: Vec<Result<EpisodeRecord, CliError>> =
        pool.install(|| jobs.par_iter().map(execute).collect());

    let mut episodes = Vec::with_capacity(jobs.len());
    for (job, res) in jobs.iter().zip(results) {
        episodes.push(EpisodeRow {
            scenario_set: config.scenario_sets[job.set].name.clone(),
            speed_band: band_label(config.speed_bands[job.band]),
            approach: config.approaches[job.approach].label(),
            seed: config.seeds[job.seed],
            episode: job.episode,
            record: res?,
        });
    }
    let report = reduce(config, &episodes)?;
    Ok(EvalResult { episodes, report })
}

fn reduce(config: &EvalConfig, episodes: &[EpisodeRow]) -> Result<EvalReport, CliError> {
    let mut keys: Vec<CellKey> = Vec::new();
    for e in episodes {
        let key = CellKey {
            scenario_set: e.scenario_set.clone(),
            speed_band: e.speed_band.clone(),
            approach: e.approach.clone(),
        };
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut per_seed = Vec::new();
    for &seed in &config.seeds {
        let mut cells = Vec::new();
        for key in &keys {
            let records: Vec<EpisodeRecord> = episodes
                .iter()
                .filter(|e| {
                    e.seed == seed
                        && e.scenario_set == key.scenario_set
                        && e.speed_band == key.speed_band
                        && e.approach == key.approach
                })
                .map(|e| e.record.clone())
                .collect();
            cells.push((key.clone(), rates(&records)?));
        }
        per_seed.push(SeedReport { seed, cells });
    }
    let agg: Vec<AggregateCell<f64>> = aggregate_seeds(&per_seed)?;
    let policy = config.policy.label();
    let cells = agg
        .into_iter()
        .enumerate()
        .map(|(i, a)| ReportCell {
            scenario_set: a.key.scenario_set,
            speed_band: a.key.speed_band,
            approach: a.key.approach,
            policy: policy.clone(),
            seeds: a.seeds,
            mean: a.mean,
            std: a.std,
            per_seed: per_seed
                .iter()
                .map(|r| SeedRates {
                    seed: r.seed,
                    rates: r.cells[i].1,
                })
                .collect(),
        })
        .collect();
    Ok(EvalReport {
        config_sha256: config_hash(config)?,
        cells,
    })
}

pub fn config_hash(config: &EvalConfig) -> Result<String, CliError> {
    let text = serde_json::to_string(config).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(crate::output::sha256_hex(text.as_bytes()))
}

pub fn episodes_csv(rows: &[EpisodeRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario_set",
        "speed_band",
        "approach",
        "seed",
        "episode",
        "episode_seed",
        "scenario_id",
        "cause",
        "shortest",
        "path",
        "steps",
    ])?;
    for r in rows {
        let rec = &r.record;
        w.write_record([
            r.scenario_set.clone(),
            r.speed_band.clone(),
            r.approach.clone(),
            r.seed.to_string(),
            r.episode.to_string(),
            rec.seed.to_string(),
            rec.scenario_id.clone(),
            rec.cause.as_str().to_string(),
            format!("{:.6}", rec.shortest),
            format!("{:.6}", rec.path),
            rec.steps.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn report_csv(report: &EvalReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario_set",
        "speed_band",
        "approach",
        "policy",
        "seeds",
        "n",
        "spl",
        "success",
        "collision",
        "oob",
        "timeout",
        "spl_std",
        "success_std",
        "collision_std",
        "oob_std",
        "timeout_std",
    ])?;
    let f = |v: f64| format!("{v:.6}");
    for c in &report.cells {
        let (m, s) = (&c.mean, &c.std);
        w.write_record([
            c.scenario_set.clone(),
            c.speed_band.clone(),
            c.approach.clone(),
            c.policy.clone(),
            c.seeds.to_string(),
            m.n.to_string(),
            f(m.spl),
            f(m.success),
            f(m.collision),
            f(m.oob),
            f(m.timeout),
            f(s.spl),
            f(s.success),
            f(s.collision),
            f(s.oob),
            f(s.timeout),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Writes `episodes.csv`, `report.csv`, `report.json` and `manifest.json`.
pub fn write_reports(
    config: &EvalConfig,
    result: &EvalResult,
    out: &Path,
    command: &str,
) -> Result<(), CliError> {
    let mut dir = OutDir::create(out)?;
    dir.write("episodes.csv", &episodes_csv(&result.episodes)?)?;
    dir.write("report.csv", &report_csv(&result.report)?)?;
    let json = serde_json::to_string_pretty(&result.report)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    dir.write("report.json", (json + "\n").as_bytes())?;
    dir.finish(command, config)?;
    Ok(())
}

pub fn cmd_eval(config: &EvalConfig, out: &Path) -> Result<EvalResult, CliError> {
    let result = run_eval(config, threads_from_env()?)?;
    write_reports(config, &result, out, "eval")?;
    Ok(result)
}

/// One-line summary per report cell, for the terminal.
pub fn summary(report: &EvalReport) -> String {
    let mut s = String::new();
    for c in &report.cells {
        let _ = writeln!(
            s,
            "{:<18} {:<9} {:<22} spl {:.3} success {:.3} collision {:.3} oob {:.3} timeout {:.3}",
            c.scenario_set,
            c.speed_band,
            c.approach,
            c.mean.spl,
            c.mean.success,
            c.mean.collision,
            c.mean.oob,
            c.mean.timeout
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use visfore::render::Approach;

    #[test]
    fn band_parsing() {
        assert_eq!(parse_band("0.6-1.2").unwrap(), [0.6, 1.2]);
        assert_eq!(parse_band("0.3,0.6").unwrap(), [0.3, 0.6]);
        assert!(parse_band("fast").is_err());
        assert_eq!(band_label([0.6, 1.2]), "0.6-1.2");
    }

    #[test]
    fn grid_rejects_overlay_without_forecaster() {
        let err = approach_grid(&[Approach::SegBoxBox], &[Forecaster::None], &[Space::World])
            .unwrap_err();
        assert!(matches!(err, CliError::InvalidSpec(_)));
    }

    #[test]
    fn grid_collapses_space_without_forecaster() {
        let g = approach_grid(
            &[Approach::Seg],
            &[Forecaster::None, Forecaster::Cvm],
            &[Space::World, Space::Image],
        )
        .unwrap();
        let labels: Vec<String> = g.iter().map(|a| a.label()).collect();
        assert_eq!(labels, ["seg/none/3d", "seg/cvm/3d", "seg/cvm/2d"]);
    }

    #[test]
    fn episode_seeds_are_distinct() {
        let mut all: Vec<u64> = (1..=3)
            .flat_map(|s| (0..100).map(move |i| episode_seed(s, i)))
            .collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 300);
    }

    #[test]
    fn config_round_trips_through_json() {
        let policy = PolicyChoice::Builtin {
            spec: PolicySpec::parse("pixel-avoid").unwrap(),
        };
        let cfg = EvalConfig::new("open-field", vec![], policy).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: EvalConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
