use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use visfore::episode::{ApproachSpec, Forecaster};
use visfore::forecast::{KfParams, Space};
use visfore::policy::PolicySpec;
use visfore::render::Approach;
use visfore_cli::eval::{
    approach_grid, cmd_eval, parse_band, resolve_scenario, summary, EvalConfig, PolicyChoice,
    SessionEndpoint, DEFAULT_HISTORY,
};
use visfore_cli::forecast_eval::{
    cmd_forecast_eval, ForecastEvalConfig, SyntheticSpec, TrackSource,
};
use visfore_cli::render_dump::{cmd_render_dump, RenderDumpConfig};
use visfore_cli::CliError;

#[derive(Parser)]
#[command(
    name = "visfore",
    version,
    about = "Visual forecasting for navigation: evaluation and dumps"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every approach × band × seed × episode and write reports.
    Eval(EvalArgs),
    /// FDE/ADE of CVM, KF and GT forecasts on trajectories.
    ForecastEval(ForecastArgs),
    /// Write the observation of every step as a paletted PNG.
    RenderDump(DumpArgs),
    /// Evaluate an external policy over one long bridge session.
    BridgeServe(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    #[value(name = "3d")]
    World,
    #[value(name = "2d")]
    Image,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::World => Space::World,
            SpaceArg::Image => Space::Image,
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Preset name (s-turn, urban-grid, ...) or scenario JSON file.
    #[arg(long, default_value = "s-turn")]
    scenario: String,
    /// Observation approaches: seg, seg-box, seg-box+box, seg+ap.
    #[arg(long, value_delimiter = ',', default_value = "seg")]
    approach: Vec<String>,
    /// Forecasters: none, cvm, kf, gt.
    #[arg(long, value_delimiter = ',', default_value = "none")]
    forecaster: Vec<String>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "3d")]
    space: Vec<SpaceArg>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
    /// Episodes per seed and cell.
    #[arg(long, default_value_t = 50)]
    episodes: usize,
    /// Pedestrian speed band `lo-hi` in m/s; repeat for several. Defaults to
    /// the three evaluation bands.
    #[arg(long = "speed-band")]
    speed_band: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Built-in policy name, or a JSON policy spec such as
    /// `{"name":"pure-pursuit","lookahead":6}`.
    #[arg(long, default_value = "pure-pursuit")]
    policy: String,
    /// External policy command, started once per episode.
    #[arg(long, conflicts_with = "policy_tcp")]
    policy_cmd: Option<String>,
    /// External policy listening on this address, one connection per episode.
    #[arg(long)]
    policy_tcp: Option<String>,
    /// Rerun a config or manifest file; other run flags except --out are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Start this policy command and keep one session for all episodes.
    #[arg(long, conflicts_with = "listen", required_unless_present = "listen")]
    cmd: Option<String>,
    /// Accept one policy connection on this address.
    #[arg(long)]
    listen: Option<String>,
    /// Per-action reply timeout, milliseconds.
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
}

#[derive(Args)]
struct ForecastArgs {
    /// CSV with columns object_id,step,cx,cy,w,h.
    #[arg(long, conflicts_with = "synthetic")]
    tracks: Option<String>,
    /// Number of synthetic constant-velocity tracks.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Synthetic position noise, metres.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Synthetic observations per track.
    #[arg(long, default_value_t = 8)]
    history: usize,
    #[arg(long, default_value_t = 5)]
    horizon: usize,
    #[arg(long, default_value_t = 4)]
    stride: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long, default_value = "s-turn")]
    scenario: String,
    /// Index of the scenario within the preset or file.
    #[arg(long, default_value_t = 0)]
    variant: usize,
    #[arg(long, default_value = "seg")]
    approach: String,
    #[arg(long, default_value = "none")]
    forecaster: String,
    #[arg(long, value_enum, default_value = "3d")]
    space: SpaceArg,
    #[arg(long, default_value = "pure-pursuit")]
    policy: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    steps: usize,
    /// Pedestrian speed band `lo-hi`; the scenario's own ranges otherwise.
    #[arg(long = "speed-band")]
    speed_band: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_approach(s: &str) -> Result<Approach, CliError> {
    Approach::parse(s).ok_or_else(|| CliError::spec(format!("unknown approach `{s}`")))
}

fn parse_forecaster(s: &str) -> Result<Forecaster, CliError> {
    Forecaster::parse(s).ok_or_else(|| CliError::spec(format!("unknown forecaster `{s}`")))
}

fn parse_policy(s: &str) -> Result<PolicySpec, CliError> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| CliError::spec(format!("policy spec: {e}")));
    }
    PolicySpec::parse(s).ok_or_else(|| CliError::spec(format!("unknown policy `{s}`")))
}

fn split_command(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn build_config(run: &RunArgs, policy: PolicyChoice) -> Result<EvalConfig, CliError> {
    let approaches = run
        .approach
        .iter()
        .map(|s| parse_approach(s))
        .collect::<Result<Vec<_>, _>>()?;
    let forecasters = run
        .forecaster
        .iter()
        .map(|s| parse_forecaster(s))
        .collect::<Result<Vec<_>, _>>()?;
    let spaces: Vec<Space> = run.space.iter().map(|&s| s.into()).collect();
    let mut cfg = EvalConfig::new(
        &run.scenario,
        approach_grid(&approaches, &forecasters, &spaces)?,
        policy,
    )?;
    cfg.seeds = run.seeds.clone();
    cfg.episodes = run.episodes;
    if !run.speed_band.is_empty() {
        cfg.speed_bands = run
            .speed_band
            .iter()
            .map(|b| parse_band(b))
            .collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => EvalConfig::from_file(path)?,
        None => {
            let policy = if let Some(cmd) = &args.policy_cmd {
                PolicyChoice::bridge_command(split_command(cmd))
            } else if let Some(addr) = &args.policy_tcp {
                PolicyChoice::BridgeTcp {
                    addr: addr.clone(),
                    timeout_ms: 10_000,
                }
            } else {
                PolicyChoice::Builtin {
                    spec: parse_policy(&args.policy)?,
                }
            };
            build_config(&args.run, policy)?
        }
    };
    let result = cmd_eval(&config, &args.run.out)?;
    print!("{}", summary(&result.report));
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let endpoint = match (&args.cmd, &args.listen) {
        (Some(cmd), _) => SessionEndpoint::Command {
            argv: split_command(cmd),
        },
        (None, Some(addr)) => SessionEndpoint::Listen { addr: addr.clone() },
        (None, None) => return Err(CliError::spec("bridge-serve needs --cmd or --listen")),
    };
    let policy = PolicyChoice::BridgeSession {
        endpoint,
        timeout_ms: args.timeout_ms,
    };
    let config = build_config(&args.run, policy)?;
    let result = visfore_cli::eval::run_eval(&config, 1)?;
    visfore_cli::eval::write_reports(&config, &result, &args.run.out, "bridge-serve")?;
    print!("{}", summary(&result.report));
    Ok(())
}

fn forecast_eval(args: ForecastArgs) -> Result<(), CliError> {
    let source = match (&args.tracks, args.synthetic) {
        (Some(path), _) => TrackSource::File { path: path.clone() },
        (None, n) => TrackSource::Synthetic(SyntheticSpec {
            tracks: n.unwrap_or(100),
            noise: args.noise,
            seed: args.seed,
            history: args.history,
            ..SyntheticSpec::default()
        }),
    };
    let config = ForecastEvalConfig {
        source,
        horizon: args.horizon,
        stride: args.stride,
        kf: KfParams::default(),
    };
    for r in cmd_forecast_eval(&config, &args.out)? {
        println!(
            "{:?}: fde {:.4} ade {:.4} ({} samples)",
            r.algorithm, r.fde, r.ade, r.samples
        );
    }
    Ok(())
}

fn render_dump(args: DumpArgs) -> Result<(), CliError> {
    let scenarios: Vec<_> = resolve_scenario(&args.scenario)?
        .into_iter()
        .flat_map(|s| s.scenarios)
        .collect();
    let mut scenario = scenarios
        .get(args.variant)
        .cloned()
        .ok_or_else(|| CliError::spec(format!("scenario has no variant {}", args.variant)))?;
    if let Some(b) = &args.speed_band {
        scenario = scenario.with_speed_band(parse_band(b)?);
    }
    let forecaster = parse_forecaster(&args.forecaster)?;
    let approach = ApproachSpec {
        approach: parse_approach(&args.approach)?,
        forecaster,
        space: if forecaster == Forecaster::None {
            Space::World
        } else {
            args.space.into()
        },
    };
    let config = RenderDumpConfig {
        scenario,
        approach,
        policy: parse_policy(&args.policy)?,
        seed: args.seed,
        steps: args.steps,
        history: DEFAULT_HISTORY,
        kf: KfParams::default(),
        kf_image: KfParams::image(),
    };
    let frames = cmd_render_dump(&config, &args.out)?;
    println!("wrote {} frames to {}", frames.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Cmd::Eval(a) => eval(a),
        Cmd::ForecastEval(a) => forecast_eval(a),
        Cmd::RenderDump(a) => render_dump(a),
        Cmd::BridgeServe(a) => serve(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("visfore: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
