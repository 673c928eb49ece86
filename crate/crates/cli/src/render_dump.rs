//! Per-step observation dumps as paletted PNGs.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use visfore::episode::{ApproachSpec, EpisodeRunner, EpisodeSettings};
use visfore::forecast::KfParams;
use visfore::policy::PolicySpec;
use visfore::render::{write_png, Class, LabelImage};
use visfore::sim::ScenarioConfig;

use crate::output::OutDir;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderDumpConfig {
    pub scenario: ScenarioConfig,
    pub approach: ApproachSpec,
    /// Drives the agent; the dump shows what any policy would observe.
    pub policy: PolicySpec,
    pub seed: u64,
    /// Number of steps after the initial frame.
    pub steps: usize,
    pub history: usize,
    pub kf: KfParams<f64>,
    pub kf_image: KfParams<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameInfo {
    pub file: String,
    pub step: usize,
    /// Pixel count per class id.
    pub class_counts: Vec<usize>,
}

fn png_bytes(img: &LabelImage) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_png(img, &mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(buf)
}

/// Frames the policy's episode produces, the initial one included.
pub fn render_frames(config: &RenderDumpConfig) -> Result<Vec<LabelImage>, CliError> {
    config.approach.validate()?;
    let settings = EpisodeSettings {
        approach: config.approach,
        kf: config.kf,
        kf_image: config.kf_image,
        history: config.history,
        log_steps: true,
        check_forecasts: false,
    };
    let runner = EpisodeRunner::new(Arc::new(config.scenario.clone()), settings)?;
    let mut policy = config.policy.build();
    let outcome = runner.run(policy.as_mut(), config.seed)?;
    let actions = outcome.steps.iter().take(config.steps).map(|s| s.action);
    Ok(runner.frames(config.seed, actions)?)
}

/// Writes `frames/step_NNNN.png`, `frames.json` and the manifest.
pub fn cmd_render_dump(config: &RenderDumpConfig, out: &Path) -> Result<Vec<FrameInfo>, CliError> {
    let frames = render_frames(config)?;
    let mut dir = OutDir::create(out)?;
    let mut infos = Vec::with_capacity(frames.len());
    for (step, img) in frames.iter().enumerate() {
        let file = format!("frames/step_{step:04}.png");
        dir.write(&file, &png_bytes(img)?)?;
        infos.push(FrameInfo {
            file,
            step,
            class_counts: Class::ALL.iter().map(|&c| img.count(c)).collect(),
        });
    }
    let json =
        serde_json::to_string_pretty(&infos).map_err(|e| CliError::Internal(e.to_string()))?;
    dir.write("frames.json", (json + "\n").as_bytes())?;
    dir.finish("render-dump", config)?;
    Ok(infos)
}
