//! Run manifests: the fully resolved configuration, seed, and format
//! versions that make a run reproducible. Output paths are deliberately
//! excluded so two runs of the same configuration carry identical manifests.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use enroute_core::nn::checkpoint::CHECKPOINT_FORMAT_VERSION;
use enroute_core::scenario::SCENARIO_FORMAT_VERSION;
use enroute_core::{ScenarioConfig, TrainerConfig};

use crate::outputs;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub scenario_name: String,
    /// SHA-256 of the scenario file bytes.
    pub scenario_sha256: String,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trainer: Option<TrainerConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSettings>,
    pub formats: FormatVersions,
}

#[derive(Debug, Serialize)]
pub struct TrainSettings {
    pub episodes: usize,
    pub checkpoint_every: usize,
    pub target_score: Option<f64>,
    pub eval_greedy: bool,
    pub resumed_from_checkpoint: bool,
}

#[derive(Debug, Serialize)]
pub struct EvalSettings {
    pub episodes: usize,
    pub greedy: bool,
}

#[derive(Debug, Serialize)]
pub struct FormatVersions {
    pub scenario: u32,
    pub checkpoint: u32,
    pub curve_csv: String,
    pub timing_csv: String,
    pub eval_curve_csv: String,
    pub scores_csv: String,
}

impl Default for FormatVersions {
    fn default() -> Self {
        FormatVersions {
            scenario: SCENARIO_FORMAT_VERSION,
            checkpoint: CHECKPOINT_FORMAT_VERSION,
            curve_csv: outputs::CURVE_FORMAT.trim_start_matches("# ").to_string(),
            timing_csv: outputs::TIMING_FORMAT.trim_start_matches("# ").to_string(),
            eval_curve_csv: outputs::EVAL_CURVE_FORMAT.trim_start_matches("# ").to_string(),
            scores_csv: outputs::SCORES_FORMAT.trim_start_matches("# ").to_string(),
        }
    }
}

pub fn sha256_of_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn write_manifest(manifest: &RunManifest, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest).context("encoding manifest")?;
    std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
