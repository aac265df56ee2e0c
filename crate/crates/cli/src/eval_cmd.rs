//! The eval command: frozen-policy evaluation with a statistics report and
//! per-episode score CSV.

use anyhow::{Context, Result};
use serde::Serialize;

use enroute_core::nn::checkpoint;
use enroute_core::rl::{evaluate, ActionSelection};
use enroute_core::seeds::mix_seed;
use enroute_core::{load_scenario, Environment};

use crate::args::EvalArgs;
use crate::manifest::{self, EvalSettings, RunManifest};
use crate::outputs::{self, CsvFile};

const EVAL_STREAM: u64 = 0xE7A1;

#[derive(Debug, Serialize)]
struct EvalReportFile {
    format_version: u32,
    scenario_name: String,
    episodes: usize,
    greedy: bool,
    mean_score: f64,
    std_dev: f64,
    median: f64,
    resolution_rate: f64,
    mean_conflicts: f64,
    max_aircraft: usize,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let out_dir = args.output.resolve();
    let loaded = load_scenario(&args.scenario)?;
    let seed = args.seed.unwrap_or(loaded.config.rng_seed);
    let params = checkpoint::load_for_config(&args.checkpoint, &loaded.config.network_config())?;
    let mut env = Environment::new(loaded.config.clone())?;
    let selection = if args.greedy { ActionSelection::Greedy } else { ActionSelection::Sample };

    let report =
        evaluate(&mut env, &params, args.episodes, selection, mix_seed(seed, EVAL_STREAM))?;

    let manifest = RunManifest {
        format_version: manifest::MANIFEST_FORMAT_VERSION,
        command: "eval".to_string(),
        scenario_name: loaded.name.clone(),
        scenario_sha256: manifest::sha256_of_file(&args.scenario)?,
        seed,
        scenario: loaded.config.clone(),
        trainer: None,
        train: None,
        eval: Some(EvalSettings { episodes: args.episodes, greedy: args.greedy }),
        formats: Default::default(),
    };
    manifest::write_manifest(&manifest, &out_dir)?;

    let mut scores = CsvFile::create(
        &out_dir.join("eval_scores.csv"),
        outputs::SCORES_FORMAT,
        outputs::SCORES_HEADER,
    )?;
    for (i, score) in report.scores.iter().enumerate() {
        scores.row(&format!("{},{}", i + 1, score))?;
    }
    scores.finish()?;

    let file = EvalReportFile {
        format_version: 1,
        scenario_name: loaded.name.clone(),
        episodes: report.episodes,
        greedy: args.greedy,
        mean_score: report.mean_score,
        std_dev: report.std_dev,
        median: report.median,
        resolution_rate: report.resolution_rate,
        mean_conflicts: report.mean_conflicts,
        max_aircraft: loaded.config.max_aircraft,
    };
    let json = serde_json::to_string_pretty(&file).context("encoding eval report")?;
    std::fs::write(out_dir.join("eval_report.json"), json)?;

    println!("scenario: {} ({} aircraft)", loaded.name, loaded.config.max_aircraft);
    println!("episodes: {}", report.episodes);
    println!("mean score: {:.3} +/- {:.3}", report.mean_score, report.std_dev);
    println!("median: {}", report.median);
    println!("conflict-free exits: {:.2}%", 100.0 * report.resolution_rate);
    println!("mean conflicts per episode: {:.3}", report.mean_conflicts);
    Ok(())
}
