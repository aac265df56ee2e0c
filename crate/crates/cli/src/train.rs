//! The train command: episode loop, learning-curve CSVs, periodic
//! checkpoints and evaluations, and the final checkpoint.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use enroute_core::nn::checkpoint;
use enroute_core::rl::{evaluate, train_update, ActionSelection, TrainerConfig};
use enroute_core::seeds::mix_seed;
use enroute_core::{load_scenario, Environment, NetworkParams};

use crate::args::TrainArgs;
use crate::manifest::{self, RunManifest, TrainSettings};
use crate::outputs::{self, CsvFile};

/// Seed-stream salts; update k uses salt k, so these stay out of the way of
/// any realistic episode count.
const INIT_STREAM: u64 = u64::MAX;
const EVAL_STREAM: u64 = u64::MAX - 1;

pub fn resolve_trainer(file_trainer: Option<TrainerConfig>, args: &TrainArgs) -> TrainerConfig {
    let mut config = file_trainer.unwrap_or_default();
    if let Some(v) = args.lr {
        config.lr = v;
    }
    if let Some(v) = args.gamma {
        config.gamma = v;
    }
    if let Some(v) = args.clip_epsilon {
        config.clip_epsilon = v;
    }
    if let Some(v) = args.entropy_coef {
        config.entropy_coef = v;
    }
    if let Some(v) = args.value_loss_weight {
        config.value_loss_weight = v;
    }
    if let Some(v) = args.loss {
        config.loss_variant = v.into();
    }
    if let Some(v) = args.epochs_per_update {
        config.epochs_per_update = v;
    }
    if let Some(v) = args.grad_clip {
        config.grad_clip_norm = v;
    }
    if let Some(v) = args.normalize_advantages {
        config.normalize_advantages = v;
    }
    if let Some(v) = args.num_envs {
        config.num_envs = v;
    }
    if let Some(v) = args.eval_every {
        config.eval_interval = v;
    }
    if let Some(v) = args.eval_episodes {
        config.eval_episodes = v;
    }
    if let Some(v) = args.episodes {
        config.max_episodes = v;
    }
    config
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let out_dir = args.output.resolve();
    let loaded = load_scenario(&args.scenario)?;
    let seed = args.seed.unwrap_or(loaded.config.rng_seed);
    let trainer = resolve_trainer(loaded.trainer.clone(), args);
    trainer.validate()?;
    let episodes = trainer.max_episodes;

    let manifest = RunManifest {
        format_version: manifest::MANIFEST_FORMAT_VERSION,
        command: "train".to_string(),
        scenario_name: loaded.name.clone(),
        scenario_sha256: manifest::sha256_of_file(&args.scenario)?,
        seed,
        scenario: loaded.config.clone(),
        trainer: Some(trainer.clone()),
        train: Some(TrainSettings {
            episodes,
            checkpoint_every: args.checkpoint_every,
            target_score: args.target_score,
            eval_greedy: args.eval_greedy,
            resumed_from_checkpoint: args.resume.is_some(),
        }),
        eval: None,
        formats: Default::default(),
    };
    manifest::write_manifest(&manifest, &out_dir)?;

    let net_config = loaded.config.network_config();
    let mut params = match &args.resume {
        Some(path) => checkpoint::load_for_config(path, &net_config)?,
        None => NetworkParams::init(
            net_config,
            &mut ChaCha8Rng::seed_from_u64(mix_seed(seed, INIT_STREAM)),
        ),
    };

    let mut envs: Vec<Environment> = Vec::new();
    for _ in 0..trainer.num_envs {
        envs.push(Environment::new(loaded.config.clone())?);
    }
    let mut eval_env = Environment::new(loaded.config.clone())?;
    let eval_selection =
        if args.eval_greedy { ActionSelection::Greedy } else { ActionSelection::Sample };

    let mut curve =
        CsvFile::create(&out_dir.join("curve.csv"), outputs::CURVE_FORMAT, outputs::CURVE_HEADER)?;
    let mut timing = CsvFile::create(
        &out_dir.join("timing.csv"),
        outputs::TIMING_FORMAT,
        outputs::TIMING_HEADER,
    )?;
    let mut eval_curve = if trainer.eval_interval > 0 {
        Some(CsvFile::create(
            &out_dir.join("eval.csv"),
            outputs::EVAL_CURVE_FORMAT,
            outputs::EVAL_CURVE_HEADER,
        )?)
    } else {
        None
    };

    let started = Instant::now();
    let mut episode = 0usize;
    let mut update_index = 0u64;
    let mut reached_target = false;
    'training: while episode < episodes {
        let metrics = train_update(&mut envs, &mut params, &trainer, mix_seed(seed, update_index))?;
        update_index += 1;
        for m in &metrics {
            episode += 1;
            curve.row(&format!(
                "{},{},{},{},{},{},{},{}",
                episode, m.score, m.score, m.conflicts, m.mean_reward, m.actor_loss,
                m.critic_loss, m.entropy
            ))?;
            timing.row(&format!("{},{}", episode, started.elapsed().as_secs_f64()))?;

            if args.checkpoint_every > 0 && episode % args.checkpoint_every == 0 {
                let path = out_dir.join(format!("checkpoints/ep{episode:06}.ckpt.json"));
                checkpoint::save(&params, &path).context("writing periodic checkpoint")?;
            }

            if trainer.eval_interval > 0 && episode % trainer.eval_interval == 0 {
                let report = evaluate(
                    &mut eval_env,
                    &params,
                    trainer.eval_episodes,
                    eval_selection,
                    mix_seed(seed, EVAL_STREAM ^ episode as u64),
                )?;
                println!(
                    "episode {episode}: eval mean {:.3} +/- {:.3}, median {}, resolution {:.2}%",
                    report.mean_score,
                    report.std_dev,
                    report.median,
                    100.0 * report.resolution_rate
                );
                if let Some(w) = eval_curve.as_mut() {
                    w.row(&format!(
                        "{},{},{},{},{}",
                        episode,
                        report.mean_score,
                        report.std_dev,
                        report.median,
                        report.resolution_rate
                    ))?;
                }
                if let Some(target) = args.target_score {
                    if report.mean_score >= target {
                        println!("target score {target} reached at episode {episode}; stopping");
                        reached_target = true;
                        break 'training;
                    }
                }
            }
            if episode >= episodes {
                break 'training;
            }
        }
    }

    let final_path = out_dir.join("checkpoints/final.ckpt.json");
    checkpoint::save(&params, &final_path).context("writing final checkpoint")?;
    curve.finish()?;
    timing.finish()?;
    if let Some(w) = eval_curve {
        w.finish()?;
    }
    println!(
        "trained {episode} episode(s) in {:.1}s; final checkpoint at {}{}",
        started.elapsed().as_secs_f64(),
        final_path.display(),
        if reached_target { " (early stop)" } else { "" }
    );
    Ok(())
}

/// Final checkpoint path for a given output directory.
pub fn final_checkpoint_path(out_dir: &Path) -> PathBuf {
    out_dir.join("checkpoints/final.ckpt.json")
}
