//! Command-line interface definition. Flag values override scenario-file
//! values, which override built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "enroute",
    about = "Train and evaluate speed-advisory policies for en-route sector traffic",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy on a scenario and write checkpoints plus learning curves.
    Train(TrainArgs),
    /// Evaluate a checkpoint over many episodes and report score statistics.
    Eval(EvalArgs),
    /// Roll out a single episode with a fixed or learned policy and write a trace.
    Simulate(SimulateArgs),
    /// Print a human-readable summary of a scenario and/or checkpoint.
    Inspect(InspectArgs),
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Output directory (falls back to $ENROUTE_OUT_DIR, then "enroute-out").
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutputArgs {
    pub fn resolve(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("ENROUTE_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("enroute-out"))
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Run seed; overrides the scenario file's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of training episodes; overrides the trainer config.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Resume from an existing checkpoint instead of fresh parameters.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Write a checkpoint every N episodes (0 = only the final one).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
    /// Stop early once a periodic evaluation reaches this mean score.
    #[arg(long)]
    pub target_score: Option<f64>,
    /// Use greedy action selection for periodic evaluations.
    #[arg(long, default_value_t = false)]
    pub eval_greedy: bool,

    // Trainer overrides (scenario [trainer] section supplies the rest).
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub clip_epsilon: Option<f64>,
    #[arg(long)]
    pub entropy_coef: Option<f64>,
    #[arg(long)]
    pub value_loss_weight: Option<f64>,
    /// Actor loss: plain policy gradient or clipped surrogate.
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    #[arg(long)]
    pub epochs_per_update: Option<usize>,
    #[arg(long)]
    pub grad_clip: Option<f64>,
    #[arg(long)]
    pub normalize_advantages: Option<bool>,
    /// Independent environments collected per update.
    #[arg(long)]
    pub num_envs: Option<usize>,
    /// Evaluate every N episodes during training (0 = never).
    #[arg(long)]
    pub eval_every: Option<usize>,
    /// Episodes per periodic evaluation.
    #[arg(long)]
    pub eval_episodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    A2c,
    Ppo,
}

impl From<LossArg> for enroute_core::LossVariant {
    fn from(value: LossArg) -> Self {
        match value {
            LossArg::A2c => enroute_core::LossVariant::A2c,
            LossArg::Ppo => enroute_core::LossVariant::Ppo,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Checkpoint to evaluate; must match the scenario's dimensions.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluation episodes.
    #[arg(long, default_value_t = 200)]
    pub episodes: usize,
    /// Use greedy instead of sampled action selection.
    #[arg(long, default_value_t = false)]
    pub greedy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Always hold the current speed.
    Hold,
    /// Always accelerate toward the envelope maximum.
    Accel,
    /// Always decelerate toward the envelope minimum.
    Decel,
    /// Uniform-random advisories.
    Random,
    /// Act with a trained checkpoint.
    Checkpoint,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Which policy drives the episode.
    #[arg(long, value_enum)]
    pub policy: PolicyArg,
    /// Checkpoint path (required when --policy checkpoint).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Sample checkpoint actions instead of taking the argmax.
    #[arg(long, default_value_t = false)]
    pub sample: bool,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}
