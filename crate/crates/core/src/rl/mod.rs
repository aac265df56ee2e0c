//! On-policy trainer: rollout collection across all agents, discounted
//! returns and advantages, selectable actor loss (plain policy gradient or
//! clipped surrogate), critic regression, and episode-boundary updates of
//! the single shared network.

pub mod buffer;
pub mod eval;
pub mod losses;
pub mod trainer;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::EnvError;
use crate::nn::{AdamHyper, NetError};

pub use buffer::{AgentSequence, EpisodeBuffer, Transition};
pub use eval::{evaluate, ActionSelection, EvalReport};
pub use losses::{
    actor_loss_a2c, actor_loss_ppo, advantage, critic_loss, discounted_returns, head_gradients,
};
pub use trainer::{
    apply_update, collect_episode, train_episode, train_update, update_gradients, EpisodeMetrics,
    RolloutStats, UpdateStats,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("mismatched lengths: {returns} returns vs {values} values")]
    LengthMismatch { returns: usize, values: usize },
    #[error("evaluation needs at least one episode")]
    NoEpisodes,
    #[error("invalid trainer config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Which actor loss drives the policy update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// Plain advantage-weighted policy gradient with entropy bonus.
    A2c,
    /// Clipped-surrogate objective on the policy-probability ratio.
    Ppo,
}

/// Trainer hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    pub gamma: f64,
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub value_loss_weight: f64,
    pub loss_variant: LossVariant,
    pub epochs_per_update: usize,
    pub lr: f64,
    pub max_episodes: usize,
    /// Evaluate every this many episodes during training (0 = never).
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Global L2 gradient-norm ceiling (0 disables clipping).
    pub grad_clip_norm: f64,
    pub normalize_advantages: bool,
    /// Independent environments collected per update.
    pub num_envs: usize,
    /// Safety cap on epochs per episode (0 = unlimited); a capped episode
    /// bootstraps still-active agents from the critic.
    pub max_epochs_per_episode: usize,
    pub adam: AdamHyper,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            gamma: 0.99,
            clip_epsilon: 0.2,
            entropy_coef: 0.01,
            value_loss_weight: 0.5,
            loss_variant: LossVariant::Ppo,
            epochs_per_update: 1,
            lr: 1e-4,
            max_episodes: 5000,
            eval_interval: 0,
            eval_episodes: 100,
            grad_clip_norm: 5.0,
            normalize_advantages: false,
            num_envs: 1,
            max_epochs_per_episode: 50_000,
            adam: AdamHyper::default(),
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(TrainError::InvalidConfig(format!(
                "gamma must be in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.clip_epsilon <= 0.0 {
            return Err(TrainError::InvalidConfig(format!(
                "clip epsilon must be positive, got {}",
                self.clip_epsilon
            )));
        }
        if self.lr <= 0.0 {
            return Err(TrainError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if self.num_envs == 0 {
            return Err(TrainError::InvalidConfig("num_envs must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_documented_values() {
        let config = TrainerConfig::default();
        assert_eq!(config.gamma, 0.99);
        assert_eq!(config.clip_epsilon, 0.2);
        assert_eq!(config.entropy_coef, 0.01);
        assert_eq!(config.value_loss_weight, 0.5);
        assert_eq!(config.loss_variant, LossVariant::Ppo);
        assert_eq!(config.epochs_per_update, 1);
        assert_eq!(config.lr, 1e-4);
        assert_eq!(config.grad_clip_norm, 5.0);
        assert!(!config.normalize_advantages);
        assert_eq!(config.num_envs, 1);
        config.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let mut config = TrainerConfig::default();
        config.gamma = 0.0;
        assert!(config.validate().is_err());
        let mut config = TrainerConfig::default();
        config.clip_epsilon = -0.1;
        assert!(config.validate().is_err());
        let mut config = TrainerConfig::default();
        config.num_envs = 0;
        assert!(config.validate().is_err());
    }
}
