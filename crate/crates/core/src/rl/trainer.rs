//! Episode rollout and the shared-network update: every active agent acts by
//! sampling from one policy on its own observation, all agents' transitions
//! train that single parameter set at the episode boundary.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{AircraftId, SpeedCommand};
use crate::env::Environment;
use crate::nn::{NetworkParams, ParamSet};
use crate::seeds::mix_seed;

use super::buffer::{AgentSequence, EpisodeBuffer, Transition};
use super::losses::{advantage, critic_loss, discounted_returns, head_gradients};
use super::{TrainError, TrainerConfig};

/// Per-episode training metrics, one row of the learning curve.
#[derive(Debug, Clone)]
pub struct EpisodeMetrics {
    /// Aircraft that exited without ever being in conflict.
    pub score: usize,
    /// Conflict pair-epochs observed during the episode.
    pub conflicts: usize,
    pub mean_reward: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub entropy: f64,
    pub epochs: usize,
    pub transitions: usize,
}

/// Aggregate statistics of one gradient update.
#[derive(Debug, Clone, Default)]
pub struct UpdateStats {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub entropy: f64,
    pub grad_norm: f64,
}

/// Sample an action index from a categorical distribution.
pub fn sample_action(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Statistics of a collected episode before any update.
#[derive(Debug, Clone)]
pub struct RolloutStats {
    pub score: usize,
    pub conflicts: usize,
    pub mean_reward: f64,
    pub mean_entropy: f64,
    pub epochs: usize,
}

/// Run one full episode with the frozen policy, decentralized execution:
/// each agent samples from the shared network on its own observation.
pub fn collect_episode(
    env: &mut Environment,
    params: &NetworkParams,
    config: &TrainerConfig,
    env_seed: u64,
    policy_seed: u64,
) -> Result<(EpisodeBuffer, RolloutStats), TrainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(policy_seed);
    let (mut outcome, _schedule) = env.reset(env_seed);

    let mut sequences: BTreeMap<AircraftId, AgentSequence> = BTreeMap::new();
    let mut reward_sum = 0.0;
    let mut reward_count = 0usize;
    let mut entropy_sum = 0.0;
    let mut entropy_count = 0usize;

    while !outcome.episode_done {
        if config.max_epochs_per_episode > 0 && env.epochs() >= config.max_epochs_per_episode {
            break;
        }
        // Decide for every active agent on the frozen parameters.
        let mut actions: BTreeMap<AircraftId, SpeedCommand> = BTreeMap::new();
        let mut pending: Vec<(AircraftId, Transition)> = Vec::new();
        for (id, obs) in &outcome.observations {
            let out = params.policy_value(obs.as_slice())?;
            let action = sample_action(&out.policy, &mut rng);
            entropy_sum += out.entropy();
            entropy_count += 1;
            actions.insert(*id, SpeedCommand::from_index(action).expect("3 actions"));
            pending.push((
                *id,
                Transition {
                    observation: obs.clone(),
                    action,
                    log_prob_old: out.log_policy[action],
                    reward: 0.0,
                    value: out.value,
                    done: false,
                    agent: *id,
                    epoch: env.epochs(),
                },
            ));
        }

        outcome = env.step(&actions)?;

        let rewards: BTreeMap<AircraftId, f64> = outcome.rewards.iter().copied().collect();
        let dones: BTreeMap<AircraftId, bool> = outcome.dones.iter().copied().collect();
        for (id, mut transition) in pending {
            transition.reward = rewards[&id];
            transition.done = dones[&id];
            reward_sum += transition.reward;
            reward_count += 1;
            sequences
                .entry(id)
                .or_insert_with(|| AgentSequence {
                    agent: id,
                    transitions: Vec::new(),
                    bootstrap_value: 0.0,
                })
                .transitions
                .push(transition);
        }
    }

    // Truncated episode: agents still alive bootstrap from the critic's
    // estimate of their next observation; terminated agents keep zero.
    if !outcome.episode_done {
        for (id, obs) in &outcome.observations {
            if let Some(seq) = sequences.get_mut(id) {
                seq.bootstrap_value = params.policy_value(obs.as_slice())?.value;
            }
        }
    }

    let stats = RolloutStats {
        score: env.goals(),
        conflicts: env.conflict_events(),
        mean_reward: if reward_count > 0 { reward_sum / reward_count as f64 } else { 0.0 },
        mean_entropy: if entropy_count > 0 { entropy_sum / entropy_count as f64 } else { 0.0 },
        epochs: env.epochs(),
    };
    Ok((EpisodeBuffer { sequences: sequences.into_values().collect() }, stats))
}

/// Mean-over-transitions gradient of the combined loss on `buffer`, without
/// applying it. Also returns the loss statistics at the current parameters.
pub fn update_gradients(
    params: &NetworkParams,
    buffer: &EpisodeBuffer,
    config: &TrainerConfig,
) -> Result<(ParamSet, UpdateStats), TrainError> {
    let mut grads = ParamSet::zeros(&params.config);
    let n = buffer.total_transitions();
    if n == 0 {
        return Ok((grads, UpdateStats::default()));
    }

    // Returns and advantages are fixed for the whole update; they come from
    // the sampling-time values.
    let mut per_seq: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(buffer.sequences.len());
    for seq in &buffer.sequences {
        let returns = discounted_returns(&seq.rewards(), seq.bootstrap_value, config.gamma);
        let advs = advantage(&returns, &seq.values())?;
        per_seq.push((returns, advs));
    }
    if config.normalize_advantages {
        let all: Vec<f64> = per_seq.iter().flat_map(|(_, a)| a.iter().copied()).collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let var = all.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / all.len() as f64;
        let std = var.sqrt();
        for (_, advs) in &mut per_seq {
            for a in advs.iter_mut() {
                *a = (*a - mean) / (std + 1e-8);
            }
        }
    }

    let mut stats = UpdateStats::default();
    let mut new_values: Vec<f64> = Vec::with_capacity(n);
    let mut all_returns: Vec<f64> = Vec::with_capacity(n);
    for (seq, (returns, advs)) in buffer.sequences.iter().zip(&per_seq) {
        for ((transition, &ret), &adv) in seq.transitions.iter().zip(returns).zip(advs) {
            let (out, trace) = params.forward(transition.observation.as_slice())?;
            let heads = head_gradients(
                &out,
                transition.action,
                transition.log_prob_old,
                adv,
                ret,
                config,
            );
            params.backward_into(&trace, &heads, &mut grads);

            stats.actor_loss += match config.loss_variant {
                super::LossVariant::A2c => super::losses::actor_loss_a2c(
                    out.log_policy[transition.action],
                    adv,
                    0.0,
                    0.0,
                ),
                super::LossVariant::Ppo => super::losses::actor_loss_ppo(
                    out.log_policy[transition.action],
                    transition.log_prob_old,
                    adv,
                    config.clip_epsilon,
                ),
            };
            stats.entropy += out.entropy();
            new_values.push(out.value);
            all_returns.push(ret);
        }
    }
    grads.scale(1.0 / n as f64);
    stats.actor_loss /= n as f64;
    stats.entropy /= n as f64;
    stats.critic_loss = critic_loss(&all_returns, &new_values)?;
    stats.grad_norm = grads.l2_norm();
    Ok((grads, stats))
}

/// Fixed returns and advantages for every transition of a buffer, from the
/// sampling-time values.
fn fixed_targets(
    buffer: &EpisodeBuffer,
    config: &TrainerConfig,
) -> Result<Vec<(f64, f64)>, TrainError> {
    let mut targets = Vec::with_capacity(buffer.total_transitions());
    for seq in &buffer.sequences {
        let returns = discounted_returns(&seq.rewards(), seq.bootstrap_value, config.gamma);
        let advs = advantage(&returns, &seq.values())?;
        targets.extend(returns.into_iter().zip(advs));
    }
    if config.normalize_advantages && !targets.is_empty() {
        let n = targets.len() as f64;
        let mean = targets.iter().map(|(_, a)| a).sum::<f64>() / n;
        let var = targets.iter().map(|(_, a)| (a - mean) * (a - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        for (_, a) in &mut targets {
            *a = (*a - mean) / (std + 1e-8);
        }
    }
    Ok(targets)
}

/// Run `epochs_per_update` passes over the episode buffer, one minibatch
/// gradient step at a time (deterministically shuffled by `shuffle_seed`).
/// Returns and advantages stay fixed at their sampling-time values for the
/// whole update; the clipped-surrogate ratio tracks the moving policy.
pub fn apply_update(
    params: &mut NetworkParams,
    buffer: &EpisodeBuffer,
    config: &TrainerConfig,
    shuffle_seed: u64,
) -> Result<UpdateStats, TrainError> {
    let n = buffer.total_transitions();
    if n == 0 {
        return Ok(UpdateStats::default());
    }
    let transitions: Vec<&Transition> =
        buffer.sequences.iter().flat_map(|s| s.transitions.iter()).collect();
    let targets = fixed_targets(buffer, config)?;
    let batch = if config.minibatch_size == 0 { n } else { config.minibatch_size.min(n) };

    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut stats = UpdateStats::default();
    let mut grads = ParamSet::zeros(&params.config);
    let epochs = config.epochs_per_update.max(1);
    for _ in 0..epochs {
        shuffle(&mut order, &mut rng);
        for chunk in order.chunks(batch) {
            grads.scale(0.0);
            for &idx in chunk {
                let transition = transitions[idx];
                let (ret, adv) = targets[idx];
                let (out, trace) = params.forward(transition.observation.as_slice())?;
                let heads = head_gradients(
                    &out,
                    transition.action,
                    transition.log_prob_old,
                    adv,
                    ret,
                    config,
                );
                params.backward_into(&trace, &heads, &mut grads);

                stats.actor_loss += match config.loss_variant {
                    super::LossVariant::A2c => super::losses::actor_loss_a2c(
                        out.log_policy[transition.action],
                        adv,
                        0.0,
                        0.0,
                    ),
                    super::LossVariant::Ppo => super::losses::actor_loss_ppo(
                        out.log_policy[transition.action],
                        transition.log_prob_old,
                        adv,
                        config.clip_epsilon,
                    ),
                };
                stats.entropy += out.entropy();
                stats.critic_loss += (ret - out.value) * (ret - out.value);
            }
            grads.scale(1.0 / chunk.len() as f64);
            let norm = grads.l2_norm();
            stats.grad_norm = stats.grad_norm.max(norm);
            if config.grad_clip_norm > 0.0 && norm > config.grad_clip_norm {
                grads.scale(config.grad_clip_norm / norm);
            }
            params.adam_step(&grads, config.lr, &config.adam)?;
        }
    }
    let samples = (n * epochs) as f64;
    stats.actor_loss /= samples;
    stats.critic_loss /= samples;
    stats.entropy /= samples;
    Ok(stats)
}

/// Deterministic Fisher-Yates shuffle.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}

/// Collect one episode per environment (ordered by environment index),
/// then apply a single combined update over every transition.
pub fn train_update(
    envs: &mut [Environment],
    params: &mut NetworkParams,
    config: &TrainerConfig,
    update_seed: u64,
) -> Result<Vec<EpisodeMetrics>, TrainError> {
    let mut episodes: Vec<(EpisodeBuffer, RolloutStats)> = Vec::with_capacity(envs.len());
    if envs.len() == 1 {
        let env_seed = mix_seed(update_seed, 0);
        let policy_seed = mix_seed(update_seed, 1);
        episodes.push(collect_episode(&mut envs[0], params, config, env_seed, policy_seed)?);
    } else {
        // Fan rollouts out across threads; each environment is independent
        // and reads a frozen snapshot of the parameters. Results join in
        // environment order, so K > 1 stays deterministic.
        let frozen: &NetworkParams = params;
        let results: Vec<Result<(EpisodeBuffer, RolloutStats), TrainError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = envs
                    .iter_mut()
                    .enumerate()
                    .map(|(k, env)| {
                        let env_seed = mix_seed(update_seed, 2 * k as u64);
                        let policy_seed = mix_seed(update_seed, 2 * k as u64 + 1);
                        scope.spawn(move || {
                            collect_episode(env, frozen, config, env_seed, policy_seed)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("rollout thread panicked")).collect()
            });
        for result in results {
            episodes.push(result?);
        }
    }

    let mut combined = EpisodeBuffer::default();
    for (buffer, _) in &episodes {
        combined.sequences.extend(buffer.sequences.iter().cloned());
    }
    let stats = apply_update(params, &combined, config)?;

    Ok(episodes
        .into_iter()
        .map(|(buffer, rollout)| EpisodeMetrics {
            score: rollout.score,
            conflicts: rollout.conflicts,
            mean_reward: rollout.mean_reward,
            actor_loss: stats.actor_loss,
            critic_loss: stats.critic_loss,
            entropy: rollout.mean_entropy,
            epochs: rollout.epochs,
            transitions: buffer.total_transitions(),
        })
        .collect())
}

/// One episode, one update: the single-environment training step.
pub fn train_episode(
    env: &mut Environment,
    params: &mut NetworkParams,
    config: &TrainerConfig,
    episode_seed: u64,
) -> Result<EpisodeMetrics, TrainError> {
    let metrics = train_update(std::slice::from_mut(env), params, config, episode_seed)?;
    Ok(metrics.into_iter().next().expect("one environment yields one episode"))
}
