//! Frozen-policy evaluation over many episodes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{AircraftId, SpeedCommand};
use crate::env::Environment;
use crate::nn::NetworkParams;
use crate::seeds::mix_seed;

use super::trainer::sample_action;
use super::TrainError;

/// How evaluation turns the policy distribution into actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionSelection {
    /// Sample from the policy, matching training-time stochastic execution.
    Sample,
    /// Take the highest-probability action (ties to the lowest index).
    Greedy,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub episodes: usize,
    pub mean_score: f64,
    pub std_dev: f64,
    pub median: f64,
    /// Mean score divided by the aircraft count: the fraction of traffic
    /// that exits conflict-free.
    pub resolution_rate: f64,
    pub mean_conflicts: f64,
    pub scores: Vec<usize>,
}

/// Run `episodes` evaluation episodes with no learning and report score
/// statistics.
pub fn evaluate(
    env: &mut Environment,
    params: &NetworkParams,
    episodes: usize,
    selection: ActionSelection,
    base_seed: u64,
) -> Result<EvalReport, TrainError> {
    if episodes == 0 {
        return Err(TrainError::NoEpisodes);
    }
    let max_aircraft = env.config().max_aircraft;
    let mut scores = Vec::with_capacity(episodes);
    let mut conflict_sum = 0usize;
    for i in 0..episodes {
        let env_seed = mix_seed(base_seed, 2 * i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base_seed, 2 * i as u64 + 1));
        let (mut outcome, _) = env.reset(env_seed);
        while !outcome.episode_done {
            let actions: Result<std::collections::BTreeMap<AircraftId, SpeedCommand>, TrainError> =
                outcome
                    .observations
                    .iter()
                    .map(|(id, obs)| {
                        let out = params.policy_value(obs.as_slice())?;
                        let action = match selection {
                            ActionSelection::Sample => sample_action(&out.policy, &mut rng),
                            ActionSelection::Greedy => argmax(&out.policy),
                        };
                        Ok((*id, SpeedCommand::from_index(action).expect("3 actions")))
                    })
                    .collect();
            outcome = env.step(&actions?)?;
        }
        scores.push(env.episode_score()?);
        conflict_sum += env.conflict_events();
    }

    let n = scores.len() as f64;
    let mean = scores.iter().sum::<usize>() as f64 / n;
    let var = scores.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = scores.clone();
    sorted.sort_unstable();
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64 / 2.0
    };
    Ok(EvalReport {
        episodes,
        mean_score: mean,
        std_dev: var.sqrt(),
        median,
        resolution_rate: mean / max_aircraft as f64,
        mean_conflicts: conflict_sum as f64 / n,
        scores,
    })
}

fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::test_fixtures::merge_config;
    use crate::env::Environment;

    fn small_env() -> Environment {
        let mut config = merge_config();
        config.max_aircraft = 2;
        Environment::new(config).unwrap()
    }

    fn params_for(env: &Environment) -> NetworkParams {
        let mut cfg = env.config().network_config();
        cfg.hidden_width = 16;
        cfg.encoder_width = 8;
        NetworkParams::init(cfg, &mut ChaCha8Rng::seed_from_u64(2))
    }

    #[test]
    fn zero_episodes_is_a_contract_error() {
        let mut env = small_env();
        let params = params_for(&env);
        assert!(matches!(
            evaluate(&mut env, &params, 0, ActionSelection::Sample, 1),
            Err(TrainError::NoEpisodes)
        ));
    }

    #[test]
    fn evaluation_is_deterministic_under_seed() {
        let mut env = small_env();
        let params = params_for(&env);
        let a = evaluate(&mut env, &params, 4, ActionSelection::Sample, 9).unwrap();
        let b = evaluate(&mut env, &params, 4, ActionSelection::Sample, 9).unwrap();
        assert_eq!(a.scores, b.scores);
        assert_eq!(a.mean_score, b.mean_score);
        let c = evaluate(&mut env, &params, 4, ActionSelection::Greedy, 9).unwrap();
        assert_eq!(c.scores.len(), 4);
    }

    #[test]
    fn report_statistics_are_consistent() {
        let mut env = small_env();
        let params = params_for(&env);
        let report = evaluate(&mut env, &params, 5, ActionSelection::Greedy, 30).unwrap();
        assert_eq!(report.episodes, 5);
        assert!(report.mean_score >= 0.0 && report.mean_score <= 2.0);
        assert!(report.median >= 0.0 && report.median <= 2.0);
        assert!((report.resolution_rate - report.mean_score / 2.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.4, 0.4, 0.2]), 0);
        assert_eq!(argmax(&[0.1, 0.5, 0.4]), 1);
    }
}
