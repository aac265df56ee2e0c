//! Return computation and the actor/critic loss functions, in descent form:
//! minimizing each loss ascends the corresponding objective.

use crate::nn::{ForwardOutput, HeadGrads};

use super::{LossVariant, TrainError, TrainerConfig};

/// n-step discounted returns, computed backward from the bootstrap value
/// (zero for terminated agents).
pub fn discounted_returns(rewards: &[f64], bootstrap_value: f64, gamma: f64) -> Vec<f64> {
    let mut returns = vec![0.0; rewards.len()];
    let mut acc = bootstrap_value;
    for (i, &r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        returns[i] = acc;
    }
    returns
}

/// Elementwise advantage: return minus the critic's estimate.
pub fn advantage(returns: &[f64], values: &[f64]) -> Result<Vec<f64>, TrainError> {
    if returns.len() != values.len() {
        return Err(TrainError::LengthMismatch { returns: returns.len(), values: values.len() });
    }
    Ok(returns.iter().zip(values).map(|(r, v)| r - v).collect())
}

/// Policy-gradient actor loss with entropy regularization (descent form).
pub fn actor_loss_a2c(log_prob: f64, advantage: f64, entropy: f64, beta_entropy: f64) -> f64 {
    -(log_prob * advantage) - beta_entropy * entropy
}

/// Clipped-surrogate actor loss (descent form). The entropy term is added
/// separately by the caller, with the same coefficient as the plain loss.
pub fn actor_loss_ppo(log_prob_new: f64, log_prob_old: f64, advantage: f64, epsilon: f64) -> f64 {
    let ratio = (log_prob_new - log_prob_old).exp();
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    -f64::min(ratio * advantage, clipped * advantage)
}

/// Mean squared error between returns and value estimates.
pub fn critic_loss(returns: &[f64], values: &[f64]) -> Result<f64, TrainError> {
    if returns.len() != values.len() {
        return Err(TrainError::LengthMismatch { returns: returns.len(), values: values.len() });
    }
    if returns.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = returns.iter().zip(values).map(|(r, v)| (r - v) * (r - v)).sum();
    Ok(sum / returns.len() as f64)
}

/// Gradients of the combined per-sample descent loss
/// `actor + w_v (R - V)^2 - c_H H(pi)` at the two network heads, with the
/// policy side taken with respect to the pre-softmax logits.
pub fn head_gradients(
    output: &ForwardOutput,
    action: usize,
    log_prob_old: f64,
    advantage: f64,
    ret: f64,
    config: &TrainerConfig,
) -> HeadGrads {
    let probs = &output.policy;
    let n = probs.len();
    let mut dlogits = vec![0.0; n];

    // Actor term. d log pi(a)/d z_j = delta_aj - pi_j, so the descent-form
    // gradient of -log pi(a) * A is A * (pi_j - delta_aj); the clipped
    // surrogate scales it by the ratio while unclipped and vanishes in the
    // clipped (flat) region.
    match config.loss_variant {
        LossVariant::A2c => {
            for (j, d) in dlogits.iter_mut().enumerate() {
                let indicator = if j == action { 1.0 } else { 0.0 };
                *d += advantage * (probs[j] - indicator);
            }
        }
        LossVariant::Ppo => {
            let ratio = (output.log_policy[action] - log_prob_old).exp();
            let clipped = ratio.clamp(1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
            let surr_plain = ratio * advantage;
            let surr_clipped = clipped * advantage;
            if surr_plain <= surr_clipped {
                for (j, d) in dlogits.iter_mut().enumerate() {
                    let indicator = if j == action { 1.0 } else { 0.0 };
                    *d += advantage * ratio * (probs[j] - indicator);
                }
            }
        }
    }

    // Entropy bonus: descent term is -c_H * H, whose logit gradient is
    // c_H * pi_j (log pi_j + H).
    if config.entropy_coef != 0.0 {
        let entropy = output.entropy();
        for (j, d) in dlogits.iter_mut().enumerate() {
            *d += config.entropy_coef * probs[j] * (output.log_policy[j] + entropy);
        }
    }

    // Critic term: w_v (R - V)^2.
    let dvalue = -2.0 * config.value_loss_weight * (ret - output.value);

    HeadGrads { dlogits, dvalue }
}
