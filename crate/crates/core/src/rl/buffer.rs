//! On-policy rollout storage: per-agent transition sequences for one episode.

use crate::dynamics::AircraftId;
use crate::env::ObservationVector;

/// One (state, action, reward) record with the sampling-time policy and
/// value attached.
#[derive(Debug, Clone)]
pub struct Transition {
    pub observation: ObservationVector,
    pub action: usize,
    /// log pi_theta_old(a | s) at sampling time.
    pub log_prob_old: f64,
    pub reward: f64,
    /// Critic estimate V(s) at sampling time.
    pub value: f64,
    pub done: bool,
    pub agent: AircraftId,
    pub epoch: usize,
}

/// A single agent's contiguous lifetime within one episode.
#[derive(Debug, Clone)]
pub struct AgentSequence {
    pub agent: AircraftId,
    pub transitions: Vec<Transition>,
    /// Value used to bootstrap the return recursion; zero when the agent
    /// terminated inside the episode.
    pub bootstrap_value: f64,
}

impl AgentSequence {
    pub fn rewards(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.reward).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.value).collect()
    }

    /// Epoch indices run without gaps from spawn to exit.
    pub fn is_contiguous(&self) -> bool {
        self.transitions
            .windows(2)
            .all(|w| w[1].epoch == w[0].epoch + 1)
    }
}

/// All agents' sequences for one episode, ordered by agent id.
#[derive(Debug, Clone, Default)]
pub struct EpisodeBuffer {
    pub sequences: Vec<AgentSequence>,
}

impl EpisodeBuffer {
    pub fn total_transitions(&self) -> usize {
        self.sequences.iter().map(|s| s.transitions.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_transitions() == 0
    }
}
