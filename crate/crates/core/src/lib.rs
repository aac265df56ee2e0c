//! Multi-agent speed-advisory training for en-route sector traffic.
//!
//! The crate simulates aircraft flying fixed routes through a planar sector
//! with crossings and merge points, and trains a single shared actor-critic
//! network (written from scratch, with exact backprop and Adam) so that each
//! aircraft, acting independently on its own local observation, learns to
//! keep the fleet outside the separation minimum.
//!
//! Module map:
//! - [`geometry`]: routes, crossings, merges, distance queries
//! - [`dynamics`]: speed commands and along-route kinematics
//! - [`env`]: the episodic multi-agent environment
//! - [`nn`]: the shared actor-critic MLP and its checkpoints
//! - [`rl`]: returns, losses, rollout collection, updates, evaluation
//! - [`scenario`]: TOML scenario files

pub mod dynamics;
pub mod env;
pub mod geometry;
pub mod nn;
pub mod rl;
pub mod scenario;
pub mod seeds;

pub use dynamics::{AircraftId, AircraftState, SpeedCommand, SpeedEnvelope};
pub use env::{ArrivalProcess, Environment, ObservationVector, ScenarioConfig, StepOutcome};
pub use geometry::{Point, Route, RouteId, SectorLayout};
pub use nn::{NetworkConfig, NetworkParams};
pub use rl::{EpisodeMetrics, EvalReport, LossVariant, TrainerConfig};
pub use scenario::{load_scenario, LoadedScenario};
