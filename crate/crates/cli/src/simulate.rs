//! The simulate command: a single-episode rollout under a fixed or learned
//! policy, exported as a per-epoch trace CSV.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use enroute_core::env::trace::{TraceRow, TRACE_FORMAT, TRACE_HEADER};
use enroute_core::nn::checkpoint;
use enroute_core::rl::trainer::sample_action;
use enroute_core::seeds::mix_seed;
use enroute_core::{
    load_scenario, AircraftId, Environment, NetworkParams, SpeedCommand, StepOutcome,
};

use crate::args::{PolicyArg, SimulateArgs};
use crate::outputs::CsvFile;

enum Policy {
    Fixed(SpeedCommand),
    Random,
    Net { params: Box<NetworkParams>, sample: bool },
}

impl Policy {
    fn decide(
        &self,
        outcome: &StepOutcome,
        rng: &mut ChaCha8Rng,
    ) -> Result<BTreeMap<AircraftId, SpeedCommand>> {
        let mut actions = BTreeMap::new();
        for (id, obs) in &outcome.observations {
            let command = match self {
                Policy::Fixed(command) => *command,
                Policy::Random => {
                    SpeedCommand::from_index(rng.random_range(0..SpeedCommand::COUNT))
                        .expect("3 actions")
                }
                Policy::Net { params, sample } => {
                    let out = params.policy_value(obs.as_slice())?;
                    let action = if *sample {
                        sample_action(&out.policy, rng)
                    } else {
                        out.policy
                            .iter()
                            .enumerate()
                            .max_by(|a, b| a.1.total_cmp(b.1))
                            .map(|(i, _)| i)
                            .unwrap_or(1)
                    };
                    SpeedCommand::from_index(action).expect("3 actions")
                }
            };
            actions.insert(*id, command);
        }
        Ok(actions)
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let out_dir = args.output.resolve();
    let loaded = load_scenario(&args.scenario)?;
    let seed = args.seed.unwrap_or(loaded.config.rng_seed);

    let policy = match args.policy {
        PolicyArg::Hold => Policy::Fixed(SpeedCommand::Hold),
        PolicyArg::Accel => Policy::Fixed(SpeedCommand::Accelerate),
        PolicyArg::Decel => Policy::Fixed(SpeedCommand::Decelerate),
        PolicyArg::Random => Policy::Random,
        PolicyArg::Checkpoint => {
            let Some(path) = &args.checkpoint else {
                bail!("--policy checkpoint requires --checkpoint <path>");
            };
            let params = checkpoint::load_for_config(path, &loaded.config.network_config())?;
            Policy::Net { params: Box::new(params), sample: args.sample }
        }
    };

    let mut env = Environment::new(loaded.config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x51));
    let (mut outcome, _schedule) = env.reset(mix_seed(seed, 0x50));

    let mut trace = CsvFile::create(&out_dir.join("trace.csv"), TRACE_FORMAT, TRACE_HEADER)?;
    while !outcome.episode_done {
        let actions = policy.decide(&outcome, &mut rng)?;
        // Snapshot decision-time state; rewards land after the step.
        let snapshot: Vec<(AircraftId, f64, usize, f64, f64, Option<f64>)> = outcome
            .observations
            .iter()
            .map(|(id, _)| {
                let state = &env.aircraft()[id.0];
                (
                    *id,
                    env.time_s(),
                    state.route.0,
                    state.arc_pos,
                    state.speed,
                    env.min_separation(*id),
                )
            })
            .collect();
        outcome = env.step(&actions)?;
        let rewards: BTreeMap<AircraftId, f64> = outcome.rewards.iter().copied().collect();
        for (id, time_s, route, arc_pos, speed, min_sep) in snapshot {
            let row = TraceRow {
                time_s,
                aircraft: id,
                route: enroute_core::RouteId(route),
                arc_pos_nmi: arc_pos,
                speed_kts: speed,
                action: actions[&id],
                reward: rewards[&id],
                min_separation_nmi: min_sep,
            };
            trace.row(&row.to_csv())?;
        }
    }
    trace.finish()?;

    let score = env.episode_score()?;
    println!(
        "episode finished after {} epochs: score {}/{}, {} conflict event(s), trace at {}",
        env.epochs(),
        score,
        loaded.config.max_aircraft,
        env.conflict_events(),
        out_dir.join("trace.csv").display()
    );
    Ok(())
}
