//! Library surface of the `enroute` binary: command implementations plus the
//! exit-code classification (0 success, 1 config error, 2 I/O error,
//! 3 numerical failure).

pub mod args;
pub mod eval_cmd;
pub mod inspect;
pub mod manifest;
pub mod outputs;
pub mod simulate;
pub mod train;

use anyhow::Result;

use enroute_core::env::EnvError;
use enroute_core::nn::checkpoint::CheckpointError;
use enroute_core::nn::NetError;
use enroute_core::rl::TrainError;
use enroute_core::scenario::ScenarioError;

pub use args::{Cli, Command};

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Train(args) => train::cmd_train(args),
        Command::Eval(args) => eval_cmd::cmd_eval(args),
        Command::Simulate(args) => simulate::cmd_simulate(args),
        Command::Inspect(args) => inspect::cmd_inspect(args),
    }
}

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Map an error chain onto the documented exit codes.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ScenarioError>() {
            return match e {
                ScenarioError::Io { .. } => EXIT_IO,
                _ => EXIT_CONFIG,
            };
        }
        if let Some(e) = cause.downcast_ref::<CheckpointError>() {
            return match e {
                CheckpointError::Io(_) => EXIT_IO,
                CheckpointError::NonFinite(_) => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
        if let Some(e) = cause.downcast_ref::<TrainError>() {
            return match e {
                TrainError::Net(NetError::NonFiniteGradient) => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
        if let Some(e) = cause.downcast_ref::<NetError>() {
            return match e {
                NetError::NonFiniteGradient => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
        if cause.downcast_ref::<EnvError>().is_some() {
            return EXIT_CONFIG;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_CONFIG
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn exit_codes_by_error_class() {
        let not_found = anyhow::Error::new(ScenarioError::NotFound(PathBuf::from("x")));
        assert_eq!(exit_code(&not_found), EXIT_CONFIG);
        let io = anyhow::Error::new(std::io::Error::other("disk"));
        assert_eq!(exit_code(&io), EXIT_IO);
        let nan = anyhow::Error::new(NetError::NonFiniteGradient);
        assert_eq!(exit_code(&nan), EXIT_NUMERICAL);
        let nan_train = anyhow::Error::new(TrainError::Net(NetError::NonFiniteGradient));
        assert_eq!(exit_code(&nan_train), EXIT_NUMERICAL);
    }
}
