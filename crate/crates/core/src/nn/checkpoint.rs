//! Checkpoint container for network parameters and optimizer state.
//!
//! The on-disk format is a versioned JSON document holding the layer shapes,
//! every weight and bias, both Adam moment buffers, and the step counter.
//! Finite f64 values round-trip bit-exactly through this encoding.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{NetworkConfig, NetworkParams, ParamSet};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("unsupported checkpoint format version {found} (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("layer {layer}: shape {got_out}x{got_in} does not match expected {want_out}x{want_in}")]
    LayerShape { layer: String, got_out: usize, got_in: usize, want_out: usize, want_in: usize },
    #[error("checkpoint contains non-finite values in layer {0}")]
    NonFinite(String),
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    config: NetworkConfig,
    layers: ParamSet,
    adam_m: ParamSet,
    adam_v: ParamSet,
    adam_steps: u64,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

fn expected_shapes(config: &NetworkConfig) -> [(&'static str, usize, usize); 5] {
    [
        ("encoder", config.encoder_width, config.local_width),
        ("hidden1", config.hidden_width, config.concat_width()),
        ("hidden2", config.hidden_width, config.hidden_width),
        ("policy_head", config.num_actions, config.hidden_width),
        ("value_head", 1, config.hidden_width),
    ]
}

fn validate_set(set: &ParamSet, config: &NetworkConfig, what: &str) -> Result<(), CheckpointError> {
    for ((name, layer), (_, want_out, want_in)) in set.layers().iter().zip(expected_shapes(config))
    {
        if layer.out_dim != want_out || layer.in_dim != want_in {
            return Err(CheckpointError::LayerShape {
                layer: format!("{what}.{name}"),
                got_out: layer.out_dim,
                got_in: layer.in_dim,
                want_out,
                want_in,
            });
        }
        if layer.w.len() != want_out * want_in || layer.b.len() != want_out {
            return Err(CheckpointError::Corrupt(format!(
                "{what}.{name}: buffer lengths disagree with declared shape"
            )));
        }
        if layer.w.iter().chain(&layer.b).any(|v| !v.is_finite()) {
            return Err(CheckpointError::NonFinite(format!("{what}.{name}")));
        }
    }
    Ok(())
}

pub fn save(params: &NetworkParams, path: &Path) -> Result<(), CheckpointError> {
    validate_set(&params.layers, &params.config, "layers")?;
    validate_set(&params.adam_m, &params.config, "adam_m")?;
    validate_set(&params.adam_v, &params.config, "adam_v")?;
    let file = CheckpointFile {
        format_version: CHECKPOINT_FORMAT_VERSION,
        config: params.config,
        layers: params.layers.clone(),
        adam_m: params.adam_m.clone(),
        adam_v: params.adam_v.clone(),
        adam_steps: params.adam_steps,
    };
    let json = serde_json::to_string(&file)
        .map_err(|e| CheckpointError::Corrupt(format!("encode failed: {e}")))?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, json)?;
    Ok(())
}

/// Load a checkpoint, validating internal consistency. Nothing is returned
/// unless the whole file parses and validates; there is no partial load.
pub fn load(path: &Path) -> Result<NetworkParams, CheckpointError> {
    let bytes = fs::read(path)?;
    let probe: VersionProbe = serde_json::from_slice(&bytes)
        .map_err(|e| CheckpointError::Corrupt(format!("{}: {e}", path.display())))?;
    if probe.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(CheckpointError::VersionMismatch {
            found: probe.format_version,
            supported: CHECKPOINT_FORMAT_VERSION,
        });
    }
    let file: CheckpointFile = serde_json::from_slice(&bytes)
        .map_err(|e| CheckpointError::Corrupt(format!("{}: {e}", path.display())))?;
    let params = NetworkParams {
        config: file.config,
        layers: file.layers,
        adam_m: file.adam_m,
        adam_v: file.adam_v,
        adam_steps: file.adam_steps,
    };
    validate_set(&params.layers, &params.config, "layers")?;
    validate_set(&params.adam_m, &params.config, "adam_m")?;
    validate_set(&params.adam_v, &params.config, "adam_v")?;
    Ok(params)
}

/// Load and additionally require the checkpoint to match an expected
/// network configuration (e.g. dimensions derived from a scenario).
pub fn load_for_config(
    path: &Path,
    expected: &NetworkConfig,
) -> Result<NetworkParams, CheckpointError> {
    let params = load(path)?;
    if params.config != *expected {
        // Report the first differing layer shape for a concrete message.
        for ((name, got_out, got_in), (_, want_out, want_in)) in
            expected_shapes(&params.config).iter().zip(expected_shapes(expected))
        {
            if got_out != &want_out || got_in != &want_in {
                return Err(CheckpointError::LayerShape {
                    layer: (*name).to_string(),
                    got_out: *got_out,
                    got_in: *got_in,
                    want_out,
                    want_in,
                });
            }
        }
        return Err(CheckpointError::Corrupt(
            "checkpoint configuration does not match the scenario".to_string(),
        ));
    }
    Ok(params)
}
