//! Per-aircraft kinematics: discrete speed commands and along-route motion
//! integration between decision epochs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::RouteId;

/// Kts-to-nmi-per-second conversion (1 kt = 1 nmi/h).
const KTS_TO_NMI_PER_S: f64 = 1.0 / 3600.0;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("aircraft {0} is not active")]
    Inactive(AircraftId),
    #[error("invalid speed envelope: {0}")]
    InvalidEnvelope(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AircraftId(pub usize);

impl fmt::Display for AircraftId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AC{:03}", self.0)
    }
}

/// The three speed advisories an agent can issue: decelerate to the minimum
/// cruise speed, hold the current speed, or accelerate to the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpeedCommand {
    Decelerate,
    Hold,
    Accelerate,
}

impl SpeedCommand {
    pub const COUNT: usize = 3;
    pub const ALL: [SpeedCommand; 3] =
        [SpeedCommand::Decelerate, SpeedCommand::Hold, SpeedCommand::Accelerate];

    /// Action index used by the policy head: 0 = decelerate, 1 = hold,
    /// 2 = accelerate (the action-set order `[v_min, v_prev, v_max]`).
    pub fn index(self) -> usize {
        match self {
            SpeedCommand::Decelerate => 0,
            SpeedCommand::Hold => 1,
            SpeedCommand::Accelerate => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<SpeedCommand> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SpeedCommand::Decelerate => "decel",
            SpeedCommand::Hold => "hold",
            SpeedCommand::Accelerate => "accel",
        }
    }
}

/// Allowed cruise-speed band and the (symmetric) acceleration magnitude used
/// to move between commanded speeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEnvelope {
    pub v_min_kts: f64,
    pub v_max_kts: f64,
    pub accel_kts_per_s: f64,
}

impl Default for SpeedEnvelope {
    fn default() -> Self {
        // Representative B744 cruise ground-speed band.
        SpeedEnvelope { v_min_kts: 430.0, v_max_kts: 520.0, accel_kts_per_s: 1.0 }
    }
}

impl SpeedEnvelope {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.v_min_kts > 0.0 && self.v_min_kts < self.v_max_kts) {
            return Err(DynamicsError::InvalidEnvelope(format!(
                "need 0 < v_min < v_max, got [{}, {}]",
                self.v_min_kts, self.v_max_kts
            )));
        }
        if self.accel_kts_per_s <= 0.0 {
            return Err(DynamicsError::InvalidEnvelope(format!(
                "acceleration must be positive, got {}",
                self.accel_kts_per_s
            )));
        }
        Ok(())
    }

    pub fn clamp_speed(&self, v: f64) -> f64 {
        v.clamp(self.v_min_kts, self.v_max_kts)
    }
}

/// Kinematic state of one aircraft on its fixed route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    pub id: AircraftId,
    pub route: RouteId,
    /// Along-route distance from the route start, nmi.
    pub arc_pos: f64,
    /// Current speed, kts.
    pub speed: f64,
    /// Realized mean speed-change rate over the last integration interval,
    /// kts/s (signed).
    pub acceleration: f64,
    /// Speed the aircraft is currently moving toward, kts.
    pub target_speed: f64,
    /// Simulation time the aircraft entered the sector, s.
    pub entered_at: f64,
    pub active: bool,
    /// Set once the aircraft has ever violated the separation minimum.
    pub ever_in_conflict: bool,
}

impl AircraftState {
    pub fn enter(id: AircraftId, route: RouteId, speed: f64, at_time: f64) -> Self {
        AircraftState {
            id,
            route,
            arc_pos: 0.0,
            speed,
            acceleration: 0.0,
            target_speed: speed,
            entered_at: at_time,
            active: true,
            ever_in_conflict: false,
        }
    }

    /// Apply a speed advisory: retarget to `v_min`, the instantaneous current
    /// speed, or `v_max`. No positional change.
    pub fn command(
        &mut self,
        action: SpeedCommand,
        envelope: &SpeedEnvelope,
    ) -> Result<(), DynamicsError> {
        if !self.active {
            return Err(DynamicsError::Inactive(self.id));
        }
        self.target_speed = match action {
            SpeedCommand::Decelerate => envelope.v_min_kts,
            // Holding during an ongoing speed change freezes the transient.
            SpeedCommand::Hold => self.speed,
            SpeedCommand::Accelerate => envelope.v_max_kts,
        };
        Ok(())
    }

    /// Advance the aircraft by `dt` seconds in sub-steps of `sub_step`
    /// seconds. Within each sub-step the speed ramps toward the target at
    /// the envelope's acceleration and the arc position advances by the
    /// exact integral of the piecewise-linear speed profile.
    pub fn integrate(&mut self, dt: f64, sub_step: f64, envelope: &SpeedEnvelope) {
        debug_assert!(dt > 0.0 && sub_step > 0.0);
        let start_speed = self.speed;
        let steps = (dt / sub_step).round().max(1.0) as usize;
        let h = dt / steps as f64;
        for _ in 0..steps {
            self.arc_pos += self.advance_one(h, envelope);
        }
        self.acceleration = (self.speed - start_speed) / dt;
    }

    /// One sub-step: ramp toward the target for `tau` seconds, then hold.
    /// Returns the arc advance in nmi.
    fn advance_one(&mut self, h: f64, envelope: &SpeedEnvelope) -> f64 {
        let v0 = self.speed;
        let dv = self.target_speed - v0;
        let tau = (dv.abs() / envelope.accel_kts_per_s).min(h);
        let v1 = if dv >= 0.0 {
            (v0 + envelope.accel_kts_per_s * tau).min(self.target_speed)
        } else {
            (v0 - envelope.accel_kts_per_s * tau).max(self.target_speed)
        };
        let v1 = envelope.clamp_speed(v1);
        self.speed = v1;
        ((v0 + v1) * 0.5 * tau + v1 * (h - tau)) * KTS_TO_NMI_PER_S
    }
}
