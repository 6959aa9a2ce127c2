//! Vehicle state, observations, and actions exchanged with the policy.

use std::f64::consts::PI;

use thiserror::Error;

use super::config::ScenarioConfig;

/// Hard clamp keeping angles strictly inside (0, pi).
pub const ANGLE_MARGIN: f64 = 1e-3;

/// Observation normalization bounds: distances up to 60 m, speeds up to
/// 20 m/s, SINR expressed in dB and clipped to [-20, 60].
pub const OBS_DISTANCE_MAX: f64 = 60.0;
pub const OBS_SPEED_MAX: f64 = 20.0;
pub const OBS_SINR_DB_MIN: f64 = -20.0;
pub const OBS_SINR_DB_MAX: f64 = 60.0;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("angle {0} outside the open interval (0, pi)")]
    AngleOutOfRange(f64),
    #[error("steering vector needs at least one element")]
    EmptyArray,
    #[error("action has {got} beams, scenario has {expected} vehicles")]
    ActionDimension { expected: usize, got: usize },
    #[error("power allocation infeasible: {0}")]
    InfeasiblePower(String),
    #[error("episode finished; call reset before stepping again")]
    EpisodeOver,
}

/// Ground-truth kinematic state of one vehicle.
///
/// `(x, y)`, `angle`, and `distance` stay mutually consistent:
/// `distance = hypot(x, y)` and `angle = atan2(y, x)` mapped into (0, pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub angle: f64,
    pub distance: f64,
    pub speed: f64,
    pub x: f64,
    pub y: f64,
}

impl VehicleState {
    /// Build a state from Cartesian position and speed.
    pub fn from_position(x: f64, y: f64, speed: f64) -> Self {
        let distance = x.hypot(y);
        let angle = clamp_angle(y.atan2(x));
        VehicleState {
            angle,
            distance,
            speed: speed.max(0.0),
            x,
            y,
        }
    }

    /// Build a state from polar coordinates, recomputing `(x, y)`.
    pub fn from_polar(angle: f64, distance: f64, speed: f64) -> Self {
        let angle = clamp_angle(angle);
        let distance = distance.max(1e-6);
        VehicleState {
            angle,
            distance,
            speed: speed.max(0.0),
            x: distance * angle.cos(),
            y: distance * angle.sin(),
        }
    }
}

pub(crate) fn clamp_angle(theta: f64) -> f64 {
    theta.clamp(ANGLE_MARGIN, PI - ANGLE_MARGIN)
}

/// Estimated motion state and link quality the RSU sees, one block of
/// (angle, distance, speed, comm SINR) per vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub est_angle: Vec<f64>,
    pub est_distance: Vec<f64>,
    pub est_speed: Vec<f64>,
    pub est_comm_sinr: Vec<f64>,
}

impl Observation {
    pub fn num_vehicles(&self) -> usize {
        self.est_angle.len()
    }

    /// Flatten to `[theta_1, d_1, v_1, sinr_1, theta_2, ...]`, length 4K.
    pub fn to_vec(&self) -> Vec<f64> {
        let k = self.num_vehicles();
        let mut out = Vec::with_capacity(4 * k);
        for i in 0..k {
            out.push(self.est_angle[i]);
            out.push(self.est_distance[i]);
            out.push(self.est_speed[i]);
            out.push(self.est_comm_sinr[i]);
        }
        out
    }

    /// Affine map onto [-1, 1] per entry for network input, SINR in dB
    /// clipped to the configured window.
    pub fn normalized(&self) -> Vec<f64> {
        let k = self.num_vehicles();
        let mut out = Vec::with_capacity(4 * k);
        for i in 0..k {
            out.push(scale_to_unit(self.est_angle[i], 0.0, PI));
            out.push(scale_to_unit(self.est_distance[i], 0.0, OBS_DISTANCE_MAX));
            out.push(scale_to_unit(self.est_speed[i], 0.0, OBS_SPEED_MAX));
            let sinr_db = if self.est_comm_sinr[i] > 0.0 {
                10.0 * self.est_comm_sinr[i].log10()
            } else {
                OBS_SINR_DB_MIN
            };
            out.push(scale_to_unit(sinr_db, OBS_SINR_DB_MIN, OBS_SINR_DB_MAX));
        }
        out
    }
}

fn scale_to_unit(v: f64, lo: f64, hi: f64) -> f64 {
    ((v - lo) / (hi - lo) * 2.0 - 1.0).clamp(-1.0, 1.0)
}

/// One beam-steering angle and transmit power per vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamAction {
    /// Beam pointing angles, each in (0, pi) rad.
    pub beam_angles: Vec<f64>,
    /// Per-beam transmit powers (W).
    pub power_alloc: Vec<f64>,
}

impl BeamAction {
    pub fn num_beams(&self) -> usize {
        self.beam_angles.len()
    }

    /// Equal-power action pointing every beam broadside (pi/2).
    pub fn broadside(cfg: &ScenarioConfig) -> Self {
        let k = cfg.num_vehicles;
        BeamAction {
            beam_angles: vec![PI / 2.0; k],
            power_alloc: vec![cfg.max_power / k as f64; k],
        }
    }

    /// Check shape, the power budget (within `tol`), strict positivity, and
    /// beam angles in (0, pi).
    pub fn validate(&self, cfg: &ScenarioConfig, tol: f64) -> Result<(), EnvError> {
        if self.beam_angles.len() != cfg.num_vehicles || self.power_alloc.len() != cfg.num_vehicles
        {
            return Err(EnvError::ActionDimension {
                expected: cfg.num_vehicles,
                got: self.beam_angles.len(),
            });
        }
        for &theta in &self.beam_angles {
            if !(theta > 0.0 && theta < PI) || !theta.is_finite() {
                return Err(EnvError::AngleOutOfRange(theta));
            }
        }
        let total: f64 = self.power_alloc.iter().sum();
        if total > cfg.max_power + tol {
            return Err(EnvError::InfeasiblePower(format!(
                "sum {} exceeds budget {}",
                total, cfg.max_power
            )));
        }
        for &p in &self.power_alloc {
            if !(p > 0.0) || !p.is_finite() {
                return Err(EnvError::InfeasiblePower(format!("power {p} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Per-slot quantities derived from (state, action), reported alongside the
/// reward so it can be recomposed externally.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotDiagnostics {
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    pub fairness: f64,
    pub crlb_angle: Vec<f64>,
    pub crlb_distance: Vec<f64>,
    pub sensing_sinr: Vec<f64>,
    pub comm_sinr: Vec<f64>,
    pub constraints_satisfied: bool,
}

/// Result of advancing the environment by one slot.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next_observation: Observation,
    pub reward: f64,
    pub diagnostics: SlotDiagnostics,
    pub done: bool,
}
