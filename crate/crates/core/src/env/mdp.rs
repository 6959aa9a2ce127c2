//! Slot-by-slot decision process around the scenario: reset, step, reward.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ConfigError, ScenarioConfig};
use super::kinematics::{estimate_state, initial_states, kinematics_step, simulate_measurement};
use super::signal::{
    action_beamformers, crlb_angle_with, measurement_noise_vars_with, reward, slot_diagnostics,
};
use super::state::{clamp_angle, BeamAction, EnvError, Observation, StepOutcome};
use super::state::VehicleState;

/// Variance ceiling for the simulated angle estimate: (5 deg)^2. Keeps the
/// observation usable even when beams are badly misaligned.
pub const ANGLE_NOISE_VAR_CAP: f64 = 7.615435494667714e-3; // (5 * pi / 180)^2

/// Power-budget slack tolerated before an action is rejected (W).
pub const POWER_TOLERANCE: f64 = 1e-9;

/// Seedable single-owner environment instance. All randomness flows through
/// the internal generator, so a (seed, action sequence) pair fully
/// determines the trajectory.
#[derive(Debug, Clone)]
pub struct IsacEnv {
    cfg: ScenarioConfig,
    states: Vec<VehicleState>,
    prev_speed_est: Vec<f64>,
    slot: usize,
    rng: ChaCha8Rng,
    started: bool,
}

impl IsacEnv {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let k = cfg.num_vehicles;
        Ok(IsacEnv {
            cfg,
            states: Vec::new(),
            prev_speed_est: vec![0.0; k],
            slot: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
            started: false,
        })
    }

    pub fn cfg(&self) -> &ScenarioConfig {
        &self.cfg
    }

    /// Ground-truth vehicle states (for logging and reference policies).
    pub fn states(&self) -> &[VehicleState] {
        &self.states
    }

    /// Slot index of the next step, 0-based.
    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn observation_len(&self) -> usize {
        4 * self.cfg.num_vehicles
    }

    /// Start an episode: place vehicles, draw speeds, and run one sensing
    /// pass with the broadside action to form the first observation.
    pub fn reset(&mut self, seed: u64) -> Observation {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.states = initial_states(&self.cfg, &mut self.rng);
        self.prev_speed_est = vec![0.0; self.cfg.num_vehicles];
        self.slot = 0;
        self.started = true;
        let probe = BeamAction::broadside(&self.cfg);
        let beams = action_beamformers(&self.cfg, &probe);
        let comm: Vec<f64> = (0..self.cfg.num_vehicles)
            .map(|k| super::signal::comm_sinr_with(&self.cfg, &self.states, &probe, &beams, k))
            .collect();
        self.sense(&probe, &comm)
    }

    /// Advance one slot: evaluate the action on the current state, move the
    /// vehicles, and sense them again to produce the next observation.
    pub fn step(&mut self, action: &BeamAction) -> Result<StepOutcome, EnvError> {
        if !self.started || self.slot >= self.cfg.horizon {
            return Err(EnvError::EpisodeOver);
        }
        action.validate(&self.cfg, POWER_TOLERANCE)?;

        let diagnostics = slot_diagnostics(&self.cfg, &self.states, action);
        let reward = reward(&self.cfg, &diagnostics);

        kinematics_step(&self.cfg, &mut self.states, &mut self.rng);
        let next_observation = self.sense(action, &diagnostics.comm_sinr);

        self.slot += 1;
        Ok(StepOutcome {
            next_observation,
            reward,
            diagnostics,
            done: self.slot >= self.cfg.horizon,
        })
    }

    /// One sensing pass over the current ground truth: the angle estimate is
    /// the truth plus Gaussian noise at the (capped) CRLB, distance and
    /// speed come from inverting noisy delay/Doppler readings, and the SINR
    /// feedback is the realized value handed in by the caller.
    fn sense(&mut self, action: &BeamAction, comm_sinr: &[f64]) -> Observation {
        let k = self.cfg.num_vehicles;
        let beams = action_beamformers(&self.cfg, action);
        let mut est_angle = Vec::with_capacity(k);
        let mut est_distance = Vec::with_capacity(k);
        let mut est_speed = Vec::with_capacity(k);
        for i in 0..k {
            let var = crlb_angle_with(&self.cfg, &self.states, action, &beams, i)
                .min(ANGLE_NOISE_VAR_CAP);
            let noise = if var > 0.0 {
                use rand_distr::Distribution;
                rand_distr::Normal::new(0.0, var.sqrt())
                    .expect("finite std")
                    .sample(&mut self.rng)
            } else {
                0.0
            };
            let theta_hat = clamp_angle(self.states[i].angle + noise);

            let vars = measurement_noise_vars_with(&self.cfg, &self.states, action, &beams, i);
            let (delay, doppler) =
                simulate_measurement(&self.cfg, &self.states[i], vars, &mut self.rng);
            let (d_hat, v_hat) =
                estimate_state(&self.cfg, delay, doppler, theta_hat, self.prev_speed_est[i]);
            self.prev_speed_est[i] = v_hat;

            est_angle.push(theta_hat);
            est_distance.push(d_hat);
            est_speed.push(v_hat);
        }
        Observation {
            est_angle,
            est_distance,
            est_speed,
            est_comm_sinr: comm_sinr.to_vec(),
        }
    }
}
