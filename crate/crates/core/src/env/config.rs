//! Scenario configuration for the roadside-unit simulation.

use num_complex::Complex64;
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Convert a dBm figure to linear watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Convert linear watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

impl ConfigError {
    fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidField {
            field,
            reason: reason.into(),
        }
    }
}

/// Full description of one simulated road scenario.
///
/// All powers are stored linearly in watts; the file loader converts from
/// dBm exactly once. Angles are radians, distances meters, speeds m/s.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of single-antenna vehicles K.
    pub num_vehicles: usize,
    /// Transmit antennas at the roadside unit.
    pub n_tx: usize,
    /// Receive antennas at the roadside unit.
    pub n_rx: usize,
    /// Carrier frequency (Hz).
    pub carrier_freq: f64,
    /// Slot duration ΔT (s).
    pub slot_duration: f64,
    /// Slots per episode.
    pub horizon: usize,
    /// Total transmit power budget (W).
    pub max_power: f64,
    /// Sensing noise power σ_z² (W).
    pub noise_power_sense: f64,
    /// Communication noise power σ_c² (W).
    pub noise_power_comm: f64,
    /// Complex fading factor κ of the echo reflection.
    pub fading_factor: Complex64,
    /// Matched-filter gain ξ.
    pub matched_filter_gain: f64,
    /// Reference path-loss gain α₀ at `ref_distance` (linear power ratio).
    pub ref_pathloss: f64,
    /// Reference distance d₀ (m).
    pub ref_distance: f64,
    /// Path-loss exponent ϱ.
    pub pathloss_exponent: f64,
    /// Delay measurement coefficient α_τ (s).
    pub meas_coeff_delay: f64,
    /// Doppler measurement coefficient α_μ (Hz).
    pub meas_coeff_doppler: f64,
    /// Evolution noise on angle (rad).
    pub evol_noise_angle: f64,
    /// Evolution noise on distance (m).
    pub evol_noise_distance: f64,
    /// Evolution noise on speed (m/s).
    pub evol_noise_speed: f64,
    /// Angle-accuracy threshold ε_θ (rad²).
    pub crlb_threshold_angle: f64,
    /// Distance-accuracy threshold ε_d (m²).
    pub crlb_threshold_distance: f64,
    /// Initial vehicle positions (x, y) in meters, RSU at the origin.
    pub initial_positions: Vec<(f64, f64)>,
    /// Initial speed draw range (m/s).
    pub speed_range: (f64, f64),
    /// Default RNG seed for environment resets.
    pub rng_seed: u64,
    /// Reward weight on the mean angle CRLB penalty.
    pub reward_weight_angle: f64,
    /// Reward weight on the mean distance CRLB penalty.
    pub reward_weight_distance: f64,
    /// Use the conventional fairness index (no factor 2) instead of the
    /// doubled form.
    pub standard_jain: bool,
    /// Post-matched-filter noise variance used in the angle CRLB; falls back
    /// to `noise_power_sense` when unset.
    pub crlb_noise_floor: Option<f64>,
}

impl ScenarioConfig {
    /// Free-space power gain at the reference distance for the configured
    /// carrier, (λ / 4πd₀)².
    pub fn free_space_ref_gain(carrier_freq: f64, ref_distance: f64) -> f64 {
        let lambda = SPEED_OF_LIGHT / carrier_freq;
        let amp = lambda / (4.0 * std::f64::consts::PI * ref_distance);
        amp * amp
    }

    /// Effective σ_y² for the angle CRLB.
    pub fn crlb_noise_floor(&self) -> f64 {
        self.crlb_noise_floor.unwrap_or(self.noise_power_sense)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_vehicles == 0 {
            return Err(ConfigError::invalid("num_vehicles", "must be >= 1"));
        }
        if self.n_tx == 0 {
            return Err(ConfigError::invalid("n_tx", "must be >= 1"));
        }
        if self.n_rx == 0 {
            return Err(ConfigError::invalid("n_rx", "must be >= 1"));
        }
        if !(self.carrier_freq > 0.0) {
            return Err(ConfigError::invalid("carrier_freq", "must be > 0"));
        }
        if !(self.slot_duration > 0.0) {
            return Err(ConfigError::invalid("slot_duration", "must be > 0"));
        }
        if self.horizon == 0 {
            return Err(ConfigError::invalid("horizon", "must be >= 1"));
        }
        for (field, v) in [
            ("max_power", self.max_power),
            ("noise_power_sense", self.noise_power_sense),
            ("noise_power_comm", self.noise_power_comm),
            ("ref_pathloss", self.ref_pathloss),
            ("ref_distance", self.ref_distance),
            ("matched_filter_gain", self.matched_filter_gain),
            ("meas_coeff_delay", self.meas_coeff_delay),
            ("meas_coeff_doppler", self.meas_coeff_doppler),
            ("crlb_threshold_angle", self.crlb_threshold_angle),
            ("crlb_threshold_distance", self.crlb_threshold_distance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::invalid(field, format!("must be > 0, got {v}")));
            }
        }
        for (field, v) in [
            ("evol_noise_angle", self.evol_noise_angle),
            ("evol_noise_distance", self.evol_noise_distance),
            ("evol_noise_speed", self.evol_noise_speed),
            ("reward_weight_angle", self.reward_weight_angle),
            ("reward_weight_distance", self.reward_weight_distance),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ConfigError::invalid(field, format!("must be >= 0, got {v}")));
            }
        }
        if self.initial_positions.len() != self.num_vehicles {
            return Err(ConfigError::invalid(
                "initial_positions",
                format!(
                    "expected {} entries, got {}",
                    self.num_vehicles,
                    self.initial_positions.len()
                ),
            ));
        }
        for &(x, y) in &self.initial_positions {
            if !(x.hypot(y) > 0.0) {
                return Err(ConfigError::invalid(
                    "initial_positions",
                    "vehicles may not start at the array origin",
                ));
            }
            if !(y > 0.0) {
                return Err(ConfigError::invalid(
                    "initial_positions",
                    "lane offset y must be > 0 so angles stay in (0, pi)",
                ));
            }
        }
        if !(self.speed_range.0 >= 0.0 && self.speed_range.1 >= self.speed_range.0) {
            return Err(ConfigError::invalid("speed_range", "need 0 <= lo <= hi"));
        }
        if let Some(v) = self.crlb_noise_floor {
            if !(v > 0.0) {
                return Err(ConfigError::invalid("crlb_noise_floor", "must be > 0"));
            }
        }
        Ok(())
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let carrier_freq = 30e9;
        let ref_distance = 1.0;
        ScenarioConfig {
            num_vehicles: 3,
            n_tx: 32,
            n_rx: 32,
            carrier_freq,
            slot_duration: 0.02,
            horizon: 100,
            max_power: dbm_to_watts(40.0),
            noise_power_sense: dbm_to_watts(-80.0),
            noise_power_comm: dbm_to_watts(-80.0),
            fading_factor: Complex64::new(10.0, 10.0),
            matched_filter_gain: 10.0,
            ref_pathloss: Self::free_space_ref_gain(carrier_freq, ref_distance),
            ref_distance,
            pathloss_exponent: 2.0,
            meas_coeff_delay: 1e-9,
            meas_coeff_doppler: 2e3,
            evol_noise_angle: 0.02f64.to_radians(),
            evol_noise_distance: 0.2,
            evol_noise_speed: 0.5,
            crlb_threshold_angle: 0.5f64.to_radians().powi(2),
            crlb_threshold_distance: 1.0,
            initial_positions: vec![(-5.0, 10.0), (-15.0, 10.0), (-25.0, 10.0)],
            speed_range: (10.0, 14.0),
            rng_seed: 0,
            reward_weight_angle: 1.0,
            reward_weight_distance: 1.0,
            standard_jain: false,
            crlb_noise_floor: None,
        }
    }
}
