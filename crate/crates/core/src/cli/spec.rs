//! Experiment configuration file: TOML sections mirroring the scenario and
//! training parameters, with powers written in dBm and converted exactly
//! once at load time.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{dbm_to_watts, watts_to_dbm, ScenarioConfig};
use crate::rl::TrainConfig;
use crate::snn::LifParams;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Scenario(#[from] crate::env::ConfigError),
    #[error("field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Which network drives the policy, or no network at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Spiking,
    Dense,
    /// Untrained head sampled stochastically; evaluation-only reference.
    Random,
}

impl Backend {
    pub fn label(&self) -> &'static str {
        match self {
            Backend::Spiking => "spiking",
            Backend::Dense => "dense",
            Backend::Random => "random",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spiking" => Ok(Backend::Spiking),
            "dense" => Ok(Backend::Dense),
            "random" => Ok(Backend::Random),
            other => Err(format!("unknown backend `{other}` (spiking|dense|random)")),
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioToml {
    pub num_vehicles: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    pub carrier_freq_hz: f64,
    pub slot_duration_s: f64,
    pub horizon: usize,
    pub p_max_dbm: f64,
    pub noise_sense_dbm: f64,
    pub noise_comm_dbm: f64,
    /// Complex fading factor as [re, im].
    pub kappa: [f64; 2],
    pub matched_filter_gain: f64,
    /// Reference path-loss gain; free-space at the reference distance when
    /// omitted.
    pub ref_pathloss: Option<f64>,
    pub ref_distance_m: f64,
    pub pathloss_exponent: f64,
    pub meas_coeff_delay_s: f64,
    pub meas_coeff_doppler_hz: f64,
    pub evol_noise_angle_deg: f64,
    pub evol_noise_distance_m: f64,
    pub evol_noise_speed_mps: f64,
    pub crlb_threshold_angle_deg: f64,
    pub crlb_threshold_distance_m2: f64,
    pub initial_positions: Vec<[f64; 2]>,
    pub speed_range_mps: [f64; 2],
    pub rng_seed: u64,
    pub reward_weight_angle: f64,
    pub reward_weight_distance: f64,
    pub standard_jain: bool,
    pub crlb_noise_floor_w: Option<f64>,
}

impl Default for ScenarioToml {
    fn default() -> Self {
        let cfg = ScenarioConfig::default();
        ScenarioToml {
            num_vehicles: cfg.num_vehicles,
            n_tx: cfg.n_tx,
            n_rx: cfg.n_rx,
            carrier_freq_hz: cfg.carrier_freq,
            slot_duration_s: cfg.slot_duration,
            horizon: cfg.horizon,
            p_max_dbm: watts_to_dbm(cfg.max_power),
            noise_sense_dbm: watts_to_dbm(cfg.noise_power_sense),
            noise_comm_dbm: watts_to_dbm(cfg.noise_power_comm),
            kappa: [cfg.fading_factor.re, cfg.fading_factor.im],
            matched_filter_gain: cfg.matched_filter_gain,
            ref_pathloss: None,
            ref_distance_m: cfg.ref_distance,
            pathloss_exponent: cfg.pathloss_exponent,
            meas_coeff_delay_s: cfg.meas_coeff_delay,
            meas_coeff_doppler_hz: cfg.meas_coeff_doppler,
            evol_noise_angle_deg: cfg.evol_noise_angle.to_degrees(),
            evol_noise_distance_m: cfg.evol_noise_distance,
            evol_noise_speed_mps: cfg.evol_noise_speed,
            crlb_threshold_angle_deg: cfg.crlb_threshold_angle.sqrt().to_degrees(),
            crlb_threshold_distance_m2: cfg.crlb_threshold_distance,
            initial_positions: cfg.initial_positions.iter().map(|&(x, y)| [x, y]).collect(),
            speed_range_mps: [cfg.speed_range.0, cfg.speed_range.1],
            rng_seed: cfg.rng_seed,
            reward_weight_angle: cfg.reward_weight_angle,
            reward_weight_distance: cfg.reward_weight_distance,
            standard_jain: cfg.standard_jain,
            crlb_noise_floor_w: cfg.crlb_noise_floor,
        }
    }
}

impl ScenarioToml {
    pub fn to_config(&self) -> Result<ScenarioConfig, SpecError> {
        let cfg = ScenarioConfig {
            num_vehicles: self.num_vehicles,
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            carrier_freq: self.carrier_freq_hz,
            slot_duration: self.slot_duration_s,
            horizon: self.horizon,
            max_power: dbm_to_watts(self.p_max_dbm),
            noise_power_sense: dbm_to_watts(self.noise_sense_dbm),
            noise_power_comm: dbm_to_watts(self.noise_comm_dbm),
            fading_factor: Complex64::new(self.kappa[0], self.kappa[1]),
            matched_filter_gain: self.matched_filter_gain,
            ref_pathloss: self.ref_pathloss.unwrap_or_else(|| {
                ScenarioConfig::free_space_ref_gain(self.carrier_freq_hz, self.ref_distance_m)
            }),
            ref_distance: self.ref_distance_m,
            pathloss_exponent: self.pathloss_exponent,
            meas_coeff_delay: self.meas_coeff_delay_s,
            meas_coeff_doppler: self.meas_coeff_doppler_hz,
            evol_noise_angle: self.evol_noise_angle_deg.to_radians(),
            evol_noise_distance: self.evol_noise_distance_m,
            evol_noise_speed: self.evol_noise_speed_mps,
            crlb_threshold_angle: self.crlb_threshold_angle_deg.to_radians().powi(2),
            crlb_threshold_distance: self.crlb_threshold_distance_m2,
            initial_positions: self.initial_positions.iter().map(|p| (p[0], p[1])).collect(),
            speed_range: (self.speed_range_mps[0], self.speed_range_mps[1]),
            rng_seed: self.rng_seed,
            reward_weight_angle: self.reward_weight_angle,
            reward_weight_distance: self.reward_weight_distance,
            standard_jain: self.standard_jain,
            crlb_noise_floor: self.crlb_noise_floor_w,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainToml {
    pub discount: f64,
    pub clip: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub epochs_per_update: usize,
    pub gae_lambda: f64,
    pub entropy_coef: f64,
    pub grad_clip: f64,
    pub iterations: usize,
    pub hidden_dims: Vec<usize>,
    pub lif_leak: f64,
    pub lif_threshold: f64,
    pub lif_reset: f64,
    pub lif_steps: usize,
    pub surrogate_sharpness: f64,
    pub init_log_std: f64,
    pub init_gain: f64,
    pub power_fill: f64,
    #[serde(default = "default_true")]
    pub normalize_advantages: bool,
}

impl Default for TrainToml {
    fn default() -> Self {
        let cfg = TrainConfig::default();
        TrainToml {
            discount: cfg.discount,
            clip: cfg.clip,
            actor_lr: cfg.actor_lr,
            critic_lr: cfg.critic_lr,
            batch_size: cfg.batch_size,
            epochs_per_update: cfg.epochs_per_update,
            gae_lambda: cfg.gae_lambda,
            entropy_coef: cfg.entropy_coef,
            grad_clip: cfg.grad_clip,
            iterations: cfg.iterations,
            hidden_dims: cfg.hidden_dims,
            lif_leak: cfg.lif.leak,
            lif_threshold: cfg.lif.threshold,
            lif_reset: cfg.lif.reset,
            lif_steps: cfg.lif.steps,
            surrogate_sharpness: cfg.lif.surrogate_sharpness,
            init_log_std: cfg.init_log_std,
            init_gain: cfg.init_gain,
            power_fill: cfg.power_fill,
            normalize_advantages: cfg.normalize_advantages,
        }
    }
}

impl TrainToml {
    pub fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            discount: self.discount,
            clip: self.clip,
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            batch_size: self.batch_size,
            epochs_per_update: self.epochs_per_update,
            gae_lambda: self.gae_lambda,
            entropy_coef: self.entropy_coef,
            grad_clip: self.grad_clip,
            iterations: self.iterations,
            hidden_dims: self.hidden_dims.clone(),
            lif: LifParams {
                leak: self.lif_leak,
                threshold: self.lif_threshold,
                reset: self.lif_reset,
                steps: self.lif_steps,
                surrogate_sharpness: self.surrogate_sharpness,
            },
            init_log_std: self.init_log_std,
            init_gain: self.init_gain,
            power_fill: self.power_fill,
            normalize_advantages: self.normalize_advantages,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentToml {
    pub backend: Backend,
    pub seeds: Vec<u64>,
    /// Optional transmit-power sweep grid in dBm.
    pub sweep_dbm: Option<Vec<f64>>,
    pub eval_episodes: usize,
}

impl Default for ExperimentToml {
    fn default() -> Self {
        ExperimentToml {
            backend: Backend::Spiking,
            seeds: vec![0],
            sweep_dbm: None,
            eval_episodes: 10,
        }
    }
}

/// Full experiment description as loaded from one TOML file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioToml,
    pub train: TrainToml,
    pub experiment: ExperimentToml,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let spec: ExperimentSpec = toml::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        self.scenario.to_config()?;
        if self.experiment.seeds.is_empty() {
            return Err(SpecError::Invalid {
                field: "experiment.seeds",
                reason: "need at least one seed".into(),
            });
        }
        if self.experiment.eval_episodes == 0 {
            return Err(SpecError::Invalid {
                field: "experiment.eval_episodes",
                reason: "must be >= 1".into(),
            });
        }
        if let Some(grid) = &self.experiment.sweep_dbm {
            if grid.is_empty() {
                return Err(SpecError::Invalid {
                    field: "experiment.sweep_dbm",
                    reason: "sweep grid must not be empty".into(),
                });
            }
            if grid.iter().any(|d| !d.is_finite()) {
                return Err(SpecError::Invalid {
                    field: "experiment.sweep_dbm",
                    reason: "sweep powers must be finite dBm values".into(),
                });
            }
        }
        Ok(())
    }

    /// Fully resolved spec as TOML, for provenance headers.
    pub fn resolved_toml(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_else(|_| "# unserializable".into())
    }
}
