//! Clipped actor-critic training over the road environment, generic over
//! the spiking and dense backbones.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::energy::{EnergyLedger, NetworkKind, PassEvent, Phase};
use crate::env::{ConfigError, EnvError, IsacEnv, ScenarioConfig};
use crate::snn::{LifParams, SnnError};

use super::adam::{clip_global_norm, Adam};
use super::buffer::{RolloutBuffer, Transition};
use super::loss::{clipped_objective, normalize_advantages, value_loss};
use super::policy::{build_backbone, Backbone, PolicyHead, ValueHead};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Spiking,
    Dense,
}

impl BackendKind {
    pub fn label(&self) -> &'static str {
        match self {
            BackendKind::Spiking => "spiking",
            BackendKind::Dense => "dense",
        }
    }

    fn network_kind(&self) -> NetworkKind {
        match self {
            BackendKind::Spiking => NetworkKind::Spiking,
            BackendKind::Dense => NetworkKind::Dense,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Long-term reward discount.
    pub discount: f64,
    /// Policy update clip range.
    pub clip: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Environment steps collected per update.
    pub batch_size: usize,
    pub epochs_per_update: usize,
    pub gae_lambda: f64,
    pub entropy_coef: f64,
    /// Global gradient-norm cap per network.
    pub grad_clip: f64,
    /// Update iterations to run.
    pub iterations: usize,
    /// Hidden layer widths shared by actor and critic.
    pub hidden_dims: Vec<usize>,
    pub lif: LifParams,
    /// Initial log standard deviation of the raw action coordinates.
    pub init_log_std: f64,
    /// Multiplier on the fan-in initialization so early spiking layers
    /// actually reach the firing threshold.
    pub init_gain: f64,
    /// Fraction of the power budget spent by the decoder.
    pub power_fill: f64,
    pub normalize_advantages: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            discount: 0.99,
            clip: 0.2,
            actor_lr: 5e-5,
            critic_lr: 5e-4,
            batch_size: 512,
            epochs_per_update: 10,
            gae_lambda: 0.95,
            entropy_coef: 0.01,
            grad_clip: 0.5,
            iterations: 200,
            hidden_dims: vec![128, 128],
            lif: LifParams::default(),
            init_log_std: -0.5,
            init_gain: 3.0,
            power_fill: 1.0,
            normalize_advantages: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |what: &str| Err(TrainError::InvalidConfig(what.to_string()));
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad("discount must lie in (0, 1)");
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad("gae_lambda must lie in (0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip must be > 0");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be > 0");
        }
        if self.batch_size == 0 || self.epochs_per_update == 0 || self.iterations == 0 {
            return bad("batch_size, epochs_per_update, iterations must be >= 1");
        }
        if self.hidden_dims.iter().any(|&d| d == 0) {
            return bad("hidden_dims must be positive");
        }
        if !(self.power_fill > 0.0 && self.power_fill <= 1.0) {
            return bad("power_fill must lie in (0, 1]");
        }
        self.lif.validate().map_err(TrainError::Snn)?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scenario(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Snn(#[from] SnnError),
    #[error("training diverged at iteration {iteration}: {what} is not finite")]
    Diverged { iteration: usize, what: &'static str },
}

/// One row of the per-iteration training log.
#[derive(Debug, Clone)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub episodes_completed: usize,
    pub mean_episode_reward: f64,
    pub mean_sum_rate: f64,
    pub constraint_rate: f64,
    /// Actor hidden-layer firing rates measured during collection (empty
    /// for the dense backbone).
    pub firing_rates: Vec<f64>,
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub cumulative_energy_pj: f64,
    pub cumulative_baseline_pj: f64,
}

pub struct TrainResult {
    pub policy: PolicyHead,
    pub value: ValueHead,
    pub metrics: Vec<IterationMetrics>,
    pub ledger: EnergyLedger,
}

/// Deterministic sub-seed derivation (splitmix-style mixing).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E3779B97F4A7C15)
        .wrapping_add(index.wrapping_mul(0xD1B54A32D192ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Build a fresh, untrained policy/value pair for the scenario. This is
/// also the "random" reference policy when sampled stochastically.
pub fn init_heads(
    scenario: &ScenarioConfig,
    cfg: &TrainConfig,
    backend: BackendKind,
) -> Result<(PolicyHead, ValueHead), TrainError> {
    let k = scenario.num_vehicles;
    let mut actor_dims = vec![4 * k];
    actor_dims.extend_from_slice(&cfg.hidden_dims);
    actor_dims.push(2 * k);
    let mut critic_dims = vec![4 * k];
    critic_dims.extend_from_slice(&cfg.hidden_dims);
    critic_dims.push(1);

    let spiking = backend == BackendKind::Spiking;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0xA11C));
    let actor = build_backbone(spiking, actor_dims, cfg.lif, cfg.init_gain, &mut rng)?;
    let critic = build_backbone(spiking, critic_dims, cfg.lif, cfg.init_gain, &mut rng)?;
    Ok((
        PolicyHead::new(actor, k, cfg.init_log_std, cfg.power_fill),
        ValueHead::new(critic),
    ))
}

struct RateAverage {
    sums: Vec<f64>,
    count: usize,
}

impl RateAverage {
    fn new() -> Self {
        RateAverage { sums: Vec::new(), count: 0 }
    }

    fn add(&mut self, rates: &[f64]) {
        if self.sums.is_empty() {
            self.sums = vec![0.0; rates.len()];
        }
        for (s, r) in self.sums.iter_mut().zip(rates) {
            *s += r;
        }
        self.count += 1;
    }

    fn mean(&self) -> Vec<f64> {
        if self.count == 0 {
            self.sums.clone()
        } else {
            self.sums.iter().map(|s| s / self.count as f64).collect()
        }
    }
}

fn pass_event(
    backend: BackendKind,
    phase: Phase,
    dims: &[usize],
    lif: &LifParams,
    rates: Vec<f64>,
    passes: f64,
    with_backward: bool,
) -> PassEvent {
    let spiking_layers = dims.len().saturating_sub(2);
    let firing_rates = match backend {
        BackendKind::Spiking => {
            if rates.len() == spiking_layers {
                rates
            } else {
                vec![0.0; spiking_layers]
            }
        }
        BackendKind::Dense => Vec::new(),
    };
    PassEvent {
        phase,
        kind: backend.network_kind(),
        layer_dims: dims.to_vec(),
        steps: lif.steps,
        firing_rates,
        forward_passes: passes,
        with_backward,
    }
}

/// Energy event for `passes` forward passes through a policy's backbone.
pub fn pass_event_for_policy(
    policy: &PolicyHead,
    phase: Phase,
    rates: Vec<f64>,
    passes: f64,
) -> PassEvent {
    let dims = policy.backbone.layer_dims().to_vec();
    let spiking_layers = dims.len().saturating_sub(2);
    match &policy.backbone {
        Backbone::Spiking(net) => PassEvent {
            phase,
            kind: NetworkKind::Spiking,
            steps: net.lif().steps,
            firing_rates: if rates.len() == spiking_layers {
                rates
            } else {
                vec![0.0; spiking_layers]
            },
            layer_dims: dims,
            forward_passes: passes,
            with_backward: false,
        },
        Backbone::Dense(_) => PassEvent {
            phase,
            kind: NetworkKind::Dense,
            steps: 1,
            firing_rates: Vec::new(),
            layer_dims: dims,
            forward_passes: passes,
            with_backward: false,
        },
    }
}

/// Run the full training loop: collect a buffer of on-policy steps, estimate
/// advantages, then take several clipped-objective epochs on the actor and
/// mean-squared-error epochs on the critic. Fully deterministic per
/// (scenario, config, backend).
pub fn train(
    scenario: &ScenarioConfig,
    cfg: &TrainConfig,
    backend: BackendKind,
) -> Result<TrainResult, TrainError> {
    scenario.validate()?;
    cfg.validate()?;
    let (mut policy, mut value) = init_heads(scenario, cfg, backend)?;
    let act_dim = 2 * scenario.num_vehicles;

    let mut actor_opt: Adam<ndarray::Ix2> = Adam::new(cfg.actor_lr, policy.backbone.weights());
    let mut logstd_opt: Adam<ndarray::Ix1> = Adam::new(cfg.actor_lr, &[policy.log_std.clone()]);
    let mut critic_opt: Adam<ndarray::Ix2> = Adam::new(cfg.critic_lr, value.backbone.weights());

    let mut env = IsacEnv::new(scenario.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x5EED));
    let mut episode: u64 = 0;
    let mut obs_n = env.reset(derive_seed(cfg.seed, episode)).normalized();
    let mut episode_reward = 0.0;
    let mut last_mean_episode_reward = 0.0;

    let mut buffer = RolloutBuffer::new(cfg.batch_size);
    let mut ledger = EnergyLedger::default();
    let mut metrics = Vec::with_capacity(cfg.iterations);

    let actor_dims = policy.backbone.layer_dims().to_vec();
    let critic_dims = value.backbone.layer_dims().to_vec();

    for iteration in 0..cfg.iterations {
        let mut ep_rewards: Vec<f64> = Vec::new();
        let mut sum_rate_acc = 0.0;
        let mut constraint_acc = 0usize;
        let mut actor_rates = RateAverage::new();
        let mut critic_rates = RateAverage::new();

        while !buffer.is_full() {
            let act = policy.act(&obs_n, scenario.max_power, false, &mut rng)?;
            actor_rates.add(&Backbone::firing_rates(&act.trace));
            let (v_out, v_trace) = value.backbone.forward(&obs_n)?;
            critic_rates.add(&Backbone::firing_rates(&v_trace));
            let outcome = env.step(&act.action)?;
            episode_reward += outcome.reward;
            sum_rate_acc += outcome.diagnostics.sum_rate;
            constraint_acc += outcome.diagnostics.constraints_satisfied as usize;
            buffer.push(Transition {
                obs: obs_n.clone(),
                raw_action: act.raw_action,
                log_prob: act.log_prob,
                reward: outcome.reward,
                value: v_out[0],
                done: outcome.done,
            });
            if outcome.done {
                ep_rewards.push(episode_reward);
                episode_reward = 0.0;
                episode += 1;
                obs_n = env.reset(derive_seed(cfg.seed, episode)).normalized();
            } else {
                obs_n = outcome.next_observation.normalized();
            }
        }
        let steps = buffer.len();
        ledger
            .accumulate(&pass_event(
                backend,
                Phase::Training,
                &actor_dims,
                &cfg.lif,
                actor_rates.mean(),
                steps as f64,
                false,
            ))
            .expect("consistent dims");
        ledger
            .accumulate(&pass_event(
                backend,
                Phase::Training,
                &critic_dims,
                &cfg.lif,
                critic_rates.mean(),
                steps as f64,
                false,
            ))
            .expect("consistent dims");

        let bootstrap = value.value(&obs_n)?;
        let (mut advantages, returns) =
            buffer.compute_advantages(bootstrap, cfg.discount, cfg.gae_lambda);
        if cfg.normalize_advantages {
            normalize_advantages(&mut advantages);
        }

        let obs_mat = Array2::from_shape_vec(
            (steps, obs_n.len()),
            buffer
                .transitions()
                .iter()
                .flat_map(|t| t.obs.iter().copied())
                .collect(),
        )
        .expect("obs dims consistent");
        let raw_mat: Vec<&[f64]> = buffer
            .transitions()
            .iter()
            .map(|t| t.raw_action.as_slice())
            .collect();
        let lp_old: Vec<f64> = buffer.transitions().iter().map(|t| t.log_prob).collect();

        let mut actor_loss = 0.0;
        let mut critic_loss = 0.0;
        for _ in 0..cfg.epochs_per_update {
            // actor epoch
            let (means, trace) = policy.backbone.forward_batch(&obs_mat)?;
            let stds = policy.stds();
            let mut g_mean = Array2::<f64>::zeros((steps, act_dim));
            let mut g_logstd = vec![0.0; act_dim];
            let mut obj_sum = 0.0;
            for i in 0..steps {
                let mean_row = means.row(i);
                let lp_new =
                    policy.log_prob_from_mean(mean_row.as_slice().unwrap(), raw_mat[i]);
                let (obj, dobj_dlp) = clipped_objective(lp_new, lp_old[i], advantages[i], cfg.clip);
                obj_sum += obj;
                if dobj_dlp != 0.0 {
                    for j in 0..act_dim {
                        let sigma = stds[j];
                        let diff = raw_mat[i][j] - mean_row[j];
                        // loss is the negative mean objective
                        g_mean[[i, j]] -= dobj_dlp * diff / (sigma * sigma) / steps as f64;
                        g_logstd[j] -=
                            dobj_dlp * (diff * diff / (sigma * sigma) - 1.0) / steps as f64;
                    }
                }
            }
            let entropy = policy.entropy();
            actor_loss = -obj_sum / steps as f64 - cfg.entropy_coef * entropy;
            if !actor_loss.is_finite() {
                return Err(TrainError::Diverged { iteration, what: "actor loss" });
            }
            for g in g_logstd.iter_mut() {
                *g -= cfg.entropy_coef; // d entropy / d log_std = 1 per coordinate
            }
            let mut w_grads = policy.backbone.backward_batch(&trace, &g_mean)?;
            clip_global_norm(&mut w_grads, &mut g_logstd, cfg.grad_clip);
            actor_opt.step(policy.backbone.weights_mut(), &w_grads);
            let mut log_std = [std::mem::take(&mut policy.log_std)];
            logstd_opt.step(&mut log_std, &[Array1::from(g_logstd)]);
            policy.log_std = log_std.into_iter().next().unwrap();
            ledger
                .accumulate(&pass_event(
                    backend,
                    Phase::Training,
                    &actor_dims,
                    &cfg.lif,
                    Backbone::firing_rates(&trace),
                    steps as f64,
                    true,
                ))
                .expect("consistent dims");

            // critic epoch
            let (values, v_trace) = value.value_batch(&obs_mat)?;
            critic_loss = value_loss(values.as_slice().unwrap(), &returns);
            if !critic_loss.is_finite() {
                return Err(TrainError::Diverged { iteration, what: "critic loss" });
            }
            let mut g_v = Array2::<f64>::zeros((steps, 1));
            for i in 0..steps {
                g_v[[i, 0]] = 2.0 * (values[i] - returns[i]) / steps as f64;
            }
            let mut c_grads = value.backbone.backward_batch(&v_trace, &g_v)?;
            clip_global_norm(&mut c_grads, &mut [], cfg.grad_clip);
            critic_opt.step(value.backbone.weights_mut(), &c_grads);
            ledger
                .accumulate(&pass_event(
                    backend,
                    Phase::Training,
                    &critic_dims,
                    &cfg.lif,
                    Backbone::firing_rates(&v_trace),
                    steps as f64,
                    true,
                ))
                .expect("consistent dims");
        }
        buffer.clear();

        if !ep_rewards.is_empty() {
            last_mean_episode_reward =
                ep_rewards.iter().sum::<f64>() / ep_rewards.len() as f64;
        }
        metrics.push(IterationMetrics {
            iteration,
            episodes_completed: ep_rewards.len(),
            mean_episode_reward: last_mean_episode_reward,
            mean_sum_rate: sum_rate_acc / steps as f64,
            constraint_rate: constraint_acc as f64 / steps as f64,
            firing_rates: actor_rates.mean(),
            actor_loss,
            critic_loss,
            cumulative_energy_pj: ledger.phase_energy(Phase::Training),
            cumulative_baseline_pj: ledger.phase_baseline_equiv(Phase::Training),
        });
    }

    Ok(TrainResult {
        policy,
        value,
        metrics,
        ledger,
    })
}
