//! Deterministic policy evaluation: per-slot curves, power sweeps, and
//! trajectory logging.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{EnergyLedger, Phase};
use crate::env::{watts_to_dbm, BeamAction, IsacEnv, Observation, ScenarioConfig};

use super::policy::{Backbone, PolicyHead};
use super::train::{derive_seed, pass_event_for_policy, TrainError};

/// How actions are produced during evaluation.
#[derive(Debug, Clone, Copy)]
pub enum EvalPolicy<'a> {
    /// Mean (deterministic) actions of a policy head.
    Deterministic(&'a PolicyHead),
    /// Sampled actions of a policy head; an untrained head sampled this way
    /// is the random reference policy.
    Stochastic(&'a PolicyHead),
    /// Beams pointed at the observed angles with an equal power split.
    Aligned,
}

impl EvalPolicy<'_> {
    pub fn label(&self) -> &'static str {
        match self {
            EvalPolicy::Deterministic(_) => "deterministic",
            EvalPolicy::Stochastic(_) => "stochastic",
            EvalPolicy::Aligned => "aligned",
        }
    }
}

/// Aggregates over `n_episodes` evaluation rollouts.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub n_episodes: usize,
    pub horizon: usize,
    pub episode_rewards: Vec<f64>,
    pub mean_episode_reward: f64,
    pub std_episode_reward: f64,
    /// Standard error of the episode-reward mean: std / sqrt(n).
    pub se_episode_reward: f64,
    /// Mean over every (episode, slot) pair.
    pub mean_sum_rate: f64,
    /// Per-slot means over episodes, length = horizon.
    pub per_slot_sum_rate: Vec<f64>,
    pub per_slot_crlb_angle: Vec<f64>,
    pub per_slot_crlb_distance: Vec<f64>,
    pub constraint_rate: f64,
    /// Inference-phase energy of the evaluated policy's forwards.
    pub energy: EnergyLedger,
}

fn aligned_action(cfg: &ScenarioConfig, obs: &Observation) -> BeamAction {
    BeamAction {
        beam_angles: obs.est_angle.clone(),
        power_alloc: vec![cfg.max_power / cfg.num_vehicles as f64; cfg.num_vehicles],
    }
}

/// Roll out `n_episodes` with per-episode derived seeds and aggregate
/// per-slot statistics.
pub fn evaluate(
    scenario: &ScenarioConfig,
    policy: EvalPolicy<'_>,
    n_episodes: usize,
    seed: u64,
) -> Result<EvalReport, TrainError> {
    scenario.validate()?;
    assert!(n_episodes >= 1, "need at least one episode");
    let horizon = scenario.horizon;
    let mut env = IsacEnv::new(scenario.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xE7A1));

    let mut episode_rewards = Vec::with_capacity(n_episodes);
    let mut slot_rate = vec![0.0; horizon];
    let mut slot_crlb_a = vec![0.0; horizon];
    let mut slot_crlb_d = vec![0.0; horizon];
    let mut constraint_hits = 0usize;
    let mut ledger = EnergyLedger::default();
    let mut rate_sums: Vec<f64> = Vec::new();
    let mut rate_count = 0usize;
    let mut forwards = 0f64;

    for ep in 0..n_episodes {
        let mut obs = env.reset(derive_seed(seed, ep as u64));
        let mut total = 0.0;
        for slot in 0..horizon {
            let action = match policy {
                EvalPolicy::Aligned => aligned_action(scenario, &obs),
                EvalPolicy::Deterministic(head) | EvalPolicy::Stochastic(head) => {
                    let deterministic = matches!(policy, EvalPolicy::Deterministic(_));
                    let out = head.act(&obs.normalized(), scenario.max_power, deterministic, &mut rng)?;
                    let rates = Backbone::firing_rates(&out.trace);
                    if rate_sums.is_empty() {
                        rate_sums = vec![0.0; rates.len()];
                    }
                    for (s, r) in rate_sums.iter_mut().zip(&rates) {
                        *s += r;
                    }
                    rate_count += 1;
                    forwards += 1.0;
                    out.action
                }
            };
            let outcome = env.step(&action)?;
            total += outcome.reward;
            slot_rate[slot] += outcome.diagnostics.sum_rate;
            let k = scenario.num_vehicles as f64;
            slot_crlb_a[slot] += outcome.diagnostics.crlb_angle.iter().sum::<f64>() / k;
            slot_crlb_d[slot] += outcome.diagnostics.crlb_distance.iter().sum::<f64>() / k;
            constraint_hits += outcome.diagnostics.constraints_satisfied as usize;
            obs = outcome.next_observation;
        }
        episode_rewards.push(total);
    }

    if let (EvalPolicy::Deterministic(head) | EvalPolicy::Stochastic(head), true) =
        (policy, forwards > 0.0)
    {
        let rates: Vec<f64> = if rate_count == 0 {
            rate_sums.clone()
        } else {
            rate_sums.iter().map(|s| s / rate_count as f64).collect()
        };
        ledger
            .accumulate(&pass_event_for_policy(head, Phase::Inference, rates, forwards))
            .expect("consistent dims");
    }

    let n = n_episodes as f64;
    for v in slot_rate.iter_mut().chain(&mut slot_crlb_a).chain(&mut slot_crlb_d) {
        *v /= n;
    }
    let mean = episode_rewards.iter().sum::<f64>() / n;
    let var = episode_rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    Ok(EvalReport {
        n_episodes,
        horizon,
        mean_episode_reward: mean,
        std_episode_reward: std,
        se_episode_reward: std / n.sqrt(),
        mean_sum_rate: slot_rate.iter().sum::<f64>() / horizon as f64,
        per_slot_sum_rate: slot_rate,
        per_slot_crlb_angle: slot_crlb_a,
        per_slot_crlb_distance: slot_crlb_d,
        constraint_rate: constraint_hits as f64 / (n_episodes * horizon) as f64,
        episode_rewards,
        energy: ledger,
    })
}

/// One point of a transmit-power sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub p_max_dbm: f64,
    pub p_max_watts: f64,
    pub mean_sum_rate: f64,
    pub mean_episode_reward: f64,
}

/// Re-run the evaluation across a grid of power budgets (dBm).
pub fn sweep_power(
    scenario: &ScenarioConfig,
    policy: EvalPolicy<'_>,
    p_max_dbm: &[f64],
    n_episodes: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>, TrainError> {
    let mut points = Vec::with_capacity(p_max_dbm.len());
    for &dbm in p_max_dbm {
        let mut cfg = scenario.clone();
        cfg.max_power = crate::env::dbm_to_watts(dbm);
        let report = evaluate(&cfg, policy, n_episodes, seed)?;
        points.push(SweepPoint {
            p_max_dbm: dbm,
            p_max_watts: cfg.max_power,
            mean_sum_rate: report.mean_sum_rate,
            mean_episode_reward: report.mean_episode_reward,
        });
    }
    Ok(points)
}

/// One per-vehicle line of a logged rollout.
#[derive(Debug, Clone)]
pub struct TrajectoryRow {
    pub slot: usize,
    pub vehicle: usize,
    pub angle: f64,
    pub distance: f64,
    pub speed: f64,
    pub est_angle: f64,
    pub est_distance: f64,
    pub est_speed: f64,
    pub comm_sinr_db: f64,
    pub sensing_sinr_db: f64,
    pub crlb_angle: f64,
    pub crlb_distance: f64,
    pub rate: f64,
    pub sum_rate: f64,
    pub fairness: f64,
    pub reward: f64,
}

fn to_db(linear: f64) -> f64 {
    if linear > 0.0 {
        10.0 * linear.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Roll one seeded episode and record the full per-slot, per-vehicle log.
pub fn rollout_trajectory(
    scenario: &ScenarioConfig,
    policy: EvalPolicy<'_>,
    seed: u64,
) -> Result<Vec<TrajectoryRow>, TrainError> {
    scenario.validate()?;
    let mut env = IsacEnv::new(scenario.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7EA2));
    let mut obs = env.reset(derive_seed(seed, 0));
    let mut rows = Vec::with_capacity(scenario.horizon * scenario.num_vehicles);
    for slot in 0..scenario.horizon {
        let action = match policy {
            EvalPolicy::Aligned => aligned_action(scenario, &obs),
            EvalPolicy::Deterministic(head) | EvalPolicy::Stochastic(head) => {
                let deterministic = matches!(policy, EvalPolicy::Deterministic(_));
                head.act(&obs.normalized(), scenario.max_power, deterministic, &mut rng)?
                    .action
            }
        };
        let truth = env.states().to_vec();
        let outcome = env.step(&action)?;
        let d = &outcome.diagnostics;
        for k in 0..scenario.num_vehicles {
            rows.push(TrajectoryRow {
                slot,
                vehicle: k,
                angle: truth[k].angle,
                distance: truth[k].distance,
                speed: truth[k].speed,
                est_angle: obs.est_angle[k],
                est_distance: obs.est_distance[k],
                est_speed: obs.est_speed[k],
                comm_sinr_db: to_db(d.comm_sinr[k]),
                sensing_sinr_db: to_db(d.sensing_sinr[k]),
                crlb_angle: d.crlb_angle[k],
                crlb_distance: d.crlb_distance[k],
                rate: d.rates[k],
                sum_rate: d.sum_rate,
                fairness: d.fairness,
                reward: outcome.reward,
            });
        }
        obs = outcome.next_observation;
    }
    Ok(rows)
}

/// Convenience: watts of the scenario budget expressed in dBm.
pub fn scenario_p_max_dbm(cfg: &ScenarioConfig) -> f64 {
    watts_to_dbm(cfg.max_power)
}
