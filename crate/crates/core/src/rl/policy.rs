//! Stochastic beamforming policy: a network backbone emits Gaussian means
//! for pre-squash coordinates, which decode into feasible beam angles and
//! power allocations by construction.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::env::BeamAction;
use crate::snn::{
    DenseActivation, DenseNetwork, DenseTrace, ForwardTrace, LifParams, SnnError, SpikingNetwork,
};

const LOG_STD_MIN: f64 = -5.0;
const LOG_STD_MAX: f64 = 1.5;
/// Raw angle coordinates are clamped here before the squash so the decoded
/// angle stays strictly inside (0, pi) in floating point.
const ANGLE_RAW_CLAMP: f64 = 16.0;
/// Power logits clamp: keeps the normalized exponential weights finite and
/// strictly positive.
const POWER_RAW_CLAMP: f64 = 40.0;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Network behind a policy or value head.
#[derive(Debug, Clone)]
pub enum Backbone {
    Spiking(SpikingNetwork),
    Dense(DenseNetwork),
}

#[derive(Debug, Clone)]
pub enum BackboneTrace {
    Spiking(ForwardTrace),
    Dense(DenseTrace),
}

impl Backbone {
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<(Array2<f64>, BackboneTrace), SnnError> {
        match self {
            Backbone::Spiking(net) => {
                let (out, trace) = net.forward_batch(x)?;
                Ok((out, BackboneTrace::Spiking(trace)))
            }
            Backbone::Dense(net) => {
                let (out, trace) = net.forward_batch(x)?;
                Ok((out, BackboneTrace::Dense(trace)))
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, BackboneTrace), SnnError> {
        let batch = Array2::from_shape_vec((1, x.len()), x.to_vec()).map_err(|_| {
            SnnError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            }
        })?;
        let (out, trace) = self.forward_batch(&batch)?;
        Ok((out.row(0).to_vec(), trace))
    }

    pub fn backward_batch(
        &self,
        trace: &BackboneTrace,
        output_grad: &Array2<f64>,
    ) -> Result<Vec<Array2<f64>>, SnnError> {
        match (self, trace) {
            (Backbone::Spiking(net), BackboneTrace::Spiking(t)) => net.backward_batch(t, output_grad),
            (Backbone::Dense(net), BackboneTrace::Dense(t)) => net.backward_batch(t, output_grad),
            _ => Err(SnnError::StaleTrace {
                net: self.layer_dims().to_vec(),
                trace: vec![],
            }),
        }
    }

    pub fn layer_dims(&self) -> &[usize] {
        match self {
            Backbone::Spiking(net) => net.layer_dims(),
            Backbone::Dense(net) => net.layer_dims(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims()[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims().last().unwrap()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        match self {
            Backbone::Spiking(net) => net.weights(),
            Backbone::Dense(net) => net.weights(),
        }
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        match self {
            Backbone::Spiking(net) => net.weights_mut(),
            Backbone::Dense(net) => net.weights_mut(),
        }
    }

    /// Measured firing rates of the trace (empty for dense backbones).
    pub fn firing_rates(trace: &BackboneTrace) -> Vec<f64> {
        match trace {
            BackboneTrace::Spiking(t) => t.firing_rates(),
            BackboneTrace::Dense(_) => Vec::new(),
        }
    }

    pub fn lif(&self) -> Option<&LifParams> {
        match self {
            Backbone::Spiking(net) => Some(net.lif()),
            Backbone::Dense(_) => None,
        }
    }

    pub fn is_spiking(&self) -> bool {
        matches!(self, Backbone::Spiking(_))
    }
}

/// Map one raw coordinate onto a beam angle in (0, pi).
pub fn squash_angle(u: f64) -> f64 {
    let u = u.clamp(-ANGLE_RAW_CLAMP, ANGLE_RAW_CLAMP);
    PI * sigmoid(u)
}

/// Inverse of [`squash_angle`] on its invertible range.
pub fn unsquash_angle(theta: f64) -> f64 {
    let s = (theta / PI).clamp(1e-12, 1.0 - 1e-12);
    (s / (1.0 - s)).ln()
}

/// `ln |d squash_angle / du|`, numerically stable for large |u|.
pub fn angle_squash_log_jacobian(u: f64) -> f64 {
    let u = u.clamp(-ANGLE_RAW_CLAMP, ANGLE_RAW_CLAMP);
    PI.ln() - softplus(u) - softplus(-u)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Decoded action plus everything the update step needs later.
#[derive(Debug, Clone)]
pub struct ActOutcome {
    pub action: BeamAction,
    pub log_prob: f64,
    pub raw_action: Vec<f64>,
    pub trace: BackboneTrace,
}

/// Actor head: backbone means plus a state-independent log-std vector over
/// the 2K raw coordinates (K angles, then K power logits).
#[derive(Debug, Clone)]
pub struct PolicyHead {
    pub backbone: Backbone,
    pub log_std: Array1<f64>,
    num_vehicles: usize,
    /// Fraction of the power budget the normalized exponential spends.
    pub power_fill: f64,
}

impl PolicyHead {
    pub fn new(backbone: Backbone, num_vehicles: usize, init_log_std: f64, power_fill: f64) -> Self {
        assert_eq!(backbone.output_dim(), 2 * num_vehicles);
        assert!(power_fill > 0.0 && power_fill <= 1.0);
        PolicyHead {
            log_std: Array1::from_elem(2 * num_vehicles, init_log_std),
            backbone,
            num_vehicles,
            power_fill,
        }
    }

    pub fn num_vehicles(&self) -> usize {
        self.num_vehicles
    }

    pub fn stds(&self) -> Array1<f64> {
        self.log_std.mapv(|l| l.clamp(LOG_STD_MIN, LOG_STD_MAX).exp())
    }

    /// Decode raw coordinates into a feasible action: angles through the
    /// bounded squash, powers through normalized exponential weights scaled
    /// to `power_fill * max_power`.
    pub fn decode(&self, raw: &[f64], max_power: f64) -> BeamAction {
        let k = self.num_vehicles;
        let beam_angles: Vec<f64> = raw[..k].iter().map(|&u| squash_angle(u)).collect();
        let logits = &raw[k..2 * k];
        let peak = logits
            .iter()
            .map(|&u| u.clamp(-POWER_RAW_CLAMP, POWER_RAW_CLAMP))
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits
            .iter()
            .map(|&u| (u.clamp(-POWER_RAW_CLAMP, POWER_RAW_CLAMP) - peak).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let budget = self.power_fill * max_power;
        let power_alloc = weights.iter().map(|w| w / total * budget).collect();
        BeamAction {
            beam_angles,
            power_alloc,
        }
    }

    /// Gaussian log-density of `raw` under the current means, including the
    /// angle-squash change of variables. The power block's normalized
    /// exponential is shift-invariant, so its density is reported in raw
    /// coordinates; any constant offset cancels in likelihood ratios.
    pub fn log_prob_from_mean(&self, mean: &[f64], raw: &[f64]) -> f64 {
        let stds = self.stds();
        let mut lp = 0.0;
        for i in 0..raw.len() {
            let z = (raw[i] - mean[i]) / stds[i];
            lp += -0.5 * z * z - stds[i].ln() - HALF_LN_TWO_PI;
        }
        for &u in &raw[..self.num_vehicles] {
            lp -= angle_squash_log_jacobian(u);
        }
        lp
    }

    /// Entropy of the raw Gaussian.
    pub fn entropy(&self) -> f64 {
        self.stds().iter().map(|s| s.ln() + 0.5 + HALF_LN_TWO_PI).sum()
    }

    /// Sample (or take the mean of) the policy at one observation.
    pub fn act<R: Rng>(
        &self,
        obs_normalized: &[f64],
        max_power: f64,
        deterministic: bool,
        rng: &mut R,
    ) -> Result<ActOutcome, SnnError> {
        let (mean, trace) = self.backbone.forward(obs_normalized)?;
        let stds = self.stds();
        let raw: Vec<f64> = if deterministic {
            mean.clone()
        } else {
            mean.iter()
                .zip(stds.iter())
                .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let action = self.decode(&raw, max_power);
        let log_prob = self.log_prob_from_mean(&mean, &raw);
        Ok(ActOutcome {
            action,
            log_prob,
            raw_action: raw,
            trace,
        })
    }
}

/// Critic head mapping an observation to a scalar state value.
#[derive(Debug, Clone)]
pub struct ValueHead {
    pub backbone: Backbone,
}

impl ValueHead {
    pub fn new(backbone: Backbone) -> Self {
        assert_eq!(backbone.output_dim(), 1);
        ValueHead { backbone }
    }

    pub fn value(&self, obs_normalized: &[f64]) -> Result<f64, SnnError> {
        let (out, _) = self.backbone.forward(obs_normalized)?;
        Ok(out[0])
    }

    pub fn value_batch(&self, x: &Array2<f64>) -> Result<(Array1<f64>, BackboneTrace), SnnError> {
        let (out, trace) = self.backbone.forward_batch(x)?;
        Ok((out.column(0).to_owned(), trace))
    }
}

/// Build a spiking or dense backbone with fan-in scaled initialization,
/// optionally boosted by `gain` so early membranes reach the threshold.
pub fn build_backbone<R: Rng>(
    spiking: bool,
    layer_dims: Vec<usize>,
    lif: LifParams,
    gain: f64,
    rng: &mut R,
) -> Result<Backbone, SnnError> {
    if spiking {
        let mut net = SpikingNetwork::with_uniform_init(layer_dims, lif, rng)?;
        if gain != 1.0 {
            for w in net.weights_mut() {
                w.mapv_inplace(|v| v * gain);
            }
        }
        Ok(Backbone::Spiking(net))
    } else {
        let mut net = DenseNetwork::with_uniform_init(layer_dims, DenseActivation::Tanh, rng)?;
        if gain != 1.0 {
            for w in net.weights_mut() {
                w.mapv_inplace(|v| v * gain);
            }
        }
        Ok(Backbone::Dense(net))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_policy(k: usize, spiking: bool) -> PolicyHead {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let backbone = build_backbone(
            spiking,
            vec![4 * k, 32, 32, 2 * k],
            LifParams::default(),
            3.0,
            &mut rng,
        )
        .unwrap();
        PolicyHead::new(backbone, k, -0.5, 1.0)
    }

    #[test]
    fn deterministic_act_is_repeatable() {
        let policy = test_policy(3, true);
        let obs = vec![0.1; 12];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = policy.act(&obs, 10.0, true, &mut rng).unwrap();
        let b = policy.act(&obs, 10.0, true, &mut rng).unwrap();
        assert_eq!(a.action, b.action);
        assert_eq!(a.log_prob, b.log_prob);
    }

    #[test]
    fn sampled_actions_always_feasible() {
        let policy = test_policy(3, true);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let obs = vec![-0.3; 12];
        let p_max = 10.0;
        for _ in 0..100_000 {
            let out = policy.act(&obs, p_max, false, &mut rng).unwrap();
            let total: f64 = out.action.power_alloc.iter().sum();
            assert!(total <= p_max + 1e-9, "budget blown: {total}");
            assert!(out.action.power_alloc.iter().all(|&p| p > 0.0));
            assert!(out
                .action
                .beam_angles
                .iter()
                .all(|&t| t > 0.0 && t < PI));
        }
    }

    #[test]
    fn decode_is_deterministic_in_raw() {
        let policy = test_policy(2, false);
        let raw = [0.4, -1.2, 0.9, 0.1];
        let a = policy.decode(&raw, 5.0);
        let b = policy.decode(&raw, 5.0);
        assert_eq!(a, b);
        // power scales with the budget
        let c = policy.decode(&raw, 10.0);
        for (x, y) in a.power_alloc.iter().zip(c.power_alloc.iter()) {
            assert!((y - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_raw_values_stay_feasible() {
        let policy = test_policy(2, false);
        let raw = [1e6, -1e6, 900.0, -900.0];
        let a = policy.decode(&raw, 10.0);
        assert!(a.beam_angles[0] < PI && a.beam_angles[0] > 0.0);
        assert!(a.beam_angles[1] > 0.0);
        assert!(a.power_alloc.iter().all(|&p| p > 0.0));
        assert!(a.power_alloc.iter().sum::<f64>() <= 10.0 + 1e-9);
    }

    #[test]
    fn angle_squash_round_trip() {
        for u in [-8.0, -1.0, 0.0, 0.5, 7.9] {
            let theta = squash_angle(u);
            assert!((unsquash_angle(theta) - u).abs() < 1e-9);
        }
        assert_eq!(squash_angle(0.0), PI / 2.0);
    }

    #[test]
    fn log_prob_matches_quadrature_on_one_dim() {
        // Marginal density of the squashed angle must integrate to one.
        let (mean_u, log_std) = (0.35f64, -0.25f64);
        let std: f64 = log_std.exp();
        let n = 20_000;
        let mut integral = 0.0;
        for i in 0..n {
            let theta = (i as f64 + 0.5) / n as f64 * PI;
            let u = unsquash_angle(theta);
            let z = (u - mean_u) / std;
            let log_gauss = -0.5 * z * z - std.ln() - HALF_LN_TWO_PI;
            let log_density = log_gauss - angle_squash_log_jacobian(u);
            integral += log_density.exp() * (PI / n as f64);
        }
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");

        // and the policy's log_prob agrees with the same formula
        let policy = test_policy(1, false);
        let mean = vec![mean_u, 0.0];
        let raw = vec![0.8, -0.4];
        let lp = {
            let mut p = policy.clone();
            p.log_std.fill(log_std);
            p.log_prob_from_mean(&mean, &raw)
        };
        let z0 = (raw[0] - mean[0]) / std;
        let z1 = (raw[1] - mean[1]) / std;
        let want = -0.5 * z0 * z0 - std.ln() - HALF_LN_TWO_PI - angle_squash_log_jacobian(raw[0])
            + (-0.5 * z1 * z1 - std.ln() - HALF_LN_TWO_PI);
        assert!((lp - want).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_gaussian_entropy() {
        let mut policy = test_policy(1, false);
        policy.log_std.fill(0.0);
        // 2 dims, each 0.5 ln(2 pi e)
        let want = 2.0 * (0.5 + HALF_LN_TWO_PI);
        assert!((policy.entropy() - want).abs() < 1e-12);
    }

    #[test]
    fn value_head_finite_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        let backbone =
            build_backbone(true, vec![12, 32, 32, 1], LifParams::default(), 3.0, &mut rng).unwrap();
        let head = ValueHead::new(backbone);
        for _ in 0..100 {
            let obs: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(head.value(&obs).unwrap().is_finite());
        }
    }
}
