//! Layered spiking network: hidden LIF layers driven by binary spikes, a
//! threshold-free integrator output layer, and exact unrolled
//! backpropagation through the internal time steps.

use ndarray::Array2;
use rand::Rng;

use super::lif::{lif_step_batch, LifParams, SnnError};
use super::surrogate::{surrogate, surrogate_grad};

/// How hidden layers emit activity during the forward pass.
///
/// `Binary` is the operating mode: hard threshold spikes with the surrogate
/// derivative substituted during backpropagation and the reset treated as
/// non-differentiable. `Smoothed` replaces the spike function by the
/// surrogate itself and differentiates the whole pass exactly, which makes
/// the backward pass checkable against finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeMode {
    Binary,
    Smoothed,
}

/// Feedforward spiking network. Hidden layers fire; the final layer only
/// integrates its membrane potential, and the output is that potential
/// averaged over the internal time steps.
#[derive(Debug, Clone)]
pub struct SpikingNetwork {
    layer_dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    lif: LifParams,
    mode: SpikeMode,
}

/// Everything the backward pass needs from one forward pass: per hidden
/// layer and time step the pre-reset membrane potentials and emitted
/// spikes, plus the encoded input batch.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    layer_dims: Vec<usize>,
    steps: usize,
    batch: usize,
    input: Array2<f64>,
    /// `[hidden_layer][time_step]`, each `[batch, neurons]`.
    u_pre: Vec<Vec<Array2<f64>>>,
    spikes: Vec<Vec<Array2<f64>>>,
    mode: SpikeMode,
}

impl ForwardTrace {
    /// Fraction of (sample, neuron, step) slots that fired, per hidden layer.
    pub fn firing_rates(&self) -> Vec<f64> {
        self.spikes
            .iter()
            .map(|per_step| {
                let mut total = 0.0;
                let mut slots = 0usize;
                for s in per_step {
                    total += s.sum();
                    slots += s.len();
                }
                if slots == 0 {
                    0.0
                } else {
                    total / slots as f64
                }
            })
            .collect()
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Spike tensor of one hidden layer at one time step.
    pub fn spikes_at(&self, hidden_layer: usize, step: usize) -> &Array2<f64> {
        &self.spikes[hidden_layer][step]
    }

    /// Pre-reset membrane potentials of one hidden layer at one time step.
    pub fn membrane_at(&self, hidden_layer: usize, step: usize) -> &Array2<f64> {
        &self.u_pre[hidden_layer][step]
    }

    pub fn num_hidden_layers(&self) -> usize {
        self.spikes.len()
    }
}

impl SpikingNetwork {
    /// Zero-weight network; mostly useful in tests.
    pub fn zeros(layer_dims: Vec<usize>, lif: LifParams) -> Result<Self, SnnError> {
        Self::check_dims(&layer_dims)?;
        lif.validate()?;
        let weights = layer_dims
            .windows(2)
            .map(|w| Array2::zeros((w[1], w[0])))
            .collect();
        Ok(SpikingNetwork {
            layer_dims,
            weights,
            lif,
            mode: SpikeMode::Binary,
        })
    }

    /// Fan-in scaled uniform initialization: each weight drawn from
    /// `U(-sqrt(1/fan_in), sqrt(1/fan_in))`.
    pub fn with_uniform_init<R: Rng>(
        layer_dims: Vec<usize>,
        lif: LifParams,
        rng: &mut R,
    ) -> Result<Self, SnnError> {
        let mut net = Self::zeros(layer_dims, lif)?;
        for w in &mut net.weights {
            let bound = (1.0 / w.ncols() as f64).sqrt();
            w.mapv_inplace(|_| rng.gen_range(-bound..bound));
        }
        Ok(net)
    }

    fn check_dims(dims: &[usize]) -> Result<(), SnnError> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(SnnError::InvalidParams(format!(
                "layer dims {dims:?} need at least an input and an output layer"
            )));
        }
        Ok(())
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn lif(&self) -> &LifParams {
        &self.lif
    }

    pub fn mode(&self) -> SpikeMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: SpikeMode) {
        self.mode = mode;
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum()
    }

    /// Forward pass of a single observation vector.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardTrace), SnnError> {
        let batch = Array2::from_shape_vec((1, x.len()), x.to_vec())
            .map_err(|_| SnnError::DimensionMismatch { expected: self.input_dim(), got: x.len() })?;
        let (out, trace) = self.forward_batch(&batch)?;
        Ok((out.row(0).to_vec(), trace))
    }

    /// Forward pass over a `[batch, input_dim]` matrix. The same encoded
    /// input drives the first layer at every internal time step; membrane
    /// state starts from rest on every call.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<(Array2<f64>, ForwardTrace), SnnError> {
        if x.ncols() != self.input_dim() {
            return Err(SnnError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let batch = x.nrows();
        let steps = self.lif.steps;
        let hidden = self.weights.len() - 1;

        let mut u_post: Vec<Array2<f64>> = (0..hidden)
            .map(|h| Array2::zeros((batch, self.layer_dims[h + 1])))
            .collect();
        let mut u_out = Array2::zeros((batch, self.output_dim()));
        let mut out_sum = Array2::zeros((batch, self.output_dim()));

        let mut trace = ForwardTrace {
            layer_dims: self.layer_dims.clone(),
            steps,
            batch,
            input: x.clone(),
            u_pre: vec![Vec::with_capacity(steps); hidden],
            spikes: vec![Vec::with_capacity(steps); hidden],
            mode: self.mode,
        };

        for _ in 0..steps {
            let mut layer_input = x.clone();
            for h in 0..hidden {
                let drive = layer_input.dot(&self.weights[h].t());
                let (u_pre, spk, post) = match self.mode {
                    SpikeMode::Binary => lif_step_batch(&self.lif, &u_post[h], &drive),
                    SpikeMode::Smoothed => self.smoothed_step(&u_post[h], &drive),
                };
                u_post[h] = post;
                layer_input = spk.clone();
                trace.u_pre[h].push(u_pre);
                trace.spikes[h].push(spk);
            }
            let drive = layer_input.dot(&self.weights[hidden].t());
            u_out = u_out * (1.0 - self.lif.leak) + drive * self.lif.leak;
            out_sum += &u_out;
        }
        Ok((out_sum / steps as f64, trace))
    }

    fn smoothed_step(
        &self,
        u_post_prev: &Array2<f64>,
        drive: &Array2<f64>,
    ) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let p = &self.lif;
        let u_pre = u_post_prev * (1.0 - p.leak) + drive * p.leak;
        let psi = u_pre.mapv(|u| surrogate(u - p.threshold, p.surrogate_sharpness));
        let u_post = ndarray::Zip::from(&u_pre)
            .and(&psi)
            .map_collect(|&u, &s| u * (1.0 - s) + p.reset * s);
        (u_pre, psi, u_post)
    }

    /// Gradient of the reset branch with respect to the pre-reset membrane.
    fn reset_jacobian(&self, u_pre: f64, spike: f64) -> f64 {
        match self.mode {
            // hard reset, spike treated as a constant gate
            SpikeMode::Binary => 1.0 - spike,
            // exact derivative of u*(1-phi) + reset*phi
            SpikeMode::Smoothed => {
                let g = surrogate_grad(u_pre - self.lif.threshold, self.lif.surrogate_sharpness);
                (1.0 - spike) + (self.lif.reset - u_pre) * g
            }
        }
    }

    /// Backpropagate `output_grad` (d loss / d output) of a single sample.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        output_grad: &[f64],
    ) -> Result<Vec<Array2<f64>>, SnnError> {
        let g = Array2::from_shape_vec((1, output_grad.len()), output_grad.to_vec())
            .map_err(|_| SnnError::DimensionMismatch {
                expected: self.output_dim(),
                got: output_grad.len(),
            })?;
        self.backward_batch(trace, &g)
    }

    /// Backpropagate a `[batch, output_dim]` gradient through the unrolled
    /// time steps, summing weight gradients over the batch.
    ///
    /// Credit reaches each hidden membrane through two paths: the spike the
    /// neuron emitted at that step (surrogate derivative) and the leak carry
    /// into the next step (scaled by the reset gate).
    pub fn backward_batch(
        &self,
        trace: &ForwardTrace,
        output_grad: &Array2<f64>,
    ) -> Result<Vec<Array2<f64>>, SnnError> {
        if trace.layer_dims != self.layer_dims || trace.mode != self.mode {
            return Err(SnnError::StaleTrace {
                net: self.layer_dims.clone(),
                trace: trace.layer_dims.clone(),
            });
        }
        if output_grad.nrows() != trace.batch || output_grad.ncols() != self.output_dim() {
            return Err(SnnError::DimensionMismatch {
                expected: self.output_dim() * trace.batch,
                got: output_grad.len(),
            });
        }
        let steps = trace.steps;
        let hidden = self.weights.len() - 1;
        let leak = self.lif.leak;
        let mut grads: Vec<Array2<f64>> = self
            .weights
            .iter()
            .map(|w| Array2::zeros(w.raw_dim()))
            .collect();

        // Output integrator: U(t) = (1-leak) U(t-1) + leak * W drive(t).
        // d out / d U(t) telescopes backward as g(t) = G/T + (1-leak) g(t+1).
        let mut g_spk: Vec<Array2<f64>> =
            vec![Array2::zeros((trace.batch, self.layer_dims[hidden])); steps];
        let mut g_uout = Array2::<f64>::zeros(output_grad.raw_dim());
        for t in (0..steps).rev() {
            g_uout = output_grad / steps as f64 + g_uout * (1.0 - leak);
            let input_t = if hidden == 0 { &trace.input } else { &trace.spikes[hidden - 1][t] };
            grads[hidden] += &(g_uout.t().dot(input_t) * leak);
            if hidden > 0 {
                g_spk[t] = g_uout.dot(&self.weights[hidden]) * leak;
            }
        }

        // Hidden spiking layers, top-down; within a layer, time runs
        // backward so the carry path can accumulate.
        for h in (0..hidden).rev() {
            let mut g_next: Vec<Array2<f64>> = if h == 0 {
                Vec::new()
            } else {
                vec![Array2::zeros((trace.batch, self.layer_dims[h])); steps]
            };
            let mut g_carry = Array2::<f64>::zeros((trace.batch, self.layer_dims[h + 1]));
            for t in (0..steps).rev() {
                let u_pre = &trace.u_pre[h][t];
                let spk = &trace.spikes[h][t];
                let spike_grad = u_pre.mapv(|u| {
                    surrogate_grad(u - self.lif.threshold, self.lif.surrogate_sharpness)
                });
                let mut g_upre = &g_spk[t] * &spike_grad;
                if t + 1 < steps {
                    let gate = ndarray::Zip::from(u_pre)
                        .and(spk)
                        .map_collect(|&u, &s| self.reset_jacobian(u, s));
                    g_upre += &(&g_carry * &gate * (1.0 - leak));
                }
                let input_t = if h == 0 { &trace.input } else { &trace.spikes[h - 1][t] };
                grads[h] += &(g_upre.t().dot(input_t) * leak);
                if h > 0 {
                    g_next[t] = g_upre.dot(&self.weights[h]) * leak;
                }
                g_carry = g_upre;
            }
            if h > 0 {
                g_spk = g_next;
            }
        }
        Ok(grads)
    }
}
