//! Conventional feedforward baseline with the same layer shapes as the
//! spiking network: saturating hidden activations, linear output, exact
//! gradients.

use ndarray::Array2;
use rand::Rng;

use super::lif::SnnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseActivation {
    Tanh,
    Identity,
}

impl DenseActivation {
    fn apply(&self, x: f64) -> f64 {
        match self {
            DenseActivation::Tanh => x.tanh(),
            DenseActivation::Identity => x,
        }
    }

    fn grad_from_output(&self, y: f64) -> f64 {
        match self {
            DenseActivation::Tanh => 1.0 - y * y,
            DenseActivation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DenseNetwork {
    layer_dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    activation: DenseActivation,
}

/// Cached activations from one dense forward pass.
#[derive(Debug, Clone)]
pub struct DenseTrace {
    layer_dims: Vec<usize>,
    input: Array2<f64>,
    /// Post-activation outputs of each hidden layer, `[batch, neurons]`.
    hidden: Vec<Array2<f64>>,
}

impl DenseNetwork {
    pub fn zeros(layer_dims: Vec<usize>, activation: DenseActivation) -> Result<Self, SnnError> {
        if layer_dims.len() < 2 || layer_dims.iter().any(|&d| d == 0) {
            return Err(SnnError::InvalidParams(format!(
                "layer dims {layer_dims:?} need at least an input and an output layer"
            )));
        }
        let weights = layer_dims
            .windows(2)
            .map(|w| Array2::zeros((w[1], w[0])))
            .collect();
        Ok(DenseNetwork {
            layer_dims,
            weights,
            activation,
        })
    }

    pub fn with_uniform_init<R: Rng>(
        layer_dims: Vec<usize>,
        activation: DenseActivation,
        rng: &mut R,
    ) -> Result<Self, SnnError> {
        let mut net = Self::zeros(layer_dims, activation)?;
        for w in &mut net.weights {
            let bound = (1.0 / w.ncols() as f64).sqrt();
            w.mapv_inplace(|_| rng.gen_range(-bound..bound));
        }
        Ok(net)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
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

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, DenseTrace), SnnError> {
        let batch = Array2::from_shape_vec((1, x.len()), x.to_vec())
            .map_err(|_| SnnError::DimensionMismatch { expected: self.input_dim(), got: x.len() })?;
        let (out, trace) = self.forward_batch(&batch)?;
        Ok((out.row(0).to_vec(), trace))
    }

    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<(Array2<f64>, DenseTrace), SnnError> {
        if x.ncols() != self.input_dim() {
            return Err(SnnError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let mut trace = DenseTrace {
            layer_dims: self.layer_dims.clone(),
            input: x.clone(),
            hidden: Vec::with_capacity(self.weights.len() - 1),
        };
        let mut cur = x.clone();
        for (l, w) in self.weights.iter().enumerate() {
            let z = cur.dot(&w.t());
            if l + 1 < self.weights.len() {
                cur = z.mapv(|v| self.activation.apply(v));
                trace.hidden.push(cur.clone());
            } else {
                cur = z;
            }
        }
        Ok((cur, trace))
    }

    pub fn backward(
        &self,
        trace: &DenseTrace,
        output_grad: &[f64],
    ) -> Result<Vec<Array2<f64>>, SnnError> {
        let g = Array2::from_shape_vec((1, output_grad.len()), output_grad.to_vec())
            .map_err(|_| SnnError::DimensionMismatch {
                expected: self.output_dim(),
                got: output_grad.len(),
            })?;
        self.backward_batch(trace, &g)
    }

    pub fn backward_batch(
        &self,
        trace: &DenseTrace,
        output_grad: &Array2<f64>,
    ) -> Result<Vec<Array2<f64>>, SnnError> {
        if trace.layer_dims != self.layer_dims {
            return Err(SnnError::StaleTrace {
                net: self.layer_dims.clone(),
                trace: trace.layer_dims.clone(),
            });
        }
        if output_grad.ncols() != self.output_dim() || output_grad.nrows() != trace.input.nrows() {
            return Err(SnnError::DimensionMismatch {
                expected: self.output_dim() * trace.input.nrows(),
                got: output_grad.len(),
            });
        }
        let mut grads: Vec<Array2<f64>> = self
            .weights
            .iter()
            .map(|w| Array2::zeros(w.raw_dim()))
            .collect();
        let mut g = output_grad.clone();
        for l in (0..self.weights.len()).rev() {
            let input_l = if l == 0 { &trace.input } else { &trace.hidden[l - 1] };
            grads[l] = g.t().dot(input_l);
            if l > 0 {
                let upstream = g.dot(&self.weights[l]);
                let act = &trace.hidden[l - 1];
                g = ndarray::Zip::from(&upstream)
                    .and(act)
                    .map_collect(|&u, &y| u * self.activation.grad_from_output(y));
            }
        }
        Ok(grads)
    }
}
