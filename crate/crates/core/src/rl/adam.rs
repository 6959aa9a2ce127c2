//! Adaptive moment estimation over lists of parameter tensors.

use ndarray::{Array, Dimension};

#[derive(Debug, Clone)]
pub struct Adam<D: Dimension> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<Array<f64, D>>,
    v: Vec<Array<f64, D>>,
}

impl<D: Dimension> Adam<D> {
    pub fn new(lr: f64, shapes: &[Array<f64, D>]) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: shapes.iter().map(|a| Array::zeros(a.raw_dim())).collect(),
            v: shapes.iter().map(|a| Array::zeros(a.raw_dim())).collect(),
        }
    }

    /// One update over parallel slices of parameters and gradients.
    pub fn step(&mut self, params: &mut [Array<f64, D>], grads: &[Array<f64, D>]) {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            ndarray::Zip::from(p)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                });
        }
    }
}

/// Scale gradients in place so their joint L2 norm does not exceed `cap`.
/// Returns the pre-clip norm.
pub fn clip_global_norm<D: Dimension>(grads: &mut [Array<f64, D>], extra: &mut [f64], cap: f64) -> f64 {
    let mut sq = extra.iter().map(|g| g * g).sum::<f64>();
    for g in grads.iter() {
        sq += g.iter().map(|v| v * v).sum::<f64>();
    }
    let norm = sq.sqrt();
    if norm > cap && norm > 0.0 {
        let scale = cap / norm;
        for g in grads.iter_mut() {
            g.mapv_inplace(|v| v * scale);
        }
        for g in extra.iter_mut() {
            *g *= scale;
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2, Array1, Array2};

    #[test]
    fn descends_a_quadratic() {
        // minimize (p - 3)^2 elementwise
        let mut params = vec![Array2::<f64>::zeros((2, 2))];
        let mut opt = Adam::new(0.1, &params);
        for _ in 0..500 {
            let grads: Vec<Array2<f64>> = params.iter().map(|p| p.mapv(|v| 2.0 * (v - 3.0))).collect();
            opt.step(&mut params, &grads);
        }
        for v in params[0].iter() {
            assert!((v - 3.0).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn first_step_moves_by_lr() {
        // bias-corrected first step equals lr * sign(grad)
        let mut params = vec![arr1(&[0.0, 0.0])];
        let mut opt = Adam::new(0.05, &params);
        opt.step(&mut params, &[arr1(&[10.0, -0.001])]);
        assert!((params[0][0] + 0.05).abs() < 1e-6);
        assert!((params[0][1] - 0.05).abs() < 1e-6);
    }

    #[test]
    fn global_clip_scales_everything() {
        let mut grads = vec![arr2(&[[3.0, 0.0], [0.0, 0.0]])];
        let mut extra = [4.0];
        let norm = clip_global_norm(&mut grads, &mut extra, 0.5);
        assert!((norm - 5.0).abs() < 1e-12);
        assert!((grads[0][[0, 0]] - 0.3).abs() < 1e-12);
        assert!((extra[0] - 0.4).abs() < 1e-12);
        // under the cap nothing changes
        let mut g2 = vec![arr2(&[[0.1, 0.0], [0.0, 0.0]])];
        let mut e2 = [0.1];
        clip_global_norm(&mut g2, &mut e2, 0.5);
        assert_eq!(g2[0][[0, 0]], 0.1);
        assert_eq!(e2[0], 0.1);
    }
}
