//! Leaky integrate-and-fire dynamics.

use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnnError {
    #[error("input has {got} features, layer expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("trace was produced by a network with dims {trace:?}, not {net:?}")]
    StaleTrace { net: Vec<usize>, trace: Vec<usize> },
    #[error("invalid LIF parameters: {0}")]
    InvalidParams(String),
}

/// Membrane parameters shared by every spiking layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifParams {
    /// Leakage coefficient in (0, 1]; the drive is scaled by it as well.
    pub leak: f64,
    /// Firing threshold.
    pub threshold: f64,
    /// Post-spike reset potential.
    pub reset: f64,
    /// Internal time steps per forward pass.
    pub steps: usize,
    /// Sharpness of the arc-tangent spike surrogate.
    pub surrogate_sharpness: f64,
}

impl LifParams {
    pub fn validate(&self) -> Result<(), SnnError> {
        if !(self.leak > 0.0 && self.leak <= 1.0) {
            return Err(SnnError::InvalidParams(format!("leak {} not in (0, 1]", self.leak)));
        }
        if self.steps == 0 {
            return Err(SnnError::InvalidParams("steps must be >= 1".into()));
        }
        if !(self.threshold > self.reset) {
            return Err(SnnError::InvalidParams(format!(
                "threshold {} must exceed reset {}",
                self.threshold, self.reset
            )));
        }
        if !(self.surrogate_sharpness > 0.0) {
            return Err(SnnError::InvalidParams("surrogate sharpness must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for LifParams {
    fn default() -> Self {
        LifParams {
            leak: 0.5,
            threshold: 1.0,
            reset: 0.0,
            steps: 6,
            surrogate_sharpness: 3.0,
        }
    }
}

/// One membrane update: leak the previous potential, add the scaled drive,
/// fire where the threshold is crossed, reset fired units.
pub fn lif_step(
    params: &LifParams,
    u_prev: &Array1<f64>,
    input_current: &Array1<f64>,
) -> Result<(Array1<f64>, Array1<f64>), SnnError> {
    if u_prev.len() != input_current.len() {
        return Err(SnnError::DimensionMismatch {
            expected: u_prev.len(),
            got: input_current.len(),
        });
    }
    let u_pre = u_prev * (1.0 - params.leak) + input_current * params.leak;
    let spikes = u_pre.mapv(|u| if u >= params.threshold { 1.0 } else { 0.0 });
    let u_next = ndarray::Zip::from(&u_pre)
        .and(&spikes)
        .map_collect(|&u, &s| if s > 0.0 { params.reset } else { u });
    Ok((u_next, spikes))
}

/// Batched membrane update over rows of `[batch, neurons]` arrays. Returns
/// (pre-reset potential, spikes, post-reset potential); the pre-reset value
/// is what backpropagation differentiates through.
pub(crate) fn lif_step_batch(
    params: &LifParams,
    u_prev: &Array2<f64>,
    drive: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let u_pre = u_prev * (1.0 - params.leak) + drive * params.leak;
    let spikes = u_pre.mapv(|u| if u >= params.threshold { 1.0 } else { 0.0 });
    let u_post = ndarray::Zip::from(&u_pre)
        .and(&spikes)
        .map_collect(|&u, &s| if s > 0.0 { params.reset } else { u });
    (u_pre, spikes, u_post)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;

    #[test]
    fn pure_leak_halves_potential() {
        let p = LifParams::default();
        let (u, s) = lif_step(&p, &arr1(&[0.8]), &arr1(&[0.0])).unwrap();
        assert_eq!(u[0], 0.4);
        assert_eq!(s[0], 0.0);
    }

    #[test]
    fn strong_drive_spikes_and_resets() {
        let p = LifParams::default();
        // drive >= 2 * threshold / leak guarantees a crossing from rest
        let (u, s) = lif_step(&p, &arr1(&[0.0]), &arr1(&[4.0])).unwrap();
        assert_eq!(s[0], 1.0);
        assert_eq!(u[0], p.reset);
    }

    #[test]
    fn matches_scalar_loop_on_random_vector() {
        use rand::{Rng, SeedableRng};
        let p = LifParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let u_prev: Vec<f64> = (0..128).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let drive: Vec<f64> = (0..128).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let (u, s) = lif_step(&p, &arr1(&u_prev), &arr1(&drive)).unwrap();
        for i in 0..128 {
            let pre = (1.0 - p.leak) * u_prev[i] + p.leak * drive[i];
            let spiked = pre >= p.threshold;
            assert_eq!(s[i], if spiked { 1.0 } else { 0.0 });
            assert_eq!(u[i], if spiked { p.reset } else { pre });
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = LifParams::default();
        assert!(lif_step(&p, &arr1(&[0.0, 0.0]), &arr1(&[1.0])).is_err());
    }

    #[test]
    fn leak_contraction_is_exact_elementwise() {
        use rand::{Rng, SeedableRng};
        let p = LifParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        // sub-threshold potentials: no spikes, each element scales by (1 - leak)
        let u_prev: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..0.9)).collect();
        let zero = Array1::zeros(64);
        let (u, s) = lif_step(&p, &arr1(&u_prev), &zero).unwrap();
        assert!(s.iter().all(|&x| x == 0.0));
        for i in 0..64 {
            assert_eq!(u[i].to_bits(), ((1.0 - p.leak) * u_prev[i]).to_bits());
        }
    }

    #[test]
    fn param_validation() {
        let mut p = LifParams::default();
        p.leak = 0.0;
        assert!(p.validate().is_err());
        let mut p = LifParams::default();
        p.steps = 0;
        assert!(p.validate().is_err());
        let mut p = LifParams::default();
        p.reset = 2.0;
        assert!(p.validate().is_err());
        assert!(LifParams::default().validate().is_ok());
    }
}
