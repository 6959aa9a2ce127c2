//! Arc-tangent spike surrogate used during backpropagation.

use std::f64::consts::PI;

/// Smooth stand-in for the Heaviside spike function, evaluated at the
/// membrane excess `psi = U - U_th`:
/// `phi(psi) = arctan(pi*eta/2 * psi)/pi + 1/2`.
pub fn surrogate(psi: f64, sharpness: f64) -> f64 {
    (PI * sharpness / 2.0 * psi).atan() / PI + 0.5
}

/// Derivative of [`surrogate`]:
/// `phi'(psi) = (eta/2) / (1 + (pi*eta/2 * psi)^2)`.
pub fn surrogate_grad(psi: f64, sharpness: f64) -> f64 {
    let z = PI * sharpness / 2.0 * psi;
    sharpness / 2.0 / (1.0 + z * z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_at_one_half() {
        assert_eq!(surrogate(0.0, 3.0), 0.5);
    }

    #[test]
    fn peak_slope_is_half_sharpness() {
        assert_eq!(surrogate_grad(0.0, 3.0), 1.5);
        assert_eq!(surrogate_grad(0.0, 10.0), 5.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let h = 1e-6;
        for _ in 0..1000 {
            let psi: f64 = rng.gen_range(-3.0..3.0);
            let eta: f64 = rng.gen_range(0.5..10.0);
            let fd = (surrogate(psi + h, eta) - surrogate(psi - h, eta)) / (2.0 * h);
            let an = surrogate_grad(psi, eta);
            assert!((an - fd).abs() <= 1e-8 * an.abs().max(1.0), "{an} vs {fd}");
        }
    }

    #[test]
    fn sharpens_toward_step() {
        let mut above = Vec::new();
        let mut below = Vec::new();
        for eta in [3.0, 30.0, 300.0] {
            above.push(surrogate(0.1, eta));
            below.push(surrogate(-0.1, eta));
        }
        assert!(above.windows(2).all(|w| w[1] > w[0]));
        assert!(below.windows(2).all(|w| w[1] < w[0]));
        assert!(above[2] > 0.99);
        assert!(below[2] < 0.01);
    }
}
