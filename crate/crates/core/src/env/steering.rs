//! Uniform-linear-array steering vectors and their angle derivatives.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::state::EnvError;

/// Steering vector of an N-element half-wavelength ULA toward angle `theta`.
///
/// Element m (0-based) is `sqrt(1/N) * exp(-j*pi*m*cos(theta))`, so the
/// vector always has unit norm.
pub fn steering_vector(theta: f64, n_elems: usize) -> Result<Vec<Complex64>, EnvError> {
    if n_elems == 0 {
        return Err(EnvError::EmptyArray);
    }
    if !(theta > 0.0 && theta < PI) || !theta.is_finite() {
        return Err(EnvError::AngleOutOfRange(theta));
    }
    Ok(steering_vector_unchecked(theta, n_elems))
}

pub(crate) fn steering_vector_unchecked(theta: f64, n_elems: usize) -> Vec<Complex64> {
    let scale = (1.0 / n_elems as f64).sqrt();
    let phase_step = -PI * theta.cos();
    (0..n_elems)
        .map(|m| Complex64::from_polar(scale, phase_step * m as f64))
        .collect()
}

/// Transmit beamformer realizing maximum array response toward `theta`:
/// the steering vector itself (unit norm, `|a^H(theta) f| = 1` at the
/// pointing angle and strictly smaller elsewhere).
pub fn beamformer(theta: f64, n_tx: usize) -> Result<Vec<Complex64>, EnvError> {
    steering_vector(theta, n_tx)
}

/// Array response `a^H(theta) f` of beamformer `f` seen from angle `theta`.
pub fn beam_response(theta: f64, f: &[Complex64]) -> Complex64 {
    let a = steering_vector_unchecked(theta, f.len());
    a.iter().zip(f).map(|(am, fm)| am.conj() * fm).sum()
}

/// Analytic derivative d/dtheta of `a^H(theta) f`.
///
/// With a_m = sqrt(1/N) e^{-j pi m cos theta}, d a_m / d theta =
/// j pi m sin(theta) a_m, so the conjugated element picks up
/// `-j pi m sin(theta)`.
pub fn beam_response_derivative(theta: f64, f: &[Complex64]) -> Complex64 {
    let a = steering_vector_unchecked(theta, f.len());
    let s = PI * theta.sin();
    a.iter()
        .zip(f)
        .enumerate()
        .map(|(m, (am, fm))| Complex64::new(0.0, -s * m as f64) * am.conj() * fm)
        .sum()
}
