//! Vehicle motion along the lane and the delay/Doppler measurement model.

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::config::{ScenarioConfig, SPEED_OF_LIGHT};
use super::state::VehicleState;

/// Guard band around broadside: below this |cos| the Doppler inversion is
/// numerically useless and the previous speed estimate is held.
pub const BROADSIDE_GUARD_COS: f64 = 0.05;

fn gaussian<R: Rng>(rng: &mut R, std: f64) -> f64 {
    if std == 0.0 {
        0.0
    } else {
        Normal::new(0.0, std).expect("finite std").sample(rng)
    }
}

/// Place vehicles at the configured initial positions with speeds drawn
/// uniformly from the scenario's speed range.
pub fn initial_states<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Vec<VehicleState> {
    let dist = Uniform::new_inclusive(cfg.speed_range.0, cfg.speed_range.1);
    cfg.initial_positions
        .iter()
        .map(|&(x, y)| VehicleState::from_position(x, y, dist.sample(rng)))
        .collect()
}

/// Constant-velocity motion along the lane plus Gaussian evolution noise on
/// speed, angle, and distance. The perturbed polar coordinates become the
/// new ground truth, so `(x, y)` is recomputed from them.
pub fn kinematics_step<R: Rng>(
    cfg: &ScenarioConfig,
    states: &mut [VehicleState],
    rng: &mut R,
) {
    for s in states.iter_mut() {
        let x = s.x + s.speed * cfg.slot_duration;
        let y = s.y;
        let speed = (s.speed + gaussian(rng, cfg.evol_noise_speed)).max(0.0);
        let moved = VehicleState::from_position(x, y, speed);
        let angle = moved.angle + gaussian(rng, cfg.evol_noise_angle);
        let distance = moved.distance + gaussian(rng, cfg.evol_noise_distance);
        *s = VehicleState::from_polar(angle, distance, speed);
    }
}

/// Noisy round-trip delay and Doppler readings for one vehicle.
pub fn simulate_measurement<R: Rng>(
    cfg: &ScenarioConfig,
    state: &VehicleState,
    noise_vars: (f64, f64),
    rng: &mut R,
) -> (f64, f64) {
    let (var_delay, var_doppler) = noise_vars;
    let delay = 2.0 * state.distance / SPEED_OF_LIGHT + gaussian(rng, var_delay.sqrt());
    let doppler = 2.0 * state.speed * state.angle.cos() * cfg.carrier_freq / SPEED_OF_LIGHT
        + gaussian(rng, var_doppler.sqrt());
    (delay, doppler)
}

/// Invert the measurement model: distance from delay, speed from Doppler.
/// Near broadside (|cos| below the guard) the Doppler carries no speed
/// information and `prev_speed` is held instead.
pub fn estimate_state(
    cfg: &ScenarioConfig,
    delay: f64,
    doppler: f64,
    est_angle: f64,
    prev_speed: f64,
) -> (f64, f64) {
    let distance = SPEED_OF_LIGHT * delay / 2.0;
    let cos = est_angle.cos();
    let speed = if cos.abs() < BROADSIDE_GUARD_COS {
        prev_speed
    } else {
        SPEED_OF_LIGHT * doppler / (2.0 * cos * cfg.carrier_freq)
    };
    (distance, speed)
}
