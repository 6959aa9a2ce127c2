//! Clipped policy objective and value regression loss.

/// Clip function: `(1 + eps) * adv` for nonnegative advantages, `(1 - eps) *
/// adv` otherwise.
pub fn clip_bound(eps: f64, advantage: f64) -> f64 {
    if advantage >= 0.0 {
        (1.0 + eps) * advantage
    } else {
        (1.0 - eps) * advantage
    }
}

/// Per-sample clipped objective `min(ratio * adv, clip_bound(eps, adv))` and
/// its derivative with respect to the new log-probability (zero on the
/// clipped branch).
pub fn clipped_objective(
    log_prob_new: f64,
    log_prob_old: f64,
    advantage: f64,
    eps: f64,
) -> (f64, f64) {
    let ratio = (log_prob_new - log_prob_old).exp();
    let unclipped = ratio * advantage;
    let bound = clip_bound(eps, advantage);
    if unclipped <= bound {
        // d(ratio * adv)/d(log_prob_new) = ratio * adv
        (unclipped, unclipped)
    } else {
        (bound, 0.0)
    }
}

/// Batch policy loss: negative mean clipped objective minus the entropy
/// bonus.
pub fn clipped_policy_loss(
    log_prob_new: &[f64],
    log_prob_old: &[f64],
    advantages: &[f64],
    eps: f64,
    entropy: f64,
    entropy_coef: f64,
) -> f64 {
    assert_eq!(log_prob_new.len(), log_prob_old.len());
    assert_eq!(log_prob_new.len(), advantages.len());
    let mean_obj = log_prob_new
        .iter()
        .zip(log_prob_old)
        .zip(advantages)
        .map(|((&n, &o), &a)| clipped_objective(n, o, a, eps).0)
        .sum::<f64>()
        / log_prob_new.len() as f64;
    -mean_obj - entropy_coef * entropy
}

/// Mean squared error between predicted values and returns.
pub fn value_loss(values: &[f64], returns: &[f64]) -> f64 {
    assert_eq!(values.len(), returns.len());
    values
        .iter()
        .zip(returns)
        .map(|(v, r)| (v - r) * (v - r))
        .sum::<f64>()
        / values.len() as f64
}

/// Normalize advantages to zero mean and unit variance in place. Rank order
/// within the batch is preserved.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.len() < 2 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / adv.len() as f64;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / adv.len() as f64;
    let std = var.sqrt().max(1e-8);
    for a in adv.iter_mut() {
        *a = (*a - mean) / std;
    }
}
