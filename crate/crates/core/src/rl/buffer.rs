//! On-policy experience storage and advantage estimation.

/// One stored environment step.
#[derive(Debug, Clone)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub raw_action: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    /// Episode ended at this step (the following state is a fresh reset).
    pub done: bool,
}

/// Fixed-capacity buffer, cleared after every update. May span episode
/// boundaries; `done` flags mask credit across them.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    capacity: usize,
    transitions: Vec<Transition>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        RolloutBuffer {
            capacity,
            transitions: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, t: Transition) {
        assert!(self.transitions.len() < self.capacity, "buffer already full");
        self.transitions.push(t);
    }

    pub fn is_full(&self) -> bool {
        self.transitions.len() >= self.capacity
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Generalized advantage estimates and returns. `lambda = 1` recovers
    /// the discounted Monte-Carlo advantage; `lambda = 0` the one-step
    /// temporal-difference residual. `bootstrap_value` stands in for the
    /// state after the final stored step (masked if that step ended an
    /// episode).
    pub fn compute_advantages(
        &self,
        bootstrap_value: f64,
        discount: f64,
        lambda: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.transitions.len();
        let mut advantages = vec![0.0; n];
        let mut carry = 0.0;
        for t in (0..n).rev() {
            let tr = &self.transitions[t];
            let mask = if tr.done { 0.0 } else { 1.0 };
            let next_value = if t + 1 < n {
                self.transitions[t + 1].value
            } else {
                bootstrap_value
            };
            let delta = tr.reward + discount * next_value * mask - tr.value;
            carry = delta + discount * lambda * mask * carry;
            advantages[t] = carry;
        }
        let returns = advantages
            .iter()
            .zip(&self.transitions)
            .map(|(a, tr)| a + tr.value)
            .collect();
        (advantages, returns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn push_steps(buf: &mut RolloutBuffer, rewards: &[f64], values: &[f64], dones: &[bool]) {
        for i in 0..rewards.len() {
            buf.push(Transition {
                obs: vec![0.0],
                raw_action: vec![0.0],
                log_prob: 0.0,
                reward: rewards[i],
                value: values[i],
                done: dones[i],
            });
        }
    }

    #[test]
    fn monte_carlo_limit_is_discounted_sum() {
        let mut buf = RolloutBuffer::new(8);
        let rewards = [1.0, 2.0, 0.5, -1.0];
        push_steps(&mut buf, &rewards, &[0.0; 4], &[false, false, false, true]);
        let g = 0.9;
        let (adv, ret) = buf.compute_advantages(123.0, g, 1.0); // bootstrap masked by done
        for t in 0..4 {
            let want: f64 = (t..4).map(|l| g.powi((l - t) as i32) * rewards[l]).sum();
            assert!((adv[t] - want).abs() < 1e-12, "t={t}: {} vs {want}", adv[t]);
            assert!((ret[t] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_reward_approaches_geometric_limit() {
        let n = 2000;
        let mut buf = RolloutBuffer::new(n);
        push_steps(&mut buf, &vec![1.0; n], &vec![0.0; n], &vec![false; n]);
        let (adv, _) = buf.compute_advantages(0.0, 0.99, 1.0);
        // truncated geometric series: 1/(1-0.99) = 100
        assert!((adv[0] - 100.0).abs() < 1e-4, "{}", adv[0]);
    }

    #[test]
    fn lambda_zero_is_td_residual() {
        let mut buf = RolloutBuffer::new(4);
        push_steps(
            &mut buf,
            &[1.0, 2.0, 3.0],
            &[0.5, 0.25, 0.75],
            &[false, false, false],
        );
        let g = 0.99;
        let (adv, _) = buf.compute_advantages(2.0, g, 0.0);
        assert!((adv[0] - (1.0 + g * 0.25 - 0.5)).abs() < 1e-12);
        assert!((adv[1] - (2.0 + g * 0.75 - 0.25)).abs() < 1e-12);
        assert!((adv[2] - (3.0 + g * 2.0 - 0.75)).abs() < 1e-12);
    }

    #[test]
    fn done_masks_bootstrap_and_carry() {
        let mut buf = RolloutBuffer::new(4);
        push_steps(&mut buf, &[1.0, 5.0], &[0.0, 0.0], &[true, false]);
        let (adv, _) = buf.compute_advantages(10.0, 0.9, 1.0);
        // step 0 ends an episode: nothing from step 1 leaks back
        assert!((adv[0] - 1.0).abs() < 1e-12);
        assert!((adv[1] - (5.0 + 0.9 * 10.0)).abs() < 1e-12);
    }

    #[test]
    fn gae_lambda_one_equals_mc_on_random_buffers() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let n = rng.gen_range(5..60);
            let mut buf = RolloutBuffer::new(n);
            let rewards: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let dones: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.1)).collect();
            push_steps(&mut buf, &rewards, &values, &dones);
            let bootstrap = rng.gen_range(-2.0..2.0);
            let g = 0.97;
            let (adv, _) = buf.compute_advantages(bootstrap, g, 1.0);

            // direct discounted Monte-Carlo with bootstrap tail
            for t in 0..n {
                let mut acc = 0.0;
                let mut disc = 1.0;
                let mut end = n;
                for l in t..n {
                    acc += disc * rewards[l];
                    disc *= g;
                    if dones[l] {
                        end = l;
                        break;
                    }
                }
                if end == n {
                    acc += disc * bootstrap;
                }
                let want = acc - values[t];
                assert!((adv[t] - want).abs() < 1e-10, "t={t}: {} vs {want}", adv[t]);
            }
        }
    }

    #[test]
    fn capacity_enforced() {
        let mut buf = RolloutBuffer::new(1);
        push_steps(&mut buf, &[0.0], &[0.0], &[false]);
        assert!(buf.is_full());
        buf.clear();
        assert!(buf.is_empty());
    }
}
