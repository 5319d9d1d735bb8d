//! True-online SARSA(lambda) with linear function approximation over
//! Fourier cosine features.

use rand_chacha::ChaCha8Rng;

use super::epsilon_greedy_excluding;
use super::fourier::FourierBasis;
use crate::control::{ControlContext, SignalController, Transition};
use crate::sim::Phase;

/// Linear on-policy TD(lambda) controller with dutch eligibility traces.
#[derive(Debug, Clone)]
pub struct SarsaAgent {
    pub basis: FourierBasis,
    /// Per-action weight blocks, `actions * features` long.
    pub weights: Vec<f64>,
    traces: Vec<f64>,
    q_old: f64,
    features: usize,
    actions: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon: f64,
    rng: ChaCha8Rng,
}

impl SarsaAgent {
    pub fn new(
        basis: FourierBasis,
        state_dim: usize,
        actions: usize,
        alpha: f64,
        gamma: f64,
        lambda: f64,
        epsilon: f64,
        rng: ChaCha8Rng,
    ) -> Self {
        let features = basis.feature_count(state_dim);
        SarsaAgent {
            basis,
            weights: vec![0.0; actions * features],
            traces: vec![0.0; actions * features],
            q_old: 0.0,
            features,
            actions,
            alpha,
            gamma,
            lambda,
            epsilon,
            rng,
        }
    }

    pub fn q_value(&self, phi: &[f64], action: usize) -> f64 {
        let block = &self.weights[action * self.features..(action + 1) * self.features];
        block.iter().zip(phi).map(|(w, x)| w * x).sum()
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        let phi = self.basis.features(state);
        (0..self.actions).map(|a| self.q_value(&phi, a)).collect()
    }

    /// One true-online update for the sample (s, a, r, s', a').
    pub fn update(
        &mut self,
        state: &[f64],
        action: usize,
        reward: f64,
        next_state: &[f64],
        next_action: usize,
        done: bool,
    ) {
        let phi = self.basis.features(state);
        let q_sa = self.q_value(&phi, action);
        let q_next = if done {
            0.0
        } else {
            let phi_next = self.basis.features(next_state);
            self.q_value(&phi_next, next_action)
        };
        let delta = reward + self.gamma * q_next - q_sa;

        let decay = self.gamma * self.lambda;
        let block = action * self.features;
        // Dutch-trace inner product uses the pre-decay traces.
        let e_dot_x: f64 =
            self.traces[block..block + self.features].iter().zip(&phi).map(|(e, x)| e * x).sum();
        for e in self.traces.iter_mut() {
            *e *= decay;
        }
        let scale = 1.0 - self.alpha * decay * e_dot_x;
        for (e, x) in self.traces[block..block + self.features].iter_mut().zip(&phi) {
            *e += scale * x;
        }

        let correction = q_sa - self.q_old;
        let lr = self.alpha;
        for (w, e) in self.weights.iter_mut().zip(self.traces.iter()) {
            *w += lr * (delta + correction) * e;
        }
        for (w, x) in self.weights[block..block + self.features].iter_mut().zip(&phi) {
            *w -= lr * correction * x;
        }

        if done {
            self.reset_episode_state();
        } else {
            self.q_old = q_next;
        }
    }

    pub fn reset_episode_state(&mut self) {
        self.traces.iter_mut().for_each(|e| *e = 0.0);
        self.q_old = 0.0;
    }

    pub fn traces(&self) -> &[f64] {
        &self.traces
    }
}

impl SignalController for SarsaAgent {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        let q = self.q_values(&ctx.obs.to_vec());
        let a = epsilon_greedy_excluding(&q, self.epsilon, exclude.map(Phase::index), &mut self.rng);
        Phase::from_index(a)
    }

    fn learn(&mut self, t: &Transition) {
        self.update(&t.state, t.action, t.reward, &t.next_state, t.next_action, t.done);
    }

    fn finish_episode(&mut self) {
        self.reset_episode_state();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// One-hot features over 3 states: basis order 0 with full passthrough.
    fn tabular_agent(alpha: f64, gamma: f64, lambda: f64) -> SarsaAgent {
        SarsaAgent::new(
            FourierBasis::new(0, 3),
            3,
            2,
            alpha,
            gamma,
            lambda,
            0.0,
            ChaCha8Rng::seed_from_u64(0),
        )
    }

    fn one_hot(s: usize) -> Vec<f64> {
        let mut v = vec![0.0; 3];
        v[s] = 1.0;
        v
    }

    #[test]
    fn lambda_zero_reduces_to_one_step_sarsa() {
        let mut agent = tabular_agent(0.5, 0.9, 0.0);
        agent.weights[0] = 0.2; // Q(s0, a0)
        agent.weights[4] = 0.7; // Q(s1, a1): block 1 offset 3 + index 1
        agent.q_old = 0.123; // must not matter at lambda = 0
        let q_sa = 0.2;
        let q_next = 0.7;
        agent.update(&one_hot(0), 0, 1.0, &one_hot(1), 1, false);
        let delta = 1.0 + 0.9 * q_next - q_sa;
        assert!((agent.weights[0] - (0.2 + 0.5 * delta)).abs() < 1e-12);
    }

    #[test]
    fn zero_features_leave_weights_unchanged() {
        let mut agent = tabular_agent(0.5, 0.9, 0.5);
        agent.weights.iter_mut().for_each(|w| *w = 0.25);
        let before = agent.weights.clone();
        agent.q_old = 0.0;
        agent.update(&[0.0, 0.0, 0.0], 0, 0.0, &[0.0, 0.0, 0.0], 0, false);
        assert_eq!(agent.weights, before);
    }

    #[test]
    fn traces_reset_on_done() {
        let mut agent = tabular_agent(0.1, 0.9, 0.9);
        agent.update(&one_hot(0), 0, 1.0, &one_hot(1), 1, false);
        assert!(agent.traces().iter().any(|e| *e != 0.0));
        agent.update(&one_hot(1), 1, 1.0, &one_hot(2), 0, true);
        assert!(agent.traces().iter().all(|e| *e == 0.0));
    }

    #[test]
    fn policy_evaluation_matches_dp_fixed_point() {
        // 3-state chain, fixed uniform-random behavior policy. On-policy
        // SARSA with one-hot features must converge to the Q of that policy,
        // computed here by dynamic-programming iteration.
        let gamma = 0.9;
        // Actions: 0 = left, 1 = right. Reaching state 2 from state 1 via
        // right yields reward 1 and terminates.
        let step = |s: usize, a: usize| -> (usize, f64, bool) {
            match (s, a) {
                (1, 1) => (2, 1.0, true),
                (s, 1) => (s + 1, 0.0, false),
                (0, _) => (0, 0.0, false),
                (s, _) => (s - 1, 0.0, false),
            }
        };
        // DP evaluation of the uniform policy.
        let mut q = [[0.0f64; 2]; 2]; // states 0 and 1 (2 is terminal)
        for _ in 0..10_000 {
            let mut next = q;
            for s in 0..2 {
                for a in 0..2 {
                    let (s2, r, done) = step(s, a);
                    let v = if done { 0.0 } else { 0.5 * (q[s2][0] + q[s2][1]) };
                    next[s][a] = r + gamma * v;
                }
            }
            q = next;
        }

        use rand::Rng;
        let mut agent = tabular_agent(0.02, gamma, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4000 {
            let mut s = 0usize;
            let mut a = rng.gen_range(0..2);
            loop {
                let (s2, r, done) = step(s, a);
                let a2 = rng.gen_range(0..2);
                agent.update(&one_hot(s), a, r, &one_hot(s2), a2, done);
                if done {
                    break;
                }
                s = s2;
                a = a2;
            }
        }
        for s in 0..2 {
            for a in 0..2 {
                let got = agent.q_value(&agent.basis.features(&one_hot(s)), a);
                assert!(
                    (got - q[s][a]).abs() < 1e-2,
                    "Q({s},{a}) = {got}, dp = {}",
                    q[s][a]
                );
            }
        }
    }
}
