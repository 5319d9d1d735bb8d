//! Synchronous advantage actor-critic with separate actor and critic MLPs,
//! n-step rollouts, one-step advantages, and an entropy bonus.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::adam::{clip_grad_norm, Adam};
use super::nn::Mlp;
use crate::control::{ControlContext, SignalController, Transition};
use crate::sim::Phase;

/// One-step advantage estimate `r + gamma * V(s') - V(s)`.
pub fn advantage(reward: f64, gamma: f64, v_next: f64, v_state: f64, done: bool) -> f64 {
    let bootstrap = if done { 0.0 } else { gamma * v_next };
    reward + bootstrap - v_state
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone)]
pub struct A2cAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    adam_actor: Adam,
    adam_critic: Adam,
    rollout: Vec<Transition>,
    pub alpha: f64,
    pub gamma: f64,
    pub n_step: usize,
    pub entropy_coef: f64,
    pub grad_clip: Option<f64>,
    rng: ChaCha8Rng,
}

impl A2cAgent {
    pub fn new(
        state_dim: usize,
        hidden: &[usize],
        actions: usize,
        alpha: f64,
        gamma: f64,
        n_step: usize,
        entropy_coef: f64,
        mut rng: ChaCha8Rng,
    ) -> Self {
        let mut actor_dims = vec![state_dim];
        actor_dims.extend_from_slice(hidden);
        actor_dims.push(actions);
        let mut critic_dims = vec![state_dim];
        critic_dims.extend_from_slice(hidden);
        critic_dims.push(1);
        let actor = Mlp::init(&actor_dims, &mut rng);
        let critic = Mlp::init(&critic_dims, &mut rng);
        let adam_actor = Adam::new(actor.params.len());
        let adam_critic = Adam::new(critic.params.len());
        A2cAgent {
            actor,
            critic,
            adam_actor,
            adam_critic,
            rollout: Vec::new(),
            alpha,
            gamma,
            n_step,
            entropy_coef,
            grad_clip: Some(10.0),
            rng,
        }
    }

    pub fn policy(&self, state: &[f64]) -> Vec<f64> {
        softmax(&self.actor.forward(state))
    }

    pub fn value(&self, state: &[f64]) -> f64 {
        self.critic.forward(state)[0]
    }

    fn sample_action(&mut self, probs: &[f64], exclude: Option<usize>) -> usize {
        let allowed: Vec<usize> =
            (0..probs.len()).filter(|i| Some(*i) != exclude).collect();
        let total: f64 = allowed.iter().map(|&i| probs[i]).sum();
        if total <= 0.0 {
            return allowed[0];
        }
        let mut u: f64 = self.rng.gen::<f64>() * total;
        for &i in &allowed {
            u -= probs[i];
            if u <= 0.0 {
                return i;
            }
        }
        *allowed.last().unwrap()
    }

    /// Gradient of the actor loss at the logits for one sample:
    /// `(p - onehot(a)) * advantage + beta * p_k (ln p_k + H)`.
    pub fn actor_logit_grad(probs: &[f64], action: usize, adv: f64, entropy_coef: f64) -> Vec<f64> {
        let entropy: f64 = -probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>();
        probs
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let policy_term = (p - if k == action { 1.0 } else { 0.0 }) * adv;
                let entropy_term =
                    if p > 0.0 { entropy_coef * p * (p.ln() + entropy) } else { 0.0 };
                policy_term + entropy_term
            })
            .collect()
    }

    /// Applies one update over the buffered rollout and clears it.
    pub fn update_rollout(&mut self) {
        if self.rollout.is_empty() {
            return;
        }
        let n = self.rollout.len() as f64;
        let mut actor_grads = vec![0.0; self.actor.params.len()];
        let mut critic_grads = vec![0.0; self.critic.params.len()];

        for t in &self.rollout {
            let v_s = self.critic.forward(&t.state)[0];
            let v_next = self.critic.forward(&t.next_state)[0];
            let adv = advantage(t.reward, self.gamma, v_next, v_s, t.done);

            // Critic regresses V(s) toward the bootstrapped target.
            let critic_cache = self.critic.forward_cached(&t.state);
            self.critic.backward_into(&critic_cache, &[-2.0 * adv / n], &mut critic_grads);

            // Actor ascends log-prob weighted by the (constant) advantage.
            let actor_cache = self.actor.forward_cached(&t.state);
            let probs = softmax(actor_cache.output());
            let mut grad = Self::actor_logit_grad(&probs, t.action, adv, self.entropy_coef);
            for g in grad.iter_mut() {
                *g /= n;
            }
            self.actor.backward_into(&actor_cache, &grad, &mut actor_grads);
        }
        if let Some(max_norm) = self.grad_clip {
            clip_grad_norm(&mut actor_grads, max_norm);
            clip_grad_norm(&mut critic_grads, max_norm);
        }
        self.adam_actor.step(&mut self.actor.params, &actor_grads, self.alpha);
        self.adam_critic.step(&mut self.critic.params, &critic_grads, self.alpha);
        self.rollout.clear();
    }
}

impl SignalController for A2cAgent {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        let probs = self.policy(&ctx.obs.to_vec());
        let a = self.sample_action(&probs, exclude.map(Phase::index));
        Phase::from_index(a)
    }

    fn learn(&mut self, t: &Transition) {
        let done = t.done;
        self.rollout.push(t.clone());
        if self.rollout.len() >= self.n_step || done {
            self.update_rollout();
        }
    }

    fn finish_episode(&mut self) {
        self.update_rollout();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn advantage_hand_value() {
        // r = 1, gamma = 0.99, V(s') = 0.5, V(s) = 0.2 -> 1.295.
        let adv = advantage(1.0, 0.99, 0.5, 0.2, false);
        assert!((adv - 1.295).abs() < 1e-12);
        assert!((adv * adv - 1.677025).abs() < 1e-12);
    }

    #[test]
    fn zero_advantage_leaves_entropy_only_gradient() {
        let probs = softmax(&[0.3, -0.1, 0.6]);
        let grad = A2cAgent::actor_logit_grad(&probs, 1, 0.0, 0.01);
        let entropy: f64 = -probs.iter().map(|p| p * p.ln()).sum::<f64>();
        for (k, g) in grad.iter().enumerate() {
            let expected = 0.01 * probs[k] * (probs[k].ln() + entropy);
            assert!((g - expected).abs() < 1e-12);
        }
        // And with the entropy bonus off, the gradient vanishes entirely.
        let bare = A2cAgent::actor_logit_grad(&probs, 1, 0.0, 0.0);
        assert!(bare.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn single_action_policy_has_zero_actor_gradient() {
        let probs = vec![1.0];
        let grad = A2cAgent::actor_logit_grad(&probs, 0, 2.5, 0.01);
        assert!(grad[0].abs() < 1e-12);
    }

    #[test]
    fn critic_converges_on_two_state_mdp() {
        // Two states, single action, deterministic: s0 -> s1 (reward 1),
        // s1 -> s0 (reward 0), gamma = 0.9.
        // V* solves V0 = 1 + g V1, V1 = 0 + g V0:
        // V0 = (1)/(1 - g^2), V1 = g / (1 - g^2).
        let gamma = 0.9;
        let v0 = 1.0 / (1.0 - gamma * gamma);
        let v1 = gamma * v0;
        let mut agent = A2cAgent::new(
            2,
            &[8],
            1,
            0.01,
            gamma,
            4,
            0.0,
            ChaCha8Rng::seed_from_u64(3),
        );
        let s0 = vec![1.0, 0.0];
        let s1 = vec![0.0, 1.0];
        for _ in 0..4000 {
            agent.learn(&Transition {
                state: s0.clone(),
                action: 0,
                reward: 1.0,
                next_state: s1.clone(),
                next_action: 0,
                done: false,
            });
            agent.learn(&Transition {
                state: s1.clone(),
                action: 0,
                reward: 0.0,
                next_state: s0.clone(),
                next_action: 0,
                done: false,
            });
        }
        assert!((agent.value(&s0) - v0).abs() < 1e-2, "V0 {} vs {v0}", agent.value(&s0));
        assert!((agent.value(&s1) - v1).abs() < 1e-2, "V1 {} vs {v1}", agent.value(&s1));
    }

    #[test]
    fn rollout_flushes_at_n_steps() {
        let mut agent =
            A2cAgent::new(2, &[4], 2, 0.001, 0.9, 3, 0.01, ChaCha8Rng::seed_from_u64(0));
        let t = Transition {
            state: vec![0.1, 0.2],
            action: 0,
            reward: 0.5,
            next_state: vec![0.2, 0.1],
            next_action: 1,
            done: false,
        };
        let before = agent.actor.params.clone();
        agent.learn(&t);
        agent.learn(&t);
        assert_eq!(agent.actor.params, before, "no update before n steps");
        agent.learn(&t);
        assert_ne!(agent.actor.params, before, "update after n steps");
        assert_eq!(agent.rollout.len(), 0);
    }
}
