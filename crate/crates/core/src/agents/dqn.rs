//! Deep Q-network: MLP Q-function with experience replay and a periodically
//! frozen target network.

use rand_chacha::ChaCha8Rng;

use super::adam::{clip_grad_norm, Adam};
use super::nn::Mlp;
use super::replay::ReplayBuffer;
use super::{epsilon_at, epsilon_greedy_excluding};
use crate::control::{ControlContext, SignalController, Transition};
use crate::sim::Phase;

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub net: Mlp,
    pub target: Mlp,
    adam: Adam,
    replay: ReplayBuffer,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_min: f64,
    pub target_interval: u64,
    pub batch_size: usize,
    /// Global-norm gradient clip; squared TD errors on raw traffic rewards
    /// are large enough to blow up an MLP without it.
    pub grad_clip: Option<f64>,
    updates: u64,
    rng: ChaCha8Rng,
}

#[allow(clippy::too_many_arguments)]
impl DqnAgent {
    pub fn new(
        dims: &[usize],
        capacity: usize,
        batch_size: usize,
        alpha: f64,
        gamma: f64,
        epsilon: f64,
        epsilon_min: f64,
        target_interval: u64,
        mut rng: ChaCha8Rng,
    ) -> Self {
        let net = Mlp::init(dims, &mut rng);
        let target = net.clone();
        let adam = Adam::new(net.params.len());
        DqnAgent {
            net,
            target,
            adam,
            replay: ReplayBuffer::new(capacity),
            alpha,
            gamma,
            epsilon,
            epsilon_min,
            target_interval,
            batch_size,
            grad_clip: Some(10.0),
            updates: 0,
        rng,
        }
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    /// One optimization step on a batch: mean squared TD error against the
    /// frozen target network, Adam update, periodic target copy.
    pub fn train_on_batch(&mut self, batch: &[&Transition]) {
        let mut grads = vec![0.0; self.net.params.len()];
        let n = batch.len() as f64;
        for t in batch {
            let target_q = if t.done {
                t.reward
            } else {
                let next = self.target.forward(&t.next_state);
                t.reward + self.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            let cache = self.net.forward_cached(&t.state);
            let mut out_grad = vec![0.0; self.net.output_dim()];
            out_grad[t.action] = 2.0 * (cache.output()[t.action] - target_q) / n;
            self.net.backward_into(&cache, &out_grad, &mut grads);
        }
        if let Some(max_norm) = self.grad_clip {
            clip_grad_norm(&mut grads, max_norm);
        }
        self.adam.step(&mut self.net.params, &grads, self.alpha);
        self.updates += 1;
        if self.updates % self.target_interval == 0 {
            self.target = self.net.clone();
        }
    }
}

impl SignalController for DqnAgent {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        let q = self.net.forward(&ctx.obs.to_vec());
        let eps = epsilon_at(ctx.step, ctx.episode_steps, self.epsilon, self.epsilon_min);
        let a = epsilon_greedy_excluding(&q, eps, exclude.map(Phase::index), &mut self.rng);
        Phase::from_index(a)
    }

    fn learn(&mut self, t: &Transition) {
        self.replay.push(t.clone());
        if self.replay.len() < self.batch_size {
            return;
        }
        let batch: Vec<Transition> = self
            .replay
            .sample(self.batch_size, &mut self.rng)
            .into_iter()
            .cloned()
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        self.train_on_batch(&refs);
    }
}
