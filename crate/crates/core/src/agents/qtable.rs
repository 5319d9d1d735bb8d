//! Tabular Q-learning over a coarse discretization of the observation.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use super::{epsilon_at, epsilon_greedy_excluding};
use crate::control::{ControlContext, SignalController, Transition};
use crate::sim::Phase;

/// Number of bins per aggregated observation component.
const BINS: u32 = 4;

fn bin4(x: f64) -> u32 {
    ((x * BINS as f64) as u32).min(BINS - 1)
}

/// Discrete state key for the flat state layout `[phase(4), D(8), Q(8), C(8)]`:
/// the phase index (4 values) crossed with per-approach density and queue
/// bins (4 levels each over 4 approaches). Class components are excluded to
/// keep the table tractable.
pub fn discretize_state(state: &[f64]) -> u32 {
    let phase = {
        let mut p = 3;
        for i in 0..3 {
            if state[i] > 0.5 {
                p = i;
                break;
            }
        }
        p as u32
    };
    let mut key = phase;
    let mut mult = 4u32;
    for source in [4usize, 12] {
        // density block then queue block
        for approach in 0..4 {
            let mean = 0.5 * (state[source + 2 * approach] + state[source + 2 * approach + 1]);
            key += bin4(mean) * mult;
            mult *= BINS;
        }
    }
    key
}

/// One Q-learning backup: `Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))`.
/// Unseen keys read as zero.
pub fn qt_update(
    table: &mut HashMap<u32, [f64; 3]>,
    s: u32,
    action: usize,
    reward: f64,
    s_next: u32,
    done: bool,
    alpha: f64,
    gamma: f64,
) {
    let max_next = if done {
        0.0
    } else {
        table
            .get(&s_next)
            .map(|q| q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .unwrap_or(0.0)
    };
    let entry = table.entry(s).or_insert([0.0; 3]);
    entry[action] += alpha * (reward + gamma * max_next - entry[action]);
}

/// Epsilon-greedy tabular Q-learning controller.
#[derive(Debug, Clone)]
pub struct QtAgent {
    pub table: HashMap<u32, [f64; 3]>,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_min: f64,
    rng: ChaCha8Rng,
}

impl QtAgent {
    pub fn new(alpha: f64, gamma: f64, epsilon: f64, epsilon_min: f64, rng: ChaCha8Rng) -> Self {
        QtAgent { table: HashMap::new(), alpha, gamma, epsilon, epsilon_min, rng }
    }

    pub fn q_values(&self, key: u32) -> [f64; 3] {
        self.table.get(&key).copied().unwrap_or([0.0; 3])
    }
}

impl SignalController for QtAgent {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        let key = discretize_state(&ctx.obs.to_vec());
        let q = self.q_values(key);
        let eps = epsilon_at(ctx.step, ctx.episode_steps, self.epsilon, self.epsilon_min);
        let a = epsilon_greedy_excluding(&q, eps, exclude.map(Phase::index), &mut self.rng);
        Phase::from_index(a)
    }

    fn learn(&mut self, t: &Transition) {
        qt_update(
            &mut self.table,
            discretize_state(&t.state),
            t.action,
            t.reward,
            discretize_state(&t.next_state),
            t.done,
            self.alpha,
            self.gamma,
        );
    }
}
