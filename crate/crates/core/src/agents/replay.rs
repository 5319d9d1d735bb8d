//! Fixed-capacity experience replay with uniform sampling.

use rand::Rng;

use crate::control::Transition;

/// Ring buffer of transitions; once full, new entries overwrite the oldest.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    write: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer { capacity, items: Vec::with_capacity(capacity.min(4096)), write: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.write] = t;
            self.write = (self.write + 1) % self.capacity;
        }
    }

    /// Uniform sample of `n` stored transitions (with replacement).
    pub fn sample<'a, R: Rng>(&'a self, n: usize, rng: &mut R) -> Vec<&'a Transition> {
        assert!(!self.items.is_empty());
        (0..n).map(|_| &self.items[rng.gen_range(0..self.items.len())]).collect()
    }
}
