//! Fixed-time controller: equal-duration greens cycled in a fixed order.

use super::{ControlContext, SignalController};
use crate::sim::Phase;

/// Cycles NS -> EW -> NE with a fixed green duration per phase (in control
/// steps). The benchmark plan holds NS and EW for 42 steps and gives the
/// protected-turn phase the minimum green.
#[derive(Debug, Clone)]
pub struct UniformController {
    pub durations: [u32; 3],
}

impl UniformController {
    pub fn new(ns_ew_steps: u32, ne_steps: u32) -> Self {
        UniformController { durations: [ns_ew_steps, ns_ew_steps, ne_steps] }
    }
}

impl Default for UniformController {
    fn default() -> Self {
        UniformController::new(42, 10)
    }
}

impl SignalController for UniformController {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        let mut next = if ctx.elapsed_steps >= self.durations[ctx.phase.index()] {
            ctx.phase.next_in_cycle()
        } else {
            ctx.phase
        };
        if Some(next) == exclude {
            next = next.next_in_cycle();
        }
        next
    }
}
