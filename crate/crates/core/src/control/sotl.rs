//! Self-organizing traffic lights: red phases accumulate vehicle-time
//! pressure and take the green once a threshold is crossed.

use super::{phase_lane_sets, ControlContext, SignalController};
use crate::sim::Phase;

/// Threshold rule: every control step each red phase's integrator grows by
/// its approaching-vehicle count; when the largest integrator reaches
/// `theta` and the current green has served at least `mu` steps, that phase
/// takes over and its integrator resets.
#[derive(Debug, Clone)]
pub struct SotlController {
    /// Switch threshold in vehicle-steps.
    pub theta: f64,
    /// Minimum green before a switch, in control steps; defaults to the
    /// scenario minimum green when `None`.
    pub mu_steps: Option<u32>,
    kappa: [f64; 3],
    last_integrated_step: Option<u64>,
}

impl SotlController {
    pub fn new(theta: f64, mu_steps: Option<u32>) -> Self {
        SotlController { theta, mu_steps, kappa: [0.0; 3], last_integrated_step: None }
    }

    pub fn kappa(&self) -> [f64; 3] {
        self.kappa
    }

    fn integrate(&mut self, ctx: &ControlContext<'_>) {
        for phase in Phase::ALL {
            if phase == ctx.phase {
                continue;
            }
            let (ins, _) = phase_lane_sets(phase);
            let approaching: usize = ins.iter().map(|&li| ctx.in_counts[li]).sum();
            self.kappa[phase.index()] += approaching as f64;
        }
    }

    fn largest(&self, skip: Option<Phase>) -> (Phase, f64) {
        let mut best = None;
        for phase in Phase::ALL {
            if Some(phase) == skip {
                continue;
            }
            let k = self.kappa[phase.index()];
            if best.map_or(true, |(_, bk)| k > bk) {
                best = Some((phase, k));
            }
        }
        best.expect("at least two phases remain")
    }
}

impl Default for SotlController {
    fn default() -> Self {
        SotlController::new(50.0, None)
    }
}

impl SignalController for SotlController {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        // Integrate once per control step even if re-queried for exclusion.
        if self.last_integrated_step != Some(ctx.step) {
            self.integrate(ctx);
            self.last_integrated_step = Some(ctx.step);
        }
        if let Some(ex) = exclude {
            let (phase, _) = self.largest(Some(ex));
            self.kappa[phase.index()] = 0.0;
            return phase;
        }
        let mu = self.mu_steps.unwrap_or(ctx.g_min_steps);
        let (candidate, k) = self.largest(Some(ctx.phase));
        if k >= self.theta && ctx.elapsed_steps >= mu {
            self.kappa[candidate.index()] = 0.0;
            return candidate;
        }
        ctx.phase
    }
}
