//! Webster's method: periodically recompute cycle length and green splits
//! from measured stop-line flows, then run the resulting fixed plan.

use super::{phase_lane_sets, ControlContext, SignalController};
use crate::sim::{Phase, NUM_LANES};

/// Raw Webster timings from per-phase flow ratios.
///
/// `y[i] = q_i / s_i` are the critical flow ratios; their sum is clamped at
/// 0.95 to guard oversaturation. The cycle is `(1.5 L + 5) / (1 - Y)`
/// clamped to [30 s, 240 s]; greens split the effective cycle proportionally
/// to `y`.
pub fn webster_timings(y: &[f64; 3], lost_time_s: f64) -> (f64, [f64; 3]) {
    let y_sum: f64 = y.iter().sum::<f64>().min(0.95);
    let cycle = ((1.5 * lost_time_s + 5.0) / (1.0 - y_sum)).clamp(30.0, 240.0);
    let effective = cycle - lost_time_s;
    let mut greens = [0.0; 3];
    if y_sum > 0.0 {
        for i in 0..3 {
            greens[i] = y[i].min(0.95) / y_sum * effective;
        }
    } else {
        for g in greens.iter_mut() {
            *g = effective / 3.0;
        }
    }
    (cycle, greens)
}

/// Adaptive fixed-plan controller: collects flows for a window, applies
/// Webster's formulas, then runs the computed cycle for the next window.
/// Before the first full window it behaves as the uniform plan.
#[derive(Debug, Clone)]
pub struct WebsterController {
    /// Window length in control steps (600 s at 5 s steps).
    pub window_steps: u64,
    /// Saturation flow per lane, veh/s.
    pub saturation_flow: f64,
    /// Total lost time per cycle, seconds (one transition per phase).
    pub lost_time_s: f64,
    plan: [u32; 3],
    fallback: [u32; 3],
    window_start_crossings: [u64; NUM_LANES],
    last_recompute: u64,
}

impl WebsterController {
    pub fn new(window_steps: u64, fallback_plan: [u32; 3]) -> Self {
        WebsterController {
            window_steps,
            saturation_flow: 0.5,
            lost_time_s: 15.0,
            plan: fallback_plan,
            fallback: fallback_plan,
            window_start_crossings: [0; NUM_LANES],
            last_recompute: 0,
        }
    }
}

impl Default for WebsterController {
    fn default() -> Self {
        WebsterController::new(120, [42, 42, 10])
    }
}

impl SignalController for WebsterController {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        if ctx.step > 0
            && ctx.step % self.window_steps == 0
            && ctx.step != self.last_recompute
        {
            self.recompute(ctx);
            self.last_recompute = ctx.step;
            self.window_start_crossings = ctx.crossings;
        }
        let mut next = if ctx.elapsed_steps >= self.plan[ctx.phase.index()] {
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

impl WebsterController {
    fn recompute(&mut self, ctx: &ControlContext<'_>) {
        // Flow per phase: the critical (largest) lane flow among its lanes.
        let seconds = (self.window_steps * u64::from(ctx.step_s)) as f64;
        let mut y = [0.0f64; 3];
        for phase in Phase::ALL {
            let (ins, _) = phase_lane_sets(phase);
            let q = ins
                .iter()
                .map(|&li| (ctx.crossings[li] - self.window_start_crossings[li]) as f64 / seconds)
                .fold(0.0, f64::max);
            y[phase.index()] = q / self.saturation_flow;
        }
        if y.iter().all(|v| *v == 0.0) {
            self.plan = self.fallback;
            return;
        }
        let (_, greens) = webster_timings(&y, self.lost_time_s);
        for i in 0..3 {
            let steps = (greens[i] / f64::from(ctx.step_s)).round() as u32;
            self.plan[i] = steps.clamp(ctx.g_min_steps, ctx.g_max_steps);
        }
    }
}
