//! Max-pressure controller: greedily serve the phase with the largest
//! incoming-minus-outgoing vehicle count over its movements.

use super::{phase_lane_sets, ControlContext, SignalController};
use crate::sim::Phase;

/// Memoryless pressure-relief controller. With `weighted` set it uses the
/// run's weighted lane totals instead of raw counts.
#[derive(Debug, Clone, Default)]
pub struct MaxPressureController {
    pub weighted: bool,
}

impl MaxPressureController {
    pub fn pressure(&self, ctx: &ControlContext<'_>, phase: Phase) -> f64 {
        let (ins, outs) = phase_lane_sets(phase);
        let sum = |lanes: &[usize], counts: &[usize; 8], weighted: &[f64; 8]| -> f64 {
            if self.weighted {
                lanes.iter().map(|&li| weighted[li]).sum()
            } else {
                lanes.iter().map(|&li| counts[li] as f64).sum()
            }
        };
        sum(&ins, &ctx.in_counts, &ctx.weighted_in) - sum(&outs, &ctx.out_counts, &ctx.weighted_out)
    }
}

impl SignalController for MaxPressureController {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase {
        let mut best: Option<(Phase, f64)> = None;
        for phase in Phase::ALL {
            if Some(phase) == exclude {
                continue;
            }
            let p = self.pressure(ctx, phase);
            // Strict comparison keeps ties on the earliest phase in order.
            if best.map_or(true, |(_, bp)| p > bp) {
                best = Some((phase, p));
            }
        }
        best.expect("at least two phases remain").0
    }
}
