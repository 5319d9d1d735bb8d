//! Controller interface and the four non-learning baselines.

pub mod max_pressure;
pub mod sotl;
pub mod uniform;
pub mod webster;

use std::collections::BTreeSet;

use crate::reward::Observation;
use crate::sim::{destination, lane_index, lane_of_index, phase_of_lane, Phase, Turn, NUM_LANES};

pub use max_pressure::MaxPressureController;
pub use sotl::SotlController;
pub use uniform::UniformController;
pub use webster::{webster_timings, WebsterController};

/// Everything a controller may look at when choosing the next green phase.
#[derive(Debug, Clone)]
pub struct ControlContext<'a> {
    /// Control step index (decisions happen once per step).
    pub step: u64,
    /// Total steps in the episode; lets agents schedule exploration decay.
    pub episode_steps: u64,
    /// The current (or, during clearance, upcoming) green phase.
    pub phase: Phase,
    /// Control steps of green served in the current green period.
    pub elapsed_steps: u32,
    pub g_min_steps: u32,
    pub g_max_steps: u32,
    /// Seconds per control step.
    pub step_s: u32,
    pub obs: &'a Observation,
    pub in_counts: [usize; NUM_LANES],
    pub out_counts: [usize; NUM_LANES],
    pub halting: [usize; NUM_LANES],
    /// Cumulative stop-line crossings per incoming lane.
    pub crossings: [u64; NUM_LANES],
    /// Weighted lane totals under the run's weight scheme.
    pub weighted_in: [f64; NUM_LANES],
    pub weighted_out: [f64; NUM_LANES],
}

/// One learning sample handed to the controller after each control step.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Action actually executed from `next_state`; on-policy learners
    /// bootstrap on it.
    pub next_action: usize,
    pub done: bool,
}

/// A traffic signal controller: picks the next green phase each control
/// step. When `exclude` is set the returned phase must differ from it (the
/// runner forces this when a green hits its maximum duration). Controllers
/// own any randomness they need, so identical seeds give identical runs.
pub trait SignalController {
    fn decide(&mut self, ctx: &ControlContext<'_>, exclude: Option<Phase>) -> Phase;

    /// Learning hook; non-learning controllers ignore it.
    fn learn(&mut self, _transition: &Transition) {}

    /// Called once after the final control step.
    fn finish_episode(&mut self) {}
}

/// Incoming and outgoing lane sets of a green phase, derived from the
/// movement table: a phase's incoming lanes are those it serves, its
/// outgoing lanes the distinct destinations of those movements.
pub fn phase_lane_sets(phase: Phase) -> (Vec<usize>, Vec<usize>) {
    let mut ins = Vec::new();
    let mut outs = BTreeSet::new();
    for li in 0..NUM_LANES {
        if phase_of_lane(li) != phase {
            continue;
        }
        ins.push(li);
        let (approach, lane_no) = lane_of_index(li);
        let turns: &[Turn] =
            if lane_no == 0 { &[Turn::Through, Turn::Right] } else { &[Turn::Left] };
        for turn in turns {
            let (to, out_idx) = destination(approach, *turn);
            outs.insert(lane_index(to, out_idx));
        }
    }
    (ins, outs.into_iter().collect())
}

#[cfg(test)]
pub(crate) fn empty_context(obs: &Observation) -> ControlContext<'_> {
    ControlContext {
        step: 0,
        episode_steps: 1000,
        phase: Phase::Ns,
        elapsed_steps: 0,
        g_min_steps: 10,
        g_max_steps: 50,
        step_s: 5,
        obs,
        in_counts: [0; NUM_LANES],
        out_counts: [0; NUM_LANES],
        halting: [0; NUM_LANES],
        crossings: [0; NUM_LANES],
        weighted_in: [0.0; NUM_LANES],
        weighted_out: [0.0; NUM_LANES],
    }
}

#[cfg(test)]
pub(crate) fn blank_observation() -> Observation {
    Observation {
        phase_bits: [1.0, 0.0, 0.0, 0.0],
        density: [0.0; NUM_LANES],
        queue: [0.0; NUM_LANES],
        avg_class: [0.0; NUM_LANES],
    }
}
