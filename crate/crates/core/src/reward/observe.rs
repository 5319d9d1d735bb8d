//! The agent-facing observation vector: phase bits plus per-lane density,
//! queue fraction, and average emission class.

use crate::sim::{SignalMode, World, NUM_LANES};

/// Dimension of the flattened state vector: 4 phase bits + 3 reals per
/// incoming lane.
pub const STATE_DIM: usize = 4 + 3 * NUM_LANES;

/// Intersection state at a control step. All real components lie in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// One-hot over the three greens, with the fourth bit set during
    /// yellow/all-red clearance.
    pub phase_bits: [f64; 4],
    /// Per incoming lane: vehicle count over lane capacity.
    pub density: [f64; NUM_LANES],
    /// Per incoming lane: fraction of vehicles in the halting state.
    pub queue: [f64; NUM_LANES],
    /// Per incoming lane: mean emission rank over the maximum rank.
    pub avg_class: [f64; NUM_LANES],
}

impl Observation {
    /// Flattens to `[phase, density, queue, avg_class]`, `STATE_DIM` long.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(STATE_DIM);
        v.extend_from_slice(&self.phase_bits);
        v.extend_from_slice(&self.density);
        v.extend_from_slice(&self.queue);
        v.extend_from_slice(&self.avg_class);
        v
    }

    /// 0..=2 for the green phases, 3 for the clearance encoding.
    pub fn phase_index(&self) -> usize {
        for (i, b) in self.phase_bits[..3].iter().enumerate() {
            if *b > 0.5 {
                return i;
            }
        }
        3
    }
}

/// Builds the observation for the current world state.
///
/// Density is the lane count over the capacity `lane_length / G` where G is
/// the average vehicle length plus the minimum gap; the queue component is
/// the halting fraction of the lane's vehicles; the class component is the
/// mean emission rank normalized by the maximum rank. Empty lanes observe
/// zero in all three.
pub fn observe(world: &World) -> Observation {
    let capacity = world.params.lane_capacity();
    let rank_max = world.params.classes.rank_max() as f64;

    let mut density = [0.0; NUM_LANES];
    let mut queue = [0.0; NUM_LANES];
    let mut avg_class = [0.0; NUM_LANES];
    for j in 0..NUM_LANES {
        let lane = world.lane_in(j);
        let n = lane.len();
        if n == 0 {
            continue;
        }
        density[j] = (n as f64 / capacity).min(1.0);
        queue[j] = world.halting_count(j) as f64 / n as f64;
        let rank_sum: u32 = lane
            .vehicles
            .iter()
            .map(|v| world.params.classes.spec(v.class).emission_rank as u32)
            .sum();
        avg_class[j] = (rank_sum as f64 / (n as f64 * rank_max)).min(1.0);
    }

    let mut phase_bits = [0.0; 4];
    match world.signal.mode() {
        SignalMode::Green(p) => phase_bits[p.index()] = 1.0,
        SignalMode::Yellow { .. } | SignalMode::AllRed { .. } => phase_bits[3] = 1.0,
    }

    Observation { phase_bits, density, queue, avg_class }
}
