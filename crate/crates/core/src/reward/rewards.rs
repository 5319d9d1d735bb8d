//! Queue, waiting-time, and pressure rewards, unweighted and weighted.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::weights::{assign_weights, WeightScheme};
use crate::sim::{World, NUM_LANES};

/// Which scalar reward the controller optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Queue,
    Waiting,
    Pressure,
}

impl RewardKind {
    pub const ALL: [RewardKind; 3] = [RewardKind::Queue, RewardKind::Waiting, RewardKind::Pressure];

    pub fn name(self) -> &'static str {
        match self {
            RewardKind::Queue => "queue",
            RewardKind::Waiting => "waiting",
            RewardKind::Pressure => "pressure",
        }
    }
}

/// Sign convention of the waiting reward.
///
/// `Improvement` rewards reductions in accumulated waiting
/// (0.01 * sum(T_prev - T_now)); `RawPaper` keeps the opposite sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaitingSign {
    #[default]
    Improvement,
    RawPaper,
}

/// Unweighted reward. `prev` is the world one control step earlier; only
/// the waiting reward reads it.
pub fn base_reward(kind: RewardKind, world: &World, prev: &World) -> f64 {
    base_reward_signed(kind, world, prev, WaitingSign::Improvement)
}

pub fn base_reward_signed(
    kind: RewardKind,
    world: &World,
    prev: &World,
    sign: WaitingSign,
) -> f64 {
    match kind {
        RewardKind::Queue => {
            let total: usize = (0..NUM_LANES).map(|j| world.halting_count(j)).sum();
            -((total * total) as f64)
        }
        RewardKind::Waiting => {
            let mut delta = 0.0;
            for j in 0..NUM_LANES {
                let t_now: f64 = world.lane_in(j).vehicles.iter().map(|v| v.wait_accum).sum();
                let t_prev: f64 = prev.lane_in(j).vehicles.iter().map(|v| v.wait_accum).sum();
                delta += match sign {
                    WaitingSign::Improvement => t_prev - t_now,
                    WaitingSign::RawPaper => t_now - t_prev,
                };
            }
            0.01 * delta
        }
        RewardKind::Pressure => {
            let inc: usize = (0..NUM_LANES).map(|j| world.lane_in(j).len()).sum();
            let out: usize = (0..NUM_LANES).map(|j| world.lane_out(j).len()).sum();
            -((inc as f64) - (out as f64)).abs()
        }
    }
}

/// Weighted reward under a weight scheme; with `Unweighted` this equals
/// [`base_reward`] exactly.
pub fn weighted_reward(
    kind: RewardKind,
    scheme: &WeightScheme,
    world: &World,
    prev: &World,
) -> f64 {
    weighted_reward_signed(kind, scheme, world, prev, WaitingSign::Improvement)
}

pub fn weighted_reward_signed(
    kind: RewardKind,
    scheme: &WeightScheme,
    world: &World,
    prev: &World,
    sign: WaitingSign,
) -> f64 {
    let weights = assign_weights(world, scheme);
    let prev_weights = assign_weights(prev, scheme);
    weighted_reward_with(kind, world, &weights, prev, &prev_weights, sign)
}

/// Weighted reward with explicit per-vehicle weight maps. This is the form
/// the finite-difference sensitivity oracle perturbs.
pub fn weighted_reward_with(
    kind: RewardKind,
    world: &World,
    weights: &HashMap<u64, f64>,
    prev: &World,
    prev_weights: &HashMap<u64, f64>,
    sign: WaitingSign,
) -> f64 {
    let wt = |id: u64, map: &HashMap<u64, f64>| map.get(&id).copied().unwrap_or(1.0);
    match kind {
        RewardKind::Queue => {
            let halt = world.params.halt_speed;
            let mut total = 0.0;
            for j in 0..NUM_LANES {
                for v in &world.lane_in(j).vehicles {
                    if v.speed < halt {
                        total += wt(v.id, weights);
                    }
                }
            }
            -(total * total)
        }
        RewardKind::Waiting => {
            let mut delta = 0.0;
            for j in 0..NUM_LANES {
                let t_now: f64 = world
                    .lane_in(j)
                    .vehicles
                    .iter()
                    .map(|v| wt(v.id, weights) * v.wait_accum)
                    .sum();
                let t_prev: f64 = prev
                    .lane_in(j)
                    .vehicles
                    .iter()
                    .map(|v| wt(v.id, prev_weights) * v.wait_accum)
                    .sum();
                delta += match sign {
                    WaitingSign::Improvement => t_prev - t_now,
                    WaitingSign::RawPaper => t_now - t_prev,
                };
            }
            0.01 * delta
        }
        RewardKind::Pressure => {
            let mut inc = 0.0;
            let mut out = 0.0;
            for j in 0..NUM_LANES {
                for v in &world.lane_in(j).vehicles {
                    inc += wt(v.id, weights);
                }
                for v in &world.lane_out(j).vehicles {
                    out += wt(v.id, weights);
                }
            }
            -(inc - out).abs()
        }
    }
}

/// Discounted return of a reward sequence: sum of gamma^t * r_t.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&gamma));
    let mut total = 0.0;
    let mut factor = 1.0;
    for r in rewards {
        total += factor * r;
        factor *= gamma;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{SimParams, Turn, VehicleClass, World};

    fn empty_world() -> World {
        World::new(SimParams::default(), 0)
    }

    #[test]
    fn queue_reward_squares_total_halting() {
        // Halting counts [2, 0, 1, 0, ...] -> r_q = -(3)^2 = -9.
        let mut w = empty_world();
        w.place_incoming(0, VehicleClass::Car, Turn::Through, 150.0, 0.0);
        w.place_incoming(0, VehicleClass::Car, Turn::Through, 140.0, 0.0);
        w.place_incoming(2, VehicleClass::Car, Turn::Through, 150.0, 0.0);
        assert_eq!(base_reward(RewardKind::Queue, &w, &w), -9.0);
    }

    #[test]
    fn empty_network_rewards_are_zero() {
        let w = empty_world();
        for kind in RewardKind::ALL {
            assert_eq!(base_reward(kind, &w, &w), 0.0);
        }
    }

    #[test]
    fn pressure_reward_counts_in_minus_out() {
        // 5 incoming, 2 outgoing -> r_p = -3.
        let mut w = empty_world();
        for i in 0..5 {
            w.place_incoming(0, VehicleClass::Car, Turn::Through, 150.0 - 10.0 * i as f64, 0.0);
        }
        w.place_outgoing(0, VehicleClass::Car, 50.0, 10.0);
        w.place_outgoing(3, VehicleClass::Car, 20.0, 10.0);
        assert_eq!(base_reward(RewardKind::Pressure, &w, &w), -3.0);
    }

    #[test]
    fn pressure_is_nonpositive_and_zero_on_balance() {
        let mut w = empty_world();
        w.place_incoming(0, VehicleClass::Car, Turn::Through, 100.0, 5.0);
        w.place_outgoing(0, VehicleClass::Car, 40.0, 10.0);
        assert_eq!(base_reward(RewardKind::Pressure, &w, &w), 0.0);
    }

    #[test]
    fn weighted_queue_single_hdv() {
        // One halting HDV with weight 3: r_wq = -(3)^2 = -9.
        let mut w = empty_world();
        w.place_incoming(0, VehicleClass::Hdv, Turn::Through, 150.0, 0.0);
        let scheme = WeightScheme::constant([3.0, 2.0, 1.05]);
        assert_eq!(weighted_reward(RewardKind::Queue, &scheme, &w, &w), -9.0);
    }

    #[test]
    fn weighted_waiting_hdv_five_more_seconds() {
        // HDV (weight 3) accumulates 5 more waiting seconds:
        // improvement sign gives -0.01 * 15 = -0.15.
        let mut prev = empty_world();
        let id = prev.place_incoming(0, VehicleClass::Hdv, Turn::Through, 150.0, 0.0);
        let mut now = prev.clone();
        now.incoming[0].vehicles.iter_mut().find(|v| v.id == id).unwrap().wait_accum = 5.0;
        let scheme = WeightScheme::constant([3.0, 2.0, 1.05]);
        let r = weighted_reward(RewardKind::Waiting, &scheme, &now, &prev);
        assert!((r - (-0.15)).abs() < 1e-12);
        let raw = weighted_reward_signed(RewardKind::Waiting, &scheme, &now, &prev, WaitingSign::RawPaper);
        assert!((raw - 0.15).abs() < 1e-12);
    }

    #[test]
    fn unweighted_scheme_reduces_to_base_exactly() {
        let mut prev = empty_world();
        for (lane, pos, speed) in [(0, 150.0, 0.0), (1, 120.0, 3.0), (4, 90.0, 0.5)] {
            prev.place_incoming(lane, VehicleClass::Bus, Turn::Through, pos, speed);
        }
        prev.place_outgoing(2, VehicleClass::Car, 30.0, 12.0);
        let mut now = prev.clone();
        for lane in now.incoming.iter_mut() {
            for v in lane.vehicles.iter_mut() {
                v.wait_accum += 2.0;
            }
        }
        for kind in RewardKind::ALL {
            let base = base_reward(kind, &now, &prev);
            let weighted = weighted_reward(kind, &WeightScheme::Unweighted, &now, &prev);
            assert_eq!(base, weighted, "kind {:?}", kind);
        }
    }

    #[test]
    fn discounted_return_cases() {
        assert_eq!(discounted_return(&[0.0; 10], 0.9), 0.0);
        assert_eq!(discounted_return(&[1.0, 2.0], 0.5), 2.0);
        // Geometric series of ones approaches 1 / (1 - gamma).
        let ones = vec![1.0; 4000];
        let total = discounted_return(&ones, 0.99);
        assert!((total - 100.0).abs() < 1e-9, "got {total}");
    }
}
