//! Per-vehicle reward weights under the three weight-selection rules.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::sim::{Lane, Vehicle, World, NUM_LANES};

/// Lower clamp for lane-normalized and adaptive weights, keeping weighted
/// counts meaningful when a lane's composition would drive them to zero.
pub const WEIGHT_FLOOR: f64 = 0.1;

/// How per-vehicle reward weights are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "scheme", content = "constant")]
pub enum WeightScheme {
    /// All weights 1; weighted rewards reduce to the base rewards.
    Unweighted,
    /// Fixed per-class weights `[W_hdv, W_bus, W_ldv, W_car]`; the car
    /// weight stays at 1.
    Constant([f64; 4]),
    /// All vehicles in a lane share one weight computed from the lane's
    /// emission ranks: (rank sum - median rank) / (rank_max * N), floored.
    LaneNormalized,
    /// Each vehicle weighted by its current emission rate normalized by the
    /// largest class idle rate, clamped to [0.1, rank_max].
    Adaptive,
}

impl WeightScheme {
    /// Constant scheme from the `[hdv, bus, ldv]` triple, car fixed at 1.
    pub fn constant(triple: [f64; 3]) -> WeightScheme {
        WeightScheme::Constant([triple[0], triple[1], triple[2], 1.0])
    }

    pub fn validate(&self) -> Result<(), String> {
        if let WeightScheme::Constant(w) = self {
            if w.iter().any(|x| *x <= 0.0) {
                return Err("constant weights must be positive".into());
            }
            if (w[3] - 1.0).abs() > 1e-12 {
                return Err("car weight is fixed at 1".into());
            }
        }
        Ok(())
    }
}

/// Weight of a single vehicle under a scheme. `lane` must contain the
/// vehicle for the lane-shared scheme to be meaningful.
pub fn vehicle_weight(scheme: &WeightScheme, vehicle: &Vehicle, lane: &Lane, world: &World) -> f64 {
    match scheme {
        WeightScheme::Unweighted => 1.0,
        WeightScheme::Constant(w) => match vehicle.class {
            crate::sim::VehicleClass::Hdv => w[0],
            crate::sim::VehicleClass::Bus => w[1],
            crate::sim::VehicleClass::Ldv => w[2],
            crate::sim::VehicleClass::Car => w[3],
        },
        WeightScheme::LaneNormalized => lane_normalized_weight(lane, world),
        WeightScheme::Adaptive => {
            let norm = world.params.classes.max_idle_rate();
            let rank_max = world.params.classes.rank_max() as f64;
            (vehicle.co2_rate / norm).clamp(WEIGHT_FLOOR, rank_max)
        }
    }
}

/// Shared weight of all vehicles in one lane: (rank sum - median rank)
/// divided by (rank_max * N), floored at [`WEIGHT_FLOOR`]. Empty lanes get
/// the neutral weight 1.
pub fn lane_normalized_weight(lane: &Lane, world: &World) -> f64 {
    let n = lane.len();
    if n == 0 {
        return 1.0;
    }
    let ranks: Vec<f64> = lane
        .vehicles
        .iter()
        .map(|v| world.params.classes.spec(v.class).emission_rank as f64)
        .collect();
    let total: f64 = ranks.iter().sum();
    let median = median_of(&ranks);
    let rank_max = world.params.classes.rank_max() as f64;
    ((total - median) / (rank_max * n as f64)).max(WEIGHT_FLOOR)
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Weight of every vehicle in the world, keyed by vehicle id. The map is
/// what the weighted rewards consume; the sensitivity oracle perturbs
/// single entries of it.
pub fn assign_weights(world: &World, scheme: &WeightScheme) -> HashMap<u64, f64> {
    let mut map = HashMap::new();
    for j in 0..NUM_LANES {
        for lane in [world.lane_in(j), world.lane_out(j)] {
            for v in &lane.vehicles {
                map.insert(v.id, vehicle_weight(scheme, v, lane, world));
            }
        }
    }
    map
}
