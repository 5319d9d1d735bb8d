//! Sensitivity of weighted rewards to a single vehicle's weight:
//! closed forms and the finite-difference oracle that arbitrates them.
//!
//! Both routes work on the as-published waiting sign, since the sensitivity
//! is defined on the weighted reward in its original form. The queue closed
//! form is kept as published (`2 w_i^2 / sum`) even though direct
//! differentiation yields `2 w_i / sum`; the finite-difference oracle
//! exposes the discrepancy rather than hiding it.

use thiserror::Error;

use super::rewards::{weighted_reward_with, RewardKind, WaitingSign};
use super::weights::{assign_weights, WeightScheme};
use crate::sim::{World, NUM_LANES};

#[derive(Debug, Error, PartialEq)]
pub enum SensitivityError {
    #[error("sensitivity undefined: zero denominator")]
    Undefined,
    #[error("vehicle {0} not present in the world")]
    NoSuchVehicle(u64),
}

/// Closed-form sensitivity for vehicle `id` under `scheme`.
pub fn sensitivity_closed(
    kind: RewardKind,
    id: u64,
    world: &World,
    prev: &World,
    scheme: &WeightScheme,
) -> Result<f64, SensitivityError> {
    let weights = assign_weights(world, scheme);
    let w_i = *weights.get(&id).ok_or(SensitivityError::NoSuchVehicle(id))?;
    match kind {
        RewardKind::Queue => {
            let halt = world.params.halt_speed;
            let mut total = 0.0;
            for j in 0..NUM_LANES {
                for v in &world.lane_in(j).vehicles {
                    if v.speed < halt {
                        total += weights[&v.id];
                    }
                }
            }
            if total == 0.0 {
                return Err(SensitivityError::Undefined);
            }
            Ok(2.0 * w_i * w_i / total)
        }
        RewardKind::Waiting => {
            let prev_weights = assign_weights(prev, scheme);
            let mut denom = 0.0;
            for j in 0..NUM_LANES {
                let t_now: f64 = world
                    .lane_in(j)
                    .vehicles
                    .iter()
                    .map(|v| weights.get(&v.id).copied().unwrap_or(1.0) * v.wait_accum)
                    .sum();
                let t_prev: f64 = prev
                    .lane_in(j)
                    .vehicles
                    .iter()
                    .map(|v| prev_weights.get(&v.id).copied().unwrap_or(1.0) * v.wait_accum)
                    .sum();
                denom += t_now - t_prev;
            }
            if denom == 0.0 {
                return Err(SensitivityError::Undefined);
            }
            let wait_now = find_wait(world, id).ok_or(SensitivityError::NoSuchVehicle(id))?;
            // Indicator is zero only if the vehicle was moving a step earlier.
            let was_moving =
                find_speed(prev, id).map(|s| s >= prev.params.halt_speed).unwrap_or(true);
            let indicator = if was_moving { 0.0 } else { 1.0 };
            Ok(w_i * (wait_now - wait_now * indicator) / denom)
        }
        RewardKind::Pressure => {
            let mut inc = 0.0;
            let mut out = 0.0;
            for j in 0..NUM_LANES {
                for v in &world.lane_in(j).vehicles {
                    inc += weights[&v.id];
                }
                for v in &world.lane_out(j).vehicles {
                    out += weights[&v.id];
                }
            }
            let denom = (inc - out).abs();
            if denom == 0.0 {
                return Err(SensitivityError::Undefined);
            }
            Ok(w_i / denom)
        }
    }
}

/// Finite-difference sensitivity: central difference of the weighted reward
/// with respect to vehicle `id`'s weight, scaled by `w_i / R_w`.
pub fn sensitivity_fd(
    kind: RewardKind,
    scheme: &WeightScheme,
    id: u64,
    world: &World,
    prev: &World,
    h: f64,
) -> Result<f64, SensitivityError> {
    assert!(h > 0.0);
    let mut weights = assign_weights(world, scheme);
    let mut prev_weights = assign_weights(prev, scheme);
    let w_i = *weights.get(&id).ok_or(SensitivityError::NoSuchVehicle(id))?;

    let sign = WaitingSign::RawPaper;
    let r0 = weighted_reward_with(kind, world, &weights, prev, &prev_weights, sign);
    if r0 == 0.0 {
        return Err(SensitivityError::Undefined);
    }

    let mut eval = |w: f64, weights: &mut std::collections::HashMap<u64, f64>,
                    prev_weights: &mut std::collections::HashMap<u64, f64>| {
        weights.insert(id, w);
        if prev_weights.contains_key(&id) {
            prev_weights.insert(id, w);
        }
        weighted_reward_with(kind, world, weights, prev, prev_weights, sign)
    };
    let r_plus = eval(w_i + h, &mut weights, &mut prev_weights);
    let r_minus = eval(w_i - h, &mut weights, &mut prev_weights);

    let derivative = (r_plus - r_minus) / (2.0 * h);
    Ok(derivative * w_i / r0)
}

fn find_wait(world: &World, id: u64) -> Option<f64> {
    world
        .incoming
        .iter()
        .chain(world.outgoing.iter())
        .flat_map(|l| l.vehicles.iter())
        .find(|v| v.id == id)
        .map(|v| v.wait_accum)
}

fn find_speed(world: &World, id: u64) -> Option<f64> {
    world
        .incoming
        .iter()
        .chain(world.outgoing.iter())
        .flat_map(|l| l.vehicles.iter())
        .find(|v| v.id == id)
        .map(|v| v.speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{SimParams, Turn, VehicleClass, World};

    fn pressure_world() -> (World, u64) {
        // 5 incoming, 2 outgoing, all weights 1.
        let mut w = World::new(SimParams::default(), 0);
        let mut first = 0;
        for i in 0..5 {
            let id =
                w.place_incoming(0, VehicleClass::Car, Turn::Through, 150.0 - 10.0 * i as f64, 0.0);
            if i == 0 {
                first = id;
            }
        }
        w.place_outgoing(0, VehicleClass::Car, 50.0, 10.0);
        w.place_outgoing(3, VehicleClass::Car, 20.0, 10.0);
        (w, first)
    }

    #[test]
    fn pressure_closed_form_is_weight_over_gap() {
        let (w, id) = pressure_world();
        let got =
            sensitivity_closed(RewardKind::Pressure, id, &w, &w, &WeightScheme::Unweighted).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pressure_fd_matches_closed() {
        let (w, id) = pressure_world();
        let fd =
            sensitivity_fd(RewardKind::Pressure, &WeightScheme::Unweighted, id, &w, &w, 1e-5)
                .unwrap();
        assert!((fd - 1.0 / 3.0).abs() < 1e-6, "fd {fd}");
    }

    #[test]
    fn queue_zero_denominator_is_undefined() {
        // One moving vehicle: no halting vehicles at all.
        let mut w = World::new(SimParams::default(), 0);
        let id = w.place_incoming(0, VehicleClass::Car, Turn::Through, 100.0, 10.0);
        assert_eq!(
            sensitivity_closed(RewardKind::Queue, id, &w, &w, &WeightScheme::Unweighted),
            Err(SensitivityError::Undefined)
        );
        assert_eq!(
            sensitivity_fd(RewardKind::Queue, &WeightScheme::Unweighted, id, &w, &w, 1e-5),
            Err(SensitivityError::Undefined)
        );
    }

    #[test]
    fn queue_closed_uses_published_quadratic_form() {
        // w_i = 2, weighted halting sum 8: published form 2 * 4 / 8 = 1.0,
        // while the finite difference of the actual reward gives 0.5.
        let mut w = World::new(SimParams::default(), 0);
        let hdv = w.place_incoming(0, VehicleClass::Hdv, Turn::Through, 150.0, 0.0);
        for i in 0..6 {
            w.place_incoming(2, VehicleClass::Car, Turn::Through, 150.0 - 8.0 * i as f64, 0.0);
        }
        let scheme = WeightScheme::constant([2.0, 2.0, 2.0]);
        let closed = sensitivity_closed(RewardKind::Queue, hdv, &w, &w, &scheme).unwrap();
        assert!((closed - 1.0).abs() < 1e-12, "closed {closed}");
        let fd = sensitivity_fd(RewardKind::Queue, &scheme, hdv, &w, &w, 1e-5).unwrap();
        assert!((fd - 0.5).abs() < 1e-6, "fd {fd}");
    }

    #[test]
    fn fd_requires_nonzero_reward() {
        let mut w = World::new(SimParams::default(), 0);
        let id = w.place_incoming(0, VehicleClass::Car, Turn::Through, 100.0, 10.0);
        let out = w.place_outgoing(0, VehicleClass::Car, 50.0, 10.0);
        let _ = out;
        // Balanced pressure: reward zero.
        assert_eq!(
            sensitivity_fd(RewardKind::Pressure, &WeightScheme::Unweighted, id, &w, &w, 1e-5),
            Err(SensitivityError::Undefined)
        );
    }
}
