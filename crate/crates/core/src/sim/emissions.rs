//! Per-vehicle CO2 accounting.

use super::types::ClassSpec;

/// Instantaneous emission rate in g CO2/s: idling floor, a speed term, and a
/// positive-acceleration term. Braking does not emit beyond the speed term.
pub fn emission_rate(spec: &ClassSpec, speed: f64, accel: f64) -> f64 {
    spec.idle_rate + spec.speed_coeff * speed + spec.accel_coeff * speed * accel.max(0.0)
}

/// Grams of CO2 emitted over `dt` seconds at the given speed and acceleration.
pub fn compute_emissions(spec: &ClassSpec, speed: f64, accel: f64, dt: f64) -> f64 {
    dt * emission_rate(spec, speed, accel)
}
