//! Deterministic discrete-time microsimulation of one four-approach
//! intersection with heterogeneous vehicle classes.

pub mod arrivals;
pub mod emissions;
pub mod signal;
pub mod types;
pub mod world;

pub use arrivals::{Arrival, ArrivalProcess, Axis, Injection};
pub use emissions::{compute_emissions, emission_rate};
pub use signal::{phase_of_lane, Phase, PhaseChange, SignalMode, SignalState};
pub use types::{
    destination, lane_for_turn, lane_index, lane_of_index, Approach, ClassSpec, ClassTable, Lane,
    Turn, Vehicle, VehicleClass, NUM_LANES,
};
pub use world::{halting_count, Counters, SimParams, World};
