//! Single-intersection traffic signal control benchmark.
//!
//! The crate is organized around five pieces:
//!
//! * [`sim`] — a deterministic discrete-time microsimulation of one
//!   four-approach intersection with heterogeneous vehicle classes,
//!   signal phase logic, and per-vehicle CO2 accounting.
//! * [`reward`] — the observation vector, the queue / waiting / pressure
//!   rewards, their emission-weighted variants, and weight sensitivities.
//! * [`control`] — four non-learning baseline controllers (uniform,
//!   Webster, max-pressure, SOTL) behind a common controller trait.
//! * [`agents`] — four learning controllers (tabular Q, SARSA(λ) with
//!   Fourier features, DQN, A2C) plus the from-scratch numerical
//!   substrate they share (MLP, backprop, Adam).
//! * [`harness`] — scenario configuration, the episode runner, metrics,
//!   weight tuning, comparison matrices, and CSV/SVG emission.

pub mod agents;
pub mod control;
pub mod harness;
pub mod reward;
pub mod sim;

pub use harness::config::ScenarioConfig;
pub use harness::episode::{run_episode, RunResult};
pub use harness::metrics::MetricsRecord;
pub use reward::{Observation, RewardKind, WeightScheme};
pub use sim::{Phase, VehicleClass, World};
