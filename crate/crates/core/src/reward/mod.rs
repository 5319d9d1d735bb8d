//! Observation vector, base and weighted rewards, and weight sensitivities.
//!
//! Everything here is a pure function of world snapshots and can run
//! concurrently over distinct worlds.

pub mod observe;
pub mod rewards;
pub mod sensitivity;
pub mod weights;

pub use observe::{observe, Observation, STATE_DIM};
pub use rewards::{
    base_reward, base_reward_signed, discounted_return, weighted_reward, weighted_reward_signed,
    weighted_reward_with, RewardKind, WaitingSign,
};
pub use sensitivity::{sensitivity_closed, sensitivity_fd, SensitivityError};
pub use weights::{assign_weights, lane_normalized_weight, vehicle_weight, WeightScheme};
