//! Gate-level noise: Kraus channels, the calibrated noise model, and
//! Monte Carlo trajectory execution on statevectors.

mod channel;
mod model;
mod trajectory;

pub use channel::{bit_flip_channel, depolarizing_channel, thermal_relaxation_channel, KrausChannel};
pub use model::{device_noise_model, Assignment, NoiseModel, NoiseParams, Placement};
pub use trajectory::{estimate_trajectories, execute_trajectories, TrajectoryEstimate};
