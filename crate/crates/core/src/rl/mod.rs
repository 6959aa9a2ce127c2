//! Clipped actor-critic training stack: policy and value heads over either
//! network backend, rollout storage, advantage estimation, optimization,
//! and evaluation utilities.

pub mod adam;
pub mod buffer;
pub mod eval;
pub mod loss;
pub mod policy;
pub mod snapshot;
pub mod train;

pub use buffer::{RolloutBuffer, Transition};
pub use eval::{evaluate, rollout_trajectory, sweep_power, EvalPolicy, EvalReport, SweepPoint};
pub use loss::{clip_bound, clipped_objective, clipped_policy_loss, value_loss};
pub use policy::{Backbone, PolicyHead, ValueHead};
pub use snapshot::{load_policy, save_policy, SnapshotError};
pub use train::{
    derive_seed, init_heads, train, BackendKind, IterationMetrics, TrainConfig, TrainError,
    TrainResult,
};
