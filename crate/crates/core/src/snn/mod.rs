//! Spiking network engine: LIF dynamics over internal time steps, spike
//! traces, surrogate-gradient backpropagation through time, and a matching
//! dense baseline.

pub mod dense;
pub mod lif;
pub mod network;
pub mod surrogate;

pub use dense::{DenseActivation, DenseNetwork, DenseTrace};
pub use lif::{lif_step, LifParams, SnnError};
pub use network::{ForwardTrace, SpikeMode, SpikingNetwork};
pub use surrogate::{surrogate, surrogate_grad};
