//! Simulator and learning stack for sensing-assisted beamforming at a
//! roadside unit: a seedable road/array environment, a spiking (and dense)
//! network engine with surrogate-gradient training, a clipped actor-critic
//! loop, and operation-level energy accounting.

pub mod energy;
pub mod env;
pub mod rl;
pub mod snn;
