//! Road-scenario simulation: vehicle kinematics, array signal quantities,
//! and the slot-level decision process the learning stack interacts with.

pub mod config;
pub mod kinematics;
pub mod mdp;
pub mod signal;
pub mod state;
pub mod steering;

pub use config::{dbm_to_watts, watts_to_dbm, ConfigError, ScenarioConfig, SPEED_OF_LIGHT};
pub use mdp::{IsacEnv, ANGLE_NOISE_VAR_CAP, POWER_TOLERANCE};
pub use state::{BeamAction, EnvError, Observation, SlotDiagnostics, StepOutcome, VehicleState};
