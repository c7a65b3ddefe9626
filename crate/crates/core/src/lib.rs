//! Deterministic round-based simulator for clustered wireless sensor
//! networks.
//!
//! The crate implements the sleep/awake aware clustering protocol
//! ([`eesaa`]) together with LEACH, SEP and DEEC ([`baselines`]), all driven
//! by the same first-order radio model ([`model`]) and round loop
//! ([`engine`]).

pub mod baselines;
pub mod eesaa;
pub mod engine;
pub mod error;
pub mod model;
pub mod pairing;

pub use engine::{
    compute_summary, run_batch, run_simulation, AggregateRow, BatchJob, BatchReport, ProtocolKind, RoundRecord,
    SimSummary, Simulation, Stats,
};
pub use error::{ConfigError, ModelError};
pub use model::{Mode, NetworkConfig, NodeId, NodeState, Position, RadioParams};
pub use pairing::PairingTable;

/// Version string recorded in run provenance.
pub const ENGINE_VERSION: &str = concat!("eesaa-core ", env!("CARGO_PKG_VERSION"));
