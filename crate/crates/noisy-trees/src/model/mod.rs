//! Tree distributions and their corruption: discrete general Markov models
//! (with the fully symmetric family and the Ising model as special cases),
//! scalar linear models, per-node noise channels, and sampling.

pub mod corruption;
pub mod discrete;
pub mod ising;
pub mod linear;
pub mod sample;

pub use corruption::{corrupt, Channel, CorruptionSpec};
pub use discrete::{
    symmetric_transition, theta_for_edge_length, DiscreteTreeModel, FullySymmetricParams,
    JointTable, DEFAULT_STATE_CAP,
};
pub use ising::{IsingParams, MAX_EXACT_NODES};
pub use linear::LinearTreeModel;
pub use sample::{BatchData, SampleBatch};
