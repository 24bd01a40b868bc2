//! Learning tree graphical-model structure from noise-corrupted data.
//!
//! The observed variables are noisy copies of the variables on an unknown
//! tree; their joint distribution lives in a latent tree model over the
//! augmented tree, which makes phylogenetic machinery applicable. This crate
//! provides:
//!
//! - [`tree`]: labeled trees, degree-two suppression, augmentation with
//!   noisy-copy leaves, mother nodes, label-swap equivalence classes, and
//!   Robinson-Foulds comparison;
//! - [`model`]: discrete tree models (fully symmetric and Ising), scalar
//!   linear (Gaussian) tree models, per-node corruption channels, sampling;
//! - [`metrics`]: determinant-based similarities, `-log tau^2` tree metrics
//!   from exact models or samples, and mutual information;
//! - [`recovery`]: Chow-Liu and Neighbor-Joining reconstruction, edge
//!   shrinking, and extraction of the underlying tree from the suppressed
//!   augmented tree;
//! - [`experiment`]: a reproducible simulation harness sweeping noise
//!   strengths and shrink tolerances.
//!
//! The numeric core is generic over the scalar type through [`num::Real`]
//! (`f32` or `f64`); aliases below fix the common `f64` instantiation.
//!
//! ```
//! use noisy_trees::metrics::distance_matrix_exact;
//! use noisy_trees::model::{Channel, CorruptionSpec, DiscreteTreeModel};
//! use noisy_trees::recovery::{recover, RecoveryConfig, RecoveryTarget};
//! use noisy_trees::tree::LabeledTree;
//!
//! let tree = LabeledTree::<f64>::new(1..=5, [(1, 2), (1, 3), (2, 4), (2, 5)])?;
//! let model = DiscreteTreeModel::uniform_symmetric(&tree, 2, 0.2)?;
//! let noise = CorruptionSpec::homogeneous(1..=5, Channel::symmetric_for_length(2, 0.5)?);
//! let distances = distance_matrix_exact(&model, Some(&noise))?;
//! let config = RecoveryConfig {
//!     epsilon: 0.5,
//!     target: RecoveryTarget::UnderlyingTree,
//!     noisy_offset: Some(1000),
//!     ..Default::default()
//! };
//! let result = recover(&distances, &config)?;
//! assert!(result.underlying.unwrap().same_topology(&tree));
//! # Ok::<(), noisy_trees::Error>(())
//! ```

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix math

pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod num;
pub mod recovery;
pub mod seeding;
pub mod tree;

pub use error::{Error, Result};
pub use num::Real;

/// `f64` instantiations of the scalar-generic core types.
pub type LabeledTree64 = tree::LabeledTree<f64>;
pub type SemiLabeledTree64 = tree::SemiLabeledTree<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type RecoveryConfig64 = recovery::RecoveryConfig<f64>;
pub type RecoveryResult64 = recovery::RecoveryResult<f64>;
pub type DistanceMatrix64 = metrics::DistanceMatrix<f64>;
pub type SimilarityMatrix64 = metrics::SimilarityMatrix<f64>;
pub type DiscreteTreeModel64 = model::DiscreteTreeModel<f64>;
pub type IsingParams64 = model::IsingParams<f64>;
pub type LinearTreeModel64 = model::LinearTreeModel<f64>;
pub type Channel64 = model::Channel<f64>;
pub type CorruptionSpec64 = model::CorruptionSpec<f64>;
pub type SampleBatch64 = model::SampleBatch<f64>;
