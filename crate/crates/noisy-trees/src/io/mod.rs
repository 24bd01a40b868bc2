//! File formats: Newick and JSON trees, distance matrix CSV/PHYLIP, sample
//! batch CSV with seed manifests, and JSON model/corruption files. All
//! readers and writers work on the `f64` instantiations.

pub mod batch_io;
pub mod matrix_io;
pub mod model_io;
pub mod newick;
pub mod tree_json;

pub use batch_io::{parse_batch_csv, write_batch_csv, BatchManifest};
pub use matrix_io::{
    parse_distance_csv, parse_distance_phylip, write_distance_csv, write_distance_phylip,
};
pub use model_io::{ChannelJson, CorruptionJson, ModelFile, ModelJson, TransitionJson};
pub use newick::{parse_newick, write_newick, write_newick_anonymous};
pub use tree_json::{parse_tree_json, write_tree_json, TreeJson};
