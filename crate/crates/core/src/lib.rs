//! Categorical data clustering with jointly learned order forests.
//!
//! Every categorical attribute gets an *order tree*: a minimum spanning tree
//! over its possible values, weighted by how differently each value spreads
//! across the current clusters. Path sums along the tree give a value-level
//! metric, and the clustering alternates between re-partitioning the samples
//! under a frozen forest and rebuilding the forest from the new partition.
//!
//! The crate is laid out by concern:
//!
//! - [`data`]: dataset model, CSV ingestion and the synthetic generator.
//! - [`stats`]: partitions and the two conditional probability families.
//! - [`forest`]: weight graphs, order trees, trace distances and the
//!   alternative value structures used by ablations.
//! - [`cluster`]: k-modes, the joint learning loop and its ablated variants.
//! - [`eval`]: CA/ARI/NMI and the multi-restart benchmark harness.
//! - [`cli`]: the `coforest` command-line front end.

pub mod cli;
pub mod cluster;
pub mod data;
pub mod eval;
pub mod forest;
pub mod stats;

pub use cluster::{ClusteringConfig, ClusteringResult, Variant};
pub use data::{AttributeSchema, CategoricalDataset, SyntheticSpec};
pub use forest::{DistanceMatrix, OrderForest, OrderTree, WeightedValueGraph};
pub use stats::{ClusterStats, Partition};
