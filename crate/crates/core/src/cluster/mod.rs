//! Clustering engines.
//!
//! Every engine except plain k-modes shares one inner loop: cluster
//! statistics are recomputed from the current partition, each sample moves
//! to the cluster with the smallest distance
//! `Γ(x_i, C_j) = Σ_r p_{j,r} · d_{r, x_{i,r}}`, and the loop repeats until
//! the partition stops changing. The value-level distances `d` stay frozen
//! for the whole inner loop; the engines differ only in how they build them
//! and whether they rebuild them afterwards.

mod joint;
mod kmodes;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::CategoricalDataset;
use crate::forest::{
    build_weight_graph, minimum_spanning_tree, DistanceMatrix, ForestError, OrderForest,
};
use crate::stats::{ClusterStats, Partition, StatsError};

pub use joint::{
    ablation_variant, coforest, coforest_with_observer, run_with_metric, run_with_observer, Snapshot,
};
pub use kmodes::{hamming_objective, kmodes};

pub const DEFAULT_MAX_INNER: usize = 100;
pub const DEFAULT_MAX_OUTER: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("k = {k} is invalid for {n} samples")]
    InvalidK { k: usize, n: usize },
    #[error("iteration caps must be at least 1")]
    ZeroCap,
    #[error("distance structure covers {found} attributes, dataset has {expected}")]
    MetricMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Which engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Joint learning of partition and order forest.
    Coforest,
    /// Plain k-modes with overlap distance.
    Kmodes,
    /// Order forest built once from the k-modes partition, never rebuilt.
    Cof1,
    /// As `Cof1` with every tree replaced by a random line over the values.
    Cof2,
    /// As `Cof1` with direct pairwise weights instead of tree paths.
    Cof3,
    /// As `Cof3` with overlap (0/1) weights.
    Cof4,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Coforest,
        Variant::Kmodes,
        Variant::Cof1,
        Variant::Cof2,
        Variant::Cof3,
        Variant::Cof4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Coforest => "coforest",
            Variant::Kmodes => "kmodes",
            Variant::Cof1 => "cof1",
            Variant::Cof2 => "cof2",
            Variant::Cof3 => "cof3",
            Variant::Cof4 => "cof4",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                format!("unknown algorithm `{s}` (expected one of coforest, kmodes, cof1, cof2, cof3, cof4)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub k: usize,
    pub seed: u64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub variant: Variant,
}

impl ClusteringConfig {
    pub fn new(k: usize, seed: u64, variant: Variant) -> Self {
        Self {
            k,
            seed,
            max_inner: DEFAULT_MAX_INNER,
            max_outer: DEFAULT_MAX_OUTER,
            variant,
        }
    }

    pub(crate) fn validate(&self, ds: &CategoricalDataset) -> Result<(), ClusterError> {
        if self.k == 0 || self.k > ds.n_samples() {
            return Err(ClusterError::InvalidK {
                k: self.k,
                n: ds.n_samples(),
            });
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err(ClusterError::ZeroCap);
        }
        Ok(())
    }
}

/// One point of the objective trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    /// Cumulative inner-iteration count when the value was recorded.
    pub iteration: usize,
    pub objective: f64,
    /// True when the distance structure was (re)built just before this record.
    pub reconstructed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub variant: Variant,
    pub seed: u64,
    pub partition: Partition,
    /// Present for the tree-based engines (`coforest`, `cof1`, `cof2`).
    pub forest: Option<OrderForest>,
    /// Final value-level distances (empty for k-modes).
    pub distances: Vec<DistanceMatrix>,
    pub objective_trace: Vec<ObjectiveRecord>,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl ClusteringResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().map_or(0.0, |r| r.objective)
    }

    pub fn reconstructions(&self) -> usize {
        self.objective_trace.iter().filter(|r| r.reconstructed).count()
    }
}

/// Runs the engine selected by `config.variant`.
pub fn run(ds: &CategoricalDataset, config: &ClusteringConfig) -> Result<ClusteringResult, ClusterError> {
    match config.variant {
        Variant::Kmodes => kmodes(ds, config.k, config.seed, config.max_inner),
        Variant::Coforest => coforest(ds, config),
        Variant::Cof1 | Variant::Cof2 | Variant::Cof3 | Variant::Cof4 => ablation_variant(ds, config),
    }
}

/// For every attribute, `profile[r][j * o_r + u] = Σ_s p(v_{r,s} | C_j) · d_{r,u,s}`,
/// i.e. the per-attribute distance from value `u` to cluster `j`.
pub(crate) struct ClusterProfiles {
    k: usize,
    per_attribute: Vec<Vec<f64>>,
    cardinalities: Vec<usize>,
}

impl ClusterProfiles {
    pub(crate) fn new(stats: &ClusterStats, metric: &[DistanceMatrix]) -> Result<Self, ClusterError> {
        if metric.len() != stats.n_attributes() {
            return Err(ClusterError::MetricMismatch {
                expected: stats.n_attributes(),
                found: metric.len(),
            });
        }
        let cvd = stats.cluster_value_distributions()?;
        let k = stats.k();
        let mut cardinalities = Vec::with_capacity(metric.len());
        let per_attribute = metric
            .iter()
            .enumerate()
            .map(|(r, d)| {
                let o = stats.cardinality(r);
                if d.size() != o {
                    return Err(ClusterError::Forest(ForestError::AttributeMismatch {
                        forest: d.size(),
                        dataset: o,
                    }));
                }
                cardinalities.push(o);
                let mut table = vec![0.0; k * o];
                for j in 0..k {
                    let p = cvd.get(j, r);
                    for u in 0..o {
                        table[j * o + u] = p.iter().zip(d.row(u)).map(|(a, b)| a * b).sum();
                    }
                }
                Ok(table)
            })
            .collect::<Result<Vec<_>, ClusterError>>()?;
        Ok(Self {
            k,
            per_attribute,
            cardinalities,
        })
    }

    /// `Γ(x_i, C_j)`
    #[inline]
    pub(crate) fn distance(&self, ds: &CategoricalDataset, i: usize, j: usize) -> f64 {
        ds.row(i)
            .zip(&self.per_attribute)
            .zip(&self.cardinalities)
            .map(|((u, table), &o)| table[j * o + u])
            .sum()
    }

    /// Nearest cluster, lowest index on ties.
    pub(crate) fn nearest(&self, ds: &CategoricalDataset, i: usize) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for j in 0..self.k {
            let d = self.distance(ds, i, j);
            if d < best_dist {
                best = j;
                best_dist = d;
            }
        }
        best
    }
}

/// Sample-to-cluster distance `Γ(x_i, C_j)` under `metric`, with cluster
/// statistics taken from `stats`.
pub fn sample_cluster_distance(
    ds: &CategoricalDataset,
    stats: &ClusterStats,
    metric: &[DistanceMatrix],
    i: usize,
    j: usize,
) -> Result<f64, ClusterError> {
    Ok(ClusterProfiles::new(stats, metric)?.distance(ds, i, j))
}

/// Total within-cluster distance of `part` under `metric`, with cluster
/// statistics derived from `part` itself.
pub fn objective(
    ds: &CategoricalDataset,
    part: &Partition,
    metric: &[DistanceMatrix],
) -> Result<f64, ClusterError> {
    let stats = ClusterStats::from_partition(ds, part)?;
    let profiles = ClusterProfiles::new(&stats, metric)?;
    Ok((0..ds.n_samples())
        .map(|i| profiles.distance(ds, i, part.cluster_of(i)))
        .sum())
}

/// Batch reassignment: every sample scored against the same frozen stats.
/// The returned partition may contain empty clusters; see
/// [`repair_empty_clusters`].
pub fn assign_step(
    ds: &CategoricalDataset,
    stats: &ClusterStats,
    metric: &[DistanceMatrix],
) -> Result<Partition, ClusterError> {
    let profiles = ClusterProfiles::new(stats, metric)?;
    let assignment = (0..ds.n_samples()).map(|i| profiles.nearest(ds, i)).collect();
    Ok(Partition::new(assignment, stats.k())?)
}

/// Refills each empty cluster (in index order) with the sample farthest from
/// its own cluster, taken only from clusters holding more than one sample.
/// Ties go to the lowest sample index.
pub(crate) fn repair_empty_clusters(
    part: &mut Partition,
    mut distance_to: impl FnMut(usize, usize) -> f64,
) {
    let mut sizes = part.sizes();
    for empty in 0..part.k() {
        if sizes[empty] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..part.len() {
            let own = part.cluster_of(i);
            if sizes[own] <= 1 {
                continue;
            }
            let d = distance_to(i, own);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let Some((i, _)) = best else {
            // fewer samples than clusters; unreachable when k <= n
            break;
        };
        sizes[part.cluster_of(i)] -= 1;
        part.set(i, empty);
        sizes[empty] += 1;
    }
}

/// Builds the order forest for a partition: value-to-cluster distributions,
/// weight graph, minimum spanning tree and path-sum distances per attribute.
pub fn reconstruct_forest(ds: &CategoricalDataset, part: &Partition) -> Result<OrderForest, ClusterError> {
    let stats = ClusterStats::from_partition(ds, part)?;
    if let Some(j) = stats.first_empty_cluster() {
        return Err(StatsError::EmptyCluster(j).into());
    }
    let vcd = stats.value_cluster_distributions();
    let trees = (0..ds.n_attributes())
        .map(|r| minimum_spanning_tree(&build_weight_graph(&vcd, r)))
        .collect();
    Ok(OrderForest::from_trees(trees))
}
