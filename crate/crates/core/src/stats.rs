//! Partitions and the cluster-conditional value statistics.
//!
//! Two probability families are derived from the same contingency counts
//! `|X_{r,u} ∩ C_j|`:
//!
//! - value → cluster: for value `u` of attribute `r`, how its supporting
//!   samples spread over the `k` clusters (feeds the edge weights);
//! - cluster → value: for cluster `j`, how attribute `r`'s values are
//!   distributed inside it (feeds the sample-cluster distance).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::CategoricalDataset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("partition covers {partition} samples but dataset has {dataset}")]
    SizeMismatch { partition: usize, dataset: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cluster index {index} out of range for k = {k}")]
    ClusterOutOfRange { index: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
}

/// Hard assignment of each sample to one of `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self, StatsError> {
        if k == 0 {
            return Err(StatsError::ZeroClusters);
        }
        if let Some(&index) = assignment.iter().find(|&&c| c >= k) {
            return Err(StatsError::ClusterOutOfRange { index, k });
        }
        Ok(Self { assignment, k })
    }

    /// Every sample in cluster 0.
    pub fn single(n: usize, k: usize) -> Result<Self, StatsError> {
        Self::new(vec![0; n], k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    #[inline]
    pub fn cluster_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn set(&mut self, i: usize, cluster: usize) {
        assert!(cluster < self.k, "cluster {cluster} out of range");
        self.assignment[i] = cluster;
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Lowest-indexed empty cluster, if any.
    pub fn first_empty_cluster(&self) -> Option<usize> {
        self.sizes().iter().position(|&s| s == 0)
    }

    pub fn into_assignment(self) -> Vec<usize> {
        self.assignment
    }
}

/// Contingency counts `|X_{r,u} ∩ C_j|` for every attribute, plus cluster sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    k: usize,
    sizes: Vec<usize>,
    /// `counts[r][u * k + j]`
    counts: Vec<Vec<usize>>,
    cardinalities: Vec<usize>,
}

impl ClusterStats {
    pub fn from_partition(ds: &CategoricalDataset, part: &Partition) -> Result<Self, StatsError> {
        if part.len() != ds.n_samples() {
            return Err(StatsError::SizeMismatch {
                partition: part.len(),
                dataset: ds.n_samples(),
            });
        }
        let k = part.k();
        let l = ds.n_attributes();
        let cardinalities: Vec<usize> = (0..l).map(|r| ds.cardinality(r)).collect();
        let mut counts: Vec<Vec<usize>> = cardinalities.iter().map(|&o| vec![0; o * k]).collect();
        for i in 0..ds.n_samples() {
            let j = part.cluster_of(i);
            for (r, u) in ds.row(i).enumerate() {
                counts[r][u * k + j] += 1;
            }
        }
        Ok(Self {
            k,
            sizes: part.sizes(),
            counts,
            cardinalities,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_attributes(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinality(&self, r: usize) -> usize {
        self.cardinalities[r]
    }

    #[inline]
    pub fn count(&self, r: usize, u: usize, j: usize) -> usize {
        self.counts[r][u * self.k + j]
    }

    /// `|X_{r,u}|`
    pub fn support(&self, r: usize, u: usize) -> usize {
        self.counts[r][u * self.k..(u + 1) * self.k].iter().sum()
    }

    pub fn first_empty_cluster(&self) -> Option<usize> {
        self.sizes.iter().position(|&s| s == 0)
    }

    pub fn value_cluster_distributions(&self) -> ValueClusterDistributions {
        let k = self.k;
        let rows = self
            .counts
            .iter()
            .map(|table| {
                let mut probs = vec![0.0; table.len()];
                for (chunk_in, chunk_out) in table.chunks(k).zip(probs.chunks_mut(k)) {
                    let support: usize = chunk_in.iter().sum();
                    if support > 0 {
                        for (p, &c) in chunk_out.iter_mut().zip(chunk_in) {
                            *p = c as f64 / support as f64;
                        }
                    }
                }
                probs
            })
            .collect();
        ValueClusterDistributions { k, rows }
    }

    /// Fails with [`StatsError::EmptyCluster`] on the first empty cluster.
    pub fn cluster_value_distributions(&self) -> Result<ClusterValueDistributions, StatsError> {
        if let Some(j) = self.first_empty_cluster() {
            return Err(StatsError::EmptyCluster(j));
        }
        let k = self.k;
        let per_attribute = self
            .counts
            .iter()
            .zip(&self.cardinalities)
            .map(|(table, &o)| {
                let mut probs = vec![0.0; o * k];
                for j in 0..k {
                    let size = self.sizes[j] as f64;
                    for u in 0..o {
                        probs[j * o + u] = table[u * k + j] as f64 / size;
                    }
                }
                probs
            })
            .collect();
        Ok(ClusterValueDistributions {
            k,
            cardinalities: self.cardinalities.clone(),
            per_attribute,
        })
    }
}

/// Per attribute, an `o_r x k` matrix whose row `u` is `p(C_j | v_{r,u})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueClusterDistributions {
    k: usize,
    rows: Vec<Vec<f64>>,
}

impl ValueClusterDistributions {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_attributes(&self) -> usize {
        self.rows.len()
    }

    pub fn cardinality(&self, r: usize) -> usize {
        self.rows[r].len() / self.k
    }

    pub fn row(&self, r: usize, u: usize) -> &[f64] {
        &self.rows[r][u * self.k..(u + 1) * self.k]
    }
}

/// Per cluster and attribute, the vector `p(v_{r,u} | C_j)` over `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterValueDistributions {
    k: usize,
    cardinalities: Vec<usize>,
    /// `per_attribute[r][j * o_r + u]`
    per_attribute: Vec<Vec<f64>>,
}

impl ClusterValueDistributions {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_attributes(&self) -> usize {
        self.per_attribute.len()
    }

    pub fn get(&self, j: usize, r: usize) -> &[f64] {
        let o = self.cardinalities[r];
        &self.per_attribute[r][j * o..(j + 1) * o]
    }
}

pub fn value_cluster_distributions(
    ds: &CategoricalDataset,
    part: &Partition,
) -> Result<ValueClusterDistributions, StatsError> {
    Ok(ClusterStats::from_partition(ds, part)?.value_cluster_distributions())
}

pub fn cluster_value_distributions(
    ds: &CategoricalDataset,
    part: &Partition,
) -> Result<ClusterValueDistributions, StatsError> {
    ClusterStats::from_partition(ds, part)?.cluster_value_distributions()
}

/// Exponent of the norm used for edge weights.
pub const DEFAULT_NORM: f64 = 2.0;

/// `||a - b||_p` for `p >= 1`.
pub fn minkowski(a: &[f64], b: &[f64], p: f64) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    Ok(if p == 2.0 {
        diffs.map(|d| d * d).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        diffs.fold(0.0, f64::max)
    } else {
        diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p)
    })
}

/// Distance between two values' cluster distributions (Euclidean).
pub fn weight(u_dist: &[f64], s_dist: &[f64]) -> Result<f64, StatsError> {
    minkowski(u_dist, s_dist, DEFAULT_NORM)
}
