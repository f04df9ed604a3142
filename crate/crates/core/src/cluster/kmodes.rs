use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{repair_empty_clusters, ClusterError, ClusteringResult, ObjectiveRecord, Variant};
use crate::data::CategoricalDataset;
use crate::stats::{ClusterStats, Partition};

fn hamming(ds: &CategoricalDataset, i: usize, mode: &[usize]) -> usize {
    ds.row(i).zip(mode).filter(|(a, b)| a != *b).count()
}

fn nearest_mode(ds: &CategoricalDataset, i: usize, modes: &[Vec<usize>]) -> usize {
    let mut best = 0;
    let mut best_dist = usize::MAX;
    for (j, mode) in modes.iter().enumerate() {
        let d = hamming(ds, i, mode);
        if d < best_dist {
            best = j;
            best_dist = d;
        }
    }
    best
}

fn assign(ds: &CategoricalDataset, modes: &[Vec<usize>]) -> Partition {
    let assignment = (0..ds.n_samples()).map(|i| nearest_mode(ds, i, modes)).collect();
    let mut part = Partition::new(assignment, modes.len()).expect("indices below k");
    repair_empty_clusters(&mut part, |i, own| hamming(ds, i, &modes[own]) as f64);
    part
}

/// Most frequent value per attribute and cluster, lowest value index on ties.
fn update_modes(ds: &CategoricalDataset, part: &Partition) -> Vec<Vec<usize>> {
    let stats = ClusterStats::from_partition(ds, part).expect("partition matches dataset");
    (0..part.k())
        .map(|j| {
            (0..ds.n_attributes())
                .map(|r| {
                    let mut best = 0;
                    let mut best_count = 0;
                    for u in 0..ds.cardinality(r) {
                        let c = stats.count(r, u, j);
                        if c > best_count {
                            best = u;
                            best_count = c;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect()
}

/// Sum of overlap distances from each sample to its cluster's mode.
pub fn hamming_objective(ds: &CategoricalDataset, part: &Partition) -> f64 {
    let modes = update_modes(ds, part);
    (0..ds.n_samples())
        .map(|i| hamming(ds, i, &modes[part.cluster_of(i)]) as f64)
        .sum()
}

/// Seeded choice of `k` initial modes: distinct rows if enough exist,
/// otherwise any `k` rows.
fn initial_modes(ds: &CategoricalDataset, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..ds.n_samples()).collect();
    order.shuffle(&mut rng);
    let mut modes: Vec<Vec<usize>> = Vec::with_capacity(k);
    for &i in &order {
        let row: Vec<usize> = ds.row(i).collect();
        if !modes.contains(&row) {
            modes.push(row);
            if modes.len() == k {
                return modes;
            }
        }
    }
    order.iter().take(k).map(|&i| ds.row(i).collect()).collect()
}

/// Huang's k-modes: overlap distance to modes, modes updated to the most
/// frequent value per attribute, until assignments stop changing.
pub fn kmodes(
    ds: &CategoricalDataset,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusteringResult, ClusterError> {
    let n = ds.n_samples();
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    if max_iter == 0 {
        return Err(ClusterError::ZeroCap);
    }

    let mut part = assign(ds, &initial_modes(ds, k, seed));
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let modes = update_modes(ds, &part);
        let next = assign(ds, &modes);
        let cost = (0..n)
            .map(|i| hamming(ds, i, &modes[next.cluster_of(i)]) as f64)
            .sum();
        trace.push(ObjectiveRecord {
            iteration: iterations,
            objective: cost,
            reconstructed: false,
        });
        let stable = next == part;
        part = next;
        if stable {
            converged = true;
            break;
        }
    }

    Ok(ClusteringResult {
        variant: Variant::Kmodes,
        seed,
        partition: part,
        forest: None,
        distances: Vec::new(),
        objective_trace: trace,
        inner_iterations: iterations,
        outer_iterations: 0,
        converged,
    })
}
