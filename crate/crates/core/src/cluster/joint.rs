use super::{
    kmodes, objective, reconstruct_forest, repair_empty_clusters, ClusterError, ClusterProfiles,
    ClusteringConfig, ClusteringResult, ObjectiveRecord, Variant,
};
use crate::data::CategoricalDataset;
use crate::forest::{
    attribute_seed, build_weight_graph, fully_connected_distances, hamming_graph, line_structure,
    DistanceMatrix, OrderForest,
};
use crate::stats::{ClusterStats, Partition};

/// State handed to an observer after every recorded objective value.
#[derive(Debug)]
pub struct Snapshot<'a> {
    pub record: ObjectiveRecord,
    pub partition: &'a Partition,
    pub distances: &'a [DistanceMatrix],
}

struct InnerOutcome {
    partition: Partition,
    converged: bool,
}

/// Reassigns under frozen distances until the partition is stable or
/// `max_inner` iterations ran.
fn inner_loop(
    ds: &CategoricalDataset,
    start: &Partition,
    metric: &[DistanceMatrix],
    max_inner: usize,
    iterations: &mut usize,
    trace: &mut Vec<ObjectiveRecord>,
    observer: &mut dyn FnMut(&Snapshot<'_>),
) -> Result<InnerOutcome, ClusterError> {
    let mut current = start.clone();
    for _ in 0..max_inner {
        *iterations += 1;
        let stats = ClusterStats::from_partition(ds, &current)?;
        let profiles = ClusterProfiles::new(&stats, metric)?;
        let assignment = (0..ds.n_samples()).map(|i| profiles.nearest(ds, i)).collect();
        let mut next = Partition::new(assignment, current.k())?;
        repair_empty_clusters(&mut next, |i, own| profiles.distance(ds, i, own));

        let record = ObjectiveRecord {
            iteration: *iterations,
            objective: objective(ds, &next, metric)?,
            reconstructed: false,
        };
        trace.push(record);
        observer(&Snapshot {
            record,
            partition: &next,
            distances: metric,
        });

        if next == current {
            return Ok(InnerOutcome {
                partition: next,
                converged: true,
            });
        }
        current = next;
    }
    Ok(InnerOutcome {
        partition: current,
        converged: false,
    })
}

fn record_construction(
    ds: &CategoricalDataset,
    part: &Partition,
    metric: &[DistanceMatrix],
    iteration: usize,
    trace: &mut Vec<ObjectiveRecord>,
    observer: &mut dyn FnMut(&Snapshot<'_>),
) -> Result<(), ClusterError> {
    let record = ObjectiveRecord {
        iteration,
        objective: objective(ds, part, metric)?,
        reconstructed: true,
    };
    trace.push(record);
    observer(&Snapshot {
        record,
        partition: part,
        distances: metric,
    });
    Ok(())
}

/// Joint learning of partition and order forest.
pub fn coforest(ds: &CategoricalDataset, config: &ClusteringConfig) -> Result<ClusteringResult, ClusterError> {
    coforest_with_observer(ds, config, &mut |_| {})
}

/// [`coforest`] reporting every recorded `(Q, M, L)` state to `observer`.
///
/// The outer loop stops when an inner loop ends on the same partition the
/// current forest was built from.
pub fn coforest_with_observer(
    ds: &CategoricalDataset,
    config: &ClusteringConfig,
    observer: &mut dyn FnMut(&Snapshot<'_>),
) -> Result<ClusteringResult, ClusterError> {
    config.validate(ds)?;
    let initial = kmodes(ds, config.k, config.seed, config.max_inner)?.partition;

    let mut trace = Vec::new();
    let mut inner_iterations = 0;
    let mut outer_iterations = 0;
    let mut converged = false;

    let mut forest_partition = initial;
    let mut forest = reconstruct_forest(ds, &forest_partition)?;
    record_construction(ds, &forest_partition, forest.distances(), 0, &mut trace, observer)?;

    let final_partition = loop {
        outer_iterations += 1;
        let inner = inner_loop(
            ds,
            &forest_partition,
            forest.distances(),
            config.max_inner,
            &mut inner_iterations,
            &mut trace,
            observer,
        )?;
        if inner.partition == forest_partition {
            converged = true;
            break inner.partition;
        }
        if outer_iterations >= config.max_outer {
            break inner.partition;
        }
        forest_partition = inner.partition;
        forest = reconstruct_forest(ds, &forest_partition)?;
        record_construction(
            ds,
            &forest_partition,
            forest.distances(),
            inner_iterations,
            &mut trace,
            observer,
        )?;
    };

    Ok(ClusteringResult {
        variant: Variant::Coforest,
        seed: config.seed,
        partition: final_partition,
        distances: forest.distances().to_vec(),
        forest: Some(forest),
        objective_trace: trace,
        inner_iterations,
        outer_iterations,
        converged,
    })
}

/// Inner loop to convergence from `initial` under a fixed distance structure.
/// Returns the final partition and whether it converged before `max_inner`.
pub fn run_with_metric(
    ds: &CategoricalDataset,
    initial: &Partition,
    metric: &[DistanceMatrix],
    max_inner: usize,
) -> Result<(Partition, bool), ClusterError> {
    let mut iterations = 0;
    let mut trace = Vec::new();
    let outcome = inner_loop(ds, initial, metric, max_inner, &mut iterations, &mut trace, &mut |_| {})?;
    Ok((outcome.partition, outcome.converged))
}

/// Single-construction variants: the distance structure is built once from
/// the k-modes partition and kept for one inner loop.
pub fn ablation_variant(
    ds: &CategoricalDataset,
    config: &ClusteringConfig,
) -> Result<ClusteringResult, ClusterError> {
    ablation_with_observer(ds, config, &mut |_| {})
}

pub(crate) fn ablation_with_observer(
    ds: &CategoricalDataset,
    config: &ClusteringConfig,
    observer: &mut dyn FnMut(&Snapshot<'_>),
) -> Result<ClusteringResult, ClusterError> {
    if matches!(config.variant, Variant::Coforest | Variant::Kmodes) {
        return run_with_observer(ds, config, observer);
    }
    config.validate(ds)?;
    let initial = kmodes(ds, config.k, config.seed, config.max_inner)?.partition;
    let stats = ClusterStats::from_partition(ds, &initial)?;
    let vcd = stats.value_cluster_distributions();
    let l = ds.n_attributes();

    let (forest, distances) = match config.variant {
        Variant::Cof1 => {
            let forest = reconstruct_forest(ds, &initial)?;
            let d = forest.distances().to_vec();
            (Some(forest), d)
        }
        Variant::Cof2 => {
            let trees = (0..l)
                .map(|r| {
                    line_structure(ds.cardinality(r), attribute_seed(config.seed, r))
                        .reweighted(&build_weight_graph(&vcd, r))
                })
                .collect();
            let forest = OrderForest::from_trees(trees);
            let d = forest.distances().to_vec();
            (Some(forest), d)
        }
        Variant::Cof3 => (
            None,
            (0..l)
                .map(|r| fully_connected_distances(&build_weight_graph(&vcd, r)))
                .collect(),
        ),
        Variant::Cof4 => (
            None,
            (0..l)
                .map(|r| fully_connected_distances(&hamming_graph(r, ds.cardinality(r))))
                .collect(),
        ),
        Variant::Coforest | Variant::Kmodes => unreachable!("dispatched above"),
    };

    let mut trace = Vec::new();
    let mut inner_iterations = 0;
    record_construction(ds, &initial, &distances, 0, &mut trace, observer)?;
    let inner = inner_loop(
        ds,
        &initial,
        &distances,
        config.max_inner,
        &mut inner_iterations,
        &mut trace,
        observer,
    )?;

    Ok(ClusteringResult {
        variant: config.variant,
        seed: config.seed,
        partition: inner.partition,
        forest,
        distances,
        objective_trace: trace,
        inner_iterations,
        outer_iterations: 1,
        converged: inner.converged,
    })
}

/// Runs any variant, reporting recorded states to `observer`. k-modes has no
/// value-level distance structure and reports nothing.
pub fn run_with_observer(
    ds: &CategoricalDataset,
    config: &ClusteringConfig,
    observer: &mut dyn FnMut(&Snapshot<'_>),
) -> Result<ClusteringResult, ClusterError> {
    match config.variant {
        Variant::Coforest => coforest_with_observer(ds, config, observer),
        Variant::Kmodes => super::run(ds, config),
        _ => ablation_with_observer(ds, config, observer),
    }
}
