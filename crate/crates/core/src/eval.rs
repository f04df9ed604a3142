//! Cluster validity indices and experiment harnesses.
//!
//! All metrics compare a predicted assignment with ground-truth class
//! indices and are invariant to relabeling of either side.

use std::fmt::Write as _;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{
    kmodes, run, run_with_metric, ClusterError, ClusteringConfig, Variant, DEFAULT_MAX_INNER,
};
use crate::data::CategoricalDataset;
use crate::forest::{
    attribute_seed, build_weight_graph, line_structure, line_through, random_connected_structure,
    shortest_path_distances, trace_distance_matrix, DistanceMatrix, EdgeSet,
};
use crate::stats::ClusterStats;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("prediction has {pred} entries but truth has {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("cannot score an empty labeling")]
    Empty,
    #[error("adjusted Rand index needs at least two samples")]
    TooFewSamples,
    #[error("dataset `{0}` has no ground-truth labels")]
    MissingLabels(String),
    #[error("restart count must be at least 1")]
    NoRestarts,
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("the slg structure needs a value ordering for every attribute")]
    MissingOrdering,
    #[error("invalid ordering for attribute {attribute}: {reason}")]
    InvalidOrdering { attribute: usize, reason: String },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Counts of samples per (predicted cluster, true class) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    total: usize,
}

impl ConfusionMatrix {
    /// Row count is `max(pred) + 1`, column count `max(truth) + 1`.
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self, EvalError> {
        if pred.len() != truth.len() {
            return Err(EvalError::LengthMismatch {
                pred: pred.len(),
                truth: truth.len(),
            });
        }
        if pred.is_empty() {
            return Err(EvalError::Empty);
        }
        let rows = pred.iter().max().unwrap() + 1;
        let cols = truth.iter().max().unwrap() + 1;
        let mut counts = vec![0; rows * cols];
        for (&p, &t) in pred.iter().zip(truth) {
            counts[p * cols + t] += 1;
        }
        Ok(Self {
            rows,
            cols,
            counts,
            total: pred.len(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn get(&self, p: usize, t: usize) -> u64 {
        self.counts[p * self.cols + t]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|p| (0..self.cols).map(|t| self.get(p, t)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|t| (0..self.rows).map(|p| self.get(p, t)).sum())
            .collect()
    }
}

/// Fraction of samples matched under the best one-to-one cluster-to-class
/// mapping.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64, EvalError> {
    let cm = ConfusionMatrix::new(pred, truth)?;
    let size = cm.rows.max(cm.cols);
    let mut padded = Matrix::new(size, size, 0i64);
    for p in 0..cm.rows {
        for t in 0..cm.cols {
            padded[(p, t)] = cm.get(p, t) as i64;
        }
    }
    let (matched, _) = kuhn_munkres(&padded);
    Ok(matched as f64 / cm.total as f64)
}

fn pairs(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Pair-counting Rand index corrected for chance.
pub fn adjusted_rand_index(pred: &[usize], truth: &[usize]) -> Result<f64, EvalError> {
    let cm = ConfusionMatrix::new(pred, truth)?;
    if cm.total < 2 {
        return Err(EvalError::TooFewSamples);
    }
    let index: f64 = cm.counts.iter().map(|&c| pairs(c)).sum();
    let a: f64 = cm.row_sums().into_iter().map(pairs).sum();
    let b: f64 = cm.col_sums().into_iter().map(pairs).sum();
    let expected = a * b / pairs(cm.total as u64);
    let max = 0.5 * (a + b);
    if max == expected {
        // both labelings are all-in-one or all-singletons
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information over the arithmetic mean of the two entropies.
/// Two constant labelings score 1.
pub fn normalized_mutual_information(pred: &[usize], truth: &[usize]) -> Result<f64, EvalError> {
    let cm = ConfusionMatrix::new(pred, truth)?;
    let n = cm.total as f64;
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let h_pred = entropy(&rows, n);
    let h_truth = entropy(&cols, n);
    if h_pred == 0.0 && h_truth == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (p, &rp) in rows.iter().enumerate() {
        for (t, &ct) in cols.iter().enumerate() {
            let c = cm.get(p, t);
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (rp as f64 * ct as f64)).ln();
            }
        }
    }
    let nmi = mi / (0.5 * (h_pred + h_truth));
    Ok(nmi.clamp(0.0, 1.0))
}

/// CA, ARI and NMI of one labeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub ca: f64,
    pub ari: f64,
    pub nmi: f64,
}

impl Scores {
    pub fn compute(pred: &[usize], truth: &[usize]) -> Result<Self, EvalError> {
        Ok(Self {
            ca: clustering_accuracy(pred, truth)?,
            ari: adjusted_rand_index(pred, truth)?,
            nmi: normalized_mutual_information(pred, truth)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation (divisor R).
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let r = values.len() as f64;
        let mean = values.iter().sum::<f64>() / r;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / r;
        Self { mean, std: var.sqrt() }
    }
}

/// Ranks with 1 for the highest value; tied values share the mean of the
/// ranks they span.
pub fn average_tied_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let above = values.iter().filter(|&&o| o > v).count() as f64;
            let tied = values.iter().filter(|&&o| o == v).count() as f64;
            above + (tied + 1.0) / 2.0
        })
        .collect()
}

/// A labeled dataset entered into a benchmark, clustered with `k` clusters.
#[derive(Debug, Clone)]
pub struct BenchmarkDataset {
    pub name: String,
    pub data: CategoricalDataset,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub scores: Scores,
    pub objective: f64,
    pub converged: bool,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCell {
    pub dataset: String,
    pub algorithm: Variant,
    pub ca: MeanStd,
    pub ari: MeanStd,
    pub nmi: MeanStd,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRank {
    pub algorithm: Variant,
    pub ca: f64,
    pub ari: f64,
    pub nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub restarts: usize,
    pub base_seed: u64,
    pub datasets: Vec<String>,
    pub algorithms: Vec<Variant>,
    pub std_divisor: String,
    pub nmi_normalization: String,
    pub rank_ties: String,
}

/// Cells are stored dataset-major in input order; `average_ranks` follows the
/// algorithm order given to [`run_benchmark`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: ReportMetadata,
    pub cells: Vec<BenchmarkCell>,
    pub average_ranks: Vec<AverageRank>,
}

impl BenchmarkReport {
    pub fn cell(&self, dataset: usize, algorithm: usize) -> &BenchmarkCell {
        &self.cells[dataset * self.metadata.algorithms.len() + algorithm]
    }

    /// Aligned text table per metric: one row per dataset, one `mean±std`
    /// column per algorithm, and an average-rank footer.
    pub fn to_table(&self) -> String {
        type Column = (&'static str, fn(&BenchmarkCell) -> MeanStd, fn(&AverageRank) -> f64);
        let metrics: [Column; 3] = [
            ("CA", |c| c.ca, |r| r.ca),
            ("ARI", |c| c.ari, |r| r.ari),
            ("NMI", |c| c.nmi, |r| r.nmi),
        ];
        let algs = &self.metadata.algorithms;
        let mut out = String::new();
        for (title, cell_metric, rank_metric) in metrics {
            let mut rows: Vec<Vec<String>> = Vec::new();
            let mut header = vec!["dataset".to_string()];
            header.extend(algs.iter().map(|a| a.to_string()));
            rows.push(header);
            for (d, name) in self.metadata.datasets.iter().enumerate() {
                let mut row = vec![name.clone()];
                for a in 0..algs.len() {
                    let m = cell_metric(self.cell(d, a));
                    row.push(format!("{:.4}±{:.4}", m.mean, m.std));
                }
                rows.push(row);
            }
            let mut footer = vec!["AR".to_string()];
            footer.extend(self.average_ranks.iter().map(|r| format!("{:.4}", rank_metric(r))));
            rows.push(footer);

            let widths: Vec<usize> = (0..rows[0].len())
                .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
                .collect();
            let _ = writeln!(
                out,
                "{title} (mean±std over {} restarts)",
                self.metadata.restarts
            );
            for row in &rows {
                let line: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(c, (cell, &w))| {
                        let pad = w - cell.chars().count();
                        if c == 0 {
                            format!("{cell}{}", " ".repeat(pad))
                        } else {
                            format!("{}{cell}", " ".repeat(pad))
                        }
                    })
                    .collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every algorithm on every dataset with seeds
/// `base_seed..base_seed + restarts`. Cells run on the current rayon pool.
pub fn run_benchmark(
    datasets: &[BenchmarkDataset],
    algorithms: &[Variant],
    restarts: usize,
    base_seed: u64,
) -> Result<BenchmarkReport, EvalError> {
    if restarts == 0 {
        return Err(EvalError::NoRestarts);
    }
    for d in datasets {
        if d.data.labels().is_none() {
            return Err(EvalError::MissingLabels(d.name.clone()));
        }
    }

    let jobs: Vec<(usize, usize, u64)> = (0..datasets.len())
        .flat_map(|d| {
            (0..algorithms.len()).flat_map(move |a| (0..restarts as u64).map(move |r| (d, a, base_seed + r)))
        })
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(d, a, seed)| {
            let entry = &datasets[d];
            let config = ClusteringConfig::new(entry.k, seed, algorithms[a]);
            let result = run(&entry.data, &config)?;
            Ok(RunRecord {
                seed,
                scores: Scores::compute(result.partition.assignment(), entry.data.labels().unwrap())?,
                objective: result.final_objective(),
                converged: result.converged,
                inner_iterations: result.inner_iterations,
                outer_iterations: result.outer_iterations,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let cells: Vec<BenchmarkCell> = records
        .chunks(restarts)
        .enumerate()
        .map(|(idx, runs)| {
            let (d, a) = (idx / algorithms.len(), idx % algorithms.len());
            let metric = |f: fn(&Scores) -> f64| MeanStd::of(&runs.iter().map(|r| f(&r.scores)).collect::<Vec<_>>());
            BenchmarkCell {
                dataset: datasets[d].name.clone(),
                algorithm: algorithms[a],
                ca: metric(|s| s.ca),
                ari: metric(|s| s.ari),
                nmi: metric(|s| s.nmi),
                runs: runs.to_vec(),
            }
        })
        .collect();

    let mut sums = vec![[0.0f64; 3]; algorithms.len()];
    for d in 0..datasets.len() {
        let row = &cells[d * algorithms.len()..(d + 1) * algorithms.len()];
        for (m, pick) in [
            (|c: &BenchmarkCell| c.ca.mean) as fn(&BenchmarkCell) -> f64,
            |c| c.ari.mean,
            |c| c.nmi.mean,
        ]
        .into_iter()
        .enumerate()
        {
            let ranks = average_tied_ranks(&row.iter().map(pick).collect::<Vec<_>>());
            for (a, rank) in ranks.into_iter().enumerate() {
                sums[a][m] += rank;
            }
        }
    }
    let nd = datasets.len().max(1) as f64;
    let average_ranks = algorithms
        .iter()
        .zip(&sums)
        .map(|(&algorithm, s)| AverageRank {
            algorithm,
            ca: s[0] / nd,
            ari: s[1] / nd,
            nmi: s[2] / nd,
        })
        .collect();

    Ok(BenchmarkReport {
        metadata: ReportMetadata {
            restarts,
            base_seed,
            datasets: datasets.iter().map(|d| d.name.clone()).collect(),
            algorithms: algorithms.to_vec(),
            std_divisor: "population (R)".into(),
            nmi_normalization: "arithmetic mean of entropies".into(),
            rank_ties: "mean of tied ranks, rank 1 = best".into(),
        },
        cells,
        average_ranks,
    })
}

/// Graph structures compared in the structure experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    /// Random connected graph.
    Rgg,
    /// Random line graph.
    Rglg,
    /// Fully connected graph.
    Fcg,
    /// Line graph through a user-supplied value ordering.
    Slg,
}

impl std::str::FromStr for StructureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rgg" => Ok(Self::Rgg),
            "rglg" => Ok(Self::Rglg),
            "fcg" => Ok(Self::Fcg),
            "slg" => Ok(Self::Slg),
            _ => Err(format!("unknown structure `{s}` (expected rgg, rglg, fcg or slg)")),
        }
    }
}

fn complete_edges(o: usize) -> EdgeSet {
    EdgeSet {
        node_count: o,
        edges: (0..o).flat_map(|u| ((u + 1)..o).map(move |s| (u, s))).collect(),
    }
}

/// Clustering accuracy of one distance structure over `trials` seeds,
/// sorted ascending.
///
/// Each trial starts from the k-modes partition for seed `base_seed + t`,
/// weights edges by the value-cluster distributions of that partition,
/// measures value distances as shortest paths over the chosen structure and
/// runs the inner loop to convergence with `k` equal to the class count.
/// `ordering[r]` lists attribute `r`'s value indices in line order and is
/// required for [`StructureKind::Slg`].
pub fn structure_experiment(
    ds: &CategoricalDataset,
    kind: StructureKind,
    ordering: Option<&[Vec<usize>]>,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<f64>, EvalError> {
    if trials == 0 {
        return Err(EvalError::NoTrials);
    }
    let truth = ds.labels().ok_or_else(|| EvalError::MissingLabels("input".into()))?;
    let k = ds.n_classes().unwrap_or(1);
    let lines = match (kind, ordering) {
        (StructureKind::Slg, None) => return Err(EvalError::MissingOrdering),
        (StructureKind::Slg, Some(orders)) => {
            if orders.len() != ds.n_attributes() {
                return Err(EvalError::MissingOrdering);
            }
            let trees = orders
                .iter()
                .enumerate()
                .map(|(r, order)| {
                    let o = ds.cardinality(r);
                    let mut seen = vec![false; o];
                    let valid = order.len() == o && order.iter().all(|&u| u < o && !std::mem::replace(&mut seen[u], true));
                    if !valid {
                        return Err(EvalError::InvalidOrdering {
                            attribute: r,
                            reason: format!("expected a permutation of 0..{o}"),
                        });
                    }
                    line_through(o, order).map_err(|e| EvalError::InvalidOrdering {
                        attribute: r,
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(trees)
        }
        _ => None,
    };

    let mut accuracies = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = base_seed + t;
            let initial = kmodes(ds, k, seed, DEFAULT_MAX_INNER)?.partition;
            let vcd = ClusterStats::from_partition(ds, &initial)
                .map_err(ClusterError::from)?
                .value_cluster_distributions();
            let metric: Vec<DistanceMatrix> = (0..ds.n_attributes())
                .map(|r| {
                    let g = build_weight_graph(&vcd, r);
                    let o = ds.cardinality(r);
                    match kind {
                        StructureKind::Rgg => {
                            shortest_path_distances(&random_connected_structure(o, attribute_seed(seed, r)), &g)
                        }
                        StructureKind::Rglg => {
                            trace_distance_matrix(&line_structure(o, attribute_seed(seed, r)).reweighted(&g))
                        }
                        StructureKind::Fcg => shortest_path_distances(&complete_edges(o), &g),
                        StructureKind::Slg => {
                            trace_distance_matrix(&lines.as_ref().expect("validated above")[r].reweighted(&g))
                        }
                    }
                })
                .collect();
            let (part, _) = run_with_metric(ds, &initial, &metric, DEFAULT_MAX_INNER)?;
            clustering_accuracy(part.assignment(), truth)
        })
        .collect::<Result<Vec<f64>, EvalError>>()?;
    accuracies.sort_by(f64::total_cmp);
    Ok(accuracies)
}
