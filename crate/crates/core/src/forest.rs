//! Value graphs, order trees and trace distances.
//!
//! An attribute's possible values form a complete weighted graph. Its
//! minimum spanning tree is the attribute's order tree; the distance between
//! two values is the sum of edge weights on their unique tree path. The
//! alternative structures used by ablations and the graph-structure study
//! (random lines, random connected graphs, the complete graph itself) live
//! here too.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::AttributeSchema;
use crate::stats::{minkowski, ValueClusterDistributions, DEFAULT_NORM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForestError {
    #[error("node {node} out of range for a structure with {size} nodes")]
    InvalidNode { node: usize, size: usize },
    #[error("tree over {nodes} nodes needs {expected} edges, got {found}")]
    EdgeCount {
        nodes: usize,
        expected: usize,
        found: usize,
    },
    #[error("edge list does not form a spanning tree")]
    NotATree,
    #[error("edge weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error("forest has {forest} attributes, dataset has {dataset}")]
    AttributeMismatch { forest: usize, dataset: usize },
    #[error("invalid forest document: {0}")]
    Document(String),
}

/// Dense symmetric weight matrix over one attribute's values.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedValueGraph {
    attribute: usize,
    size: usize,
    weights: Vec<f64>,
}

impl WeightedValueGraph {
    /// Builds the graph by evaluating `weight(u, s)` for `u < s`.
    pub fn from_fn(attribute: usize, size: usize, mut weight: impl FnMut(usize, usize) -> f64) -> Self {
        let mut weights = vec![0.0; size * size];
        for u in 0..size {
            for s in (u + 1)..size {
                let w = weight(u, s);
                weights[u * size + s] = w;
                weights[s * size + u] = w;
            }
        }
        Self {
            attribute,
            size,
            weights,
        }
    }

    pub fn attribute(&self) -> usize {
        self.attribute
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, u: usize, s: usize) -> f64 {
        self.weights[u * self.size + s]
    }

    pub fn as_matrix(&self) -> DistanceMatrix {
        DistanceMatrix {
            size: self.size,
            values: self.weights.clone(),
        }
    }
}

/// Edge weights from the Euclidean distance between value-to-cluster
/// distributions.
pub fn build_weight_graph(vcd: &ValueClusterDistributions, r: usize) -> WeightedValueGraph {
    build_weight_graph_with_norm(vcd, r, DEFAULT_NORM)
}

pub fn build_weight_graph_with_norm(
    vcd: &ValueClusterDistributions,
    r: usize,
    p: f64,
) -> WeightedValueGraph {
    WeightedValueGraph::from_fn(r, vcd.cardinality(r), |u, s| {
        minkowski(vcd.row(r, u), vcd.row(r, s), p).expect("rows share length k")
    })
}

/// Overlap weights: 0 on the diagonal, 1 everywhere else.
pub fn hamming_graph(r: usize, size: usize) -> WeightedValueGraph {
    WeightedValueGraph::from_fn(r, size, |_, _| 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub u: usize,
    pub s: usize,
    pub weight: f64,
}

#[derive(Deserialize)]
struct RawTree {
    attribute: usize,
    node_count: usize,
    edges: Vec<TreeEdge>,
}

/// Spanning tree over one attribute's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTree")]
pub struct OrderTree {
    attribute: usize,
    node_count: usize,
    edges: Vec<TreeEdge>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl TryFrom<RawTree> for OrderTree {
    type Error = ForestError;

    fn try_from(raw: RawTree) -> Result<Self, Self::Error> {
        OrderTree::from_edges(raw.attribute, raw.node_count, raw.edges)
    }
}

impl OrderTree {
    /// Validates that `edges` span `node_count` nodes without cycles.
    pub fn from_edges(attribute: usize, node_count: usize, edges: Vec<TreeEdge>) -> Result<Self, ForestError> {
        let expected = node_count.saturating_sub(1);
        if edges.len() != expected {
            return Err(ForestError::EdgeCount {
                nodes: node_count,
                expected,
                found: edges.len(),
            });
        }
        let mut sets = DisjointSets::new(node_count);
        let mut adjacency = vec![Vec::new(); node_count];
        for e in &edges {
            for node in [e.u, e.s] {
                if node >= node_count {
                    return Err(ForestError::InvalidNode {
                        node,
                        size: node_count,
                    });
                }
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(ForestError::BadWeight(e.weight));
            }
            if !sets.union(e.u, e.s) {
                return Err(ForestError::NotATree);
            }
            adjacency[e.u].push((e.s, e.weight));
            adjacency[e.s].push((e.u, e.weight));
        }
        Ok(Self {
            attribute,
            node_count,
            edges,
            adjacency,
        })
    }

    pub fn attribute(&self) -> usize {
        self.attribute
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Same topology with every edge weight (and the attribute index) taken
    /// from `graph`.
    pub fn reweighted(&self, graph: &WeightedValueGraph) -> OrderTree {
        let edges = self
            .edges
            .iter()
            .map(|e| TreeEdge {
                weight: graph.get(e.u, e.s),
                ..*e
            })
            .collect();
        OrderTree::from_edges(graph.attribute(), self.node_count, edges)
            .expect("reweighting keeps a valid tree")
    }

    /// True when no node has more than two neighbours.
    pub fn is_path(&self) -> bool {
        self.adjacency.iter().all(|adj| adj.len() <= 2)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal over all `u < s` pairs, ordered by `(weight, u, s)`.
pub fn minimum_spanning_tree(g: &WeightedValueGraph) -> OrderTree {
    let o = g.size();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(o * o.saturating_sub(1) / 2);
    for u in 0..o {
        for s in (u + 1)..o {
            candidates.push((g.get(u, s), u, s));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut sets = DisjointSets::new(o);
    let mut edges = Vec::with_capacity(o.saturating_sub(1));
    for (weight, u, s) in candidates {
        if sets.union(u, s) {
            edges.push(TreeEdge { u, s, weight });
            if edges.len() + 1 == o {
                break;
            }
        }
    }
    OrderTree::from_edges(g.attribute(), o, edges).expect("kruskal yields a spanning tree")
}

/// Edge weights along the unique tree path from `u` to `s`, in walk order
/// from `u`.
pub fn order_trace(t: &OrderTree, u: usize, s: usize) -> Result<Vec<f64>, ForestError> {
    for node in [u, s] {
        if node >= t.node_count() {
            return Err(ForestError::InvalidNode {
                node,
                size: t.node_count(),
            });
        }
    }
    if u == s {
        return Ok(Vec::new());
    }
    // BFS from s records, for every node, the edge leading back towards s
    let mut toward_s: Vec<Option<(usize, f64)>> = vec![None; t.node_count()];
    let mut visited = vec![false; t.node_count()];
    let mut queue = VecDeque::from([s]);
    visited[s] = true;
    while let Some(x) = queue.pop_front() {
        for &(y, w) in t.neighbors(x) {
            if !visited[y] {
                visited[y] = true;
                toward_s[y] = Some((x, w));
                queue.push_back(y);
            }
        }
    }
    let mut trace = Vec::new();
    let mut at = u;
    while at != s {
        let (next, w) = toward_s[at].expect("tree is connected");
        trace.push(w);
        at = next;
    }
    Ok(trace)
}

/// Symmetric `o x o` matrix of value distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    size: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            values: vec![0.0; size * size],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ForestError> {
        let size = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != size) {
            return Err(ForestError::Document(format!(
                "distance row of length {} in a {size}x{size} matrix",
                bad.len()
            )));
        }
        Ok(Self {
            size,
            values: rows.concat(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, u: usize, s: usize) -> f64 {
        self.values[u * self.size + s]
    }

    /// Distances from `u` to every value.
    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.size..(u + 1) * self.size]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.size.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// All-pairs path sums, one traversal per source.
pub fn trace_distance_matrix(t: &OrderTree) -> DistanceMatrix {
    let o = t.node_count();
    let mut values = vec![0.0; o * o];
    let mut stack = Vec::with_capacity(o);
    for source in 0..o {
        let row = &mut values[source * o..(source + 1) * o];
        // (node, parent, distance from source)
        stack.push((source, usize::MAX, 0.0));
        while let Some((x, parent, dist)) = stack.pop() {
            row[x] = dist;
            for &(y, w) in t.neighbors(x) {
                if y != parent {
                    stack.push((y, x, dist + w));
                }
            }
        }
    }
    mirror_upper(&mut values, o);
    DistanceMatrix { size: o, values }
}

// Path sums taken from opposite ends can round differently; keep one.
fn mirror_upper(values: &mut [f64], o: usize) {
    for u in 0..o {
        for s in (u + 1)..o {
            values[s * o + u] = values[u * o + s];
        }
    }
}

/// Direct pairwise weights used as distances.
pub fn fully_connected_distances(g: &WeightedValueGraph) -> DistanceMatrix {
    g.as_matrix()
}

/// Seed for attribute `r`'s random structure, decorrelated across attributes.
pub fn attribute_seed(seed: u64, r: usize) -> u64 {
    seed ^ (r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// A path through a seeded random permutation of the values. Edge weights are
/// zero until filled with [`OrderTree::reweighted`].
pub fn line_structure(o: usize, seed: u64) -> OrderTree {
    let mut order: Vec<usize> = (0..o).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    line_through(o, &order).expect("a permutation yields a path")
}

/// A path visiting the values in the given order.
pub fn line_through(o: usize, order: &[usize]) -> Result<OrderTree, ForestError> {
    let edges = order
        .windows(2)
        .map(|w| TreeEdge {
            u: w[0],
            s: w[1],
            weight: 0.0,
        })
        .collect();
    OrderTree::from_edges(0, o, edges)
}

/// Undirected edge set over `node_count` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSet {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let mut sets = DisjointSets::new(self.node_count);
        let mut components = self.node_count;
        for &(u, s) in &self.edges {
            if sets.union(u, s) {
                components -= 1;
            }
        }
        components == 1
    }

    pub fn from_tree(t: &OrderTree) -> Self {
        Self {
            node_count: t.node_count(),
            edges: t.edges().iter().map(|e| (e.u, e.s)).collect(),
        }
    }
}

/// A uniformly attached random spanning tree plus every remaining pair
/// included independently with probability one half.
pub fn random_connected_structure(o: usize, seed: u64) -> EdgeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..o).collect();
    order.shuffle(&mut rng);
    let mut present = vec![false; o * o];
    let mut edges = Vec::new();
    for i in 1..o {
        let (u, s) = (order[i], order[rng.gen_range(0..i)]);
        let (u, s) = (u.min(s), u.max(s));
        present[u * o + s] = true;
        edges.push((u, s));
    }
    for u in 0..o {
        for s in (u + 1)..o {
            if !present[u * o + s] && rng.gen_bool(0.5) {
                edges.push((u, s));
            }
        }
    }
    EdgeSet { node_count: o, edges }
}

/// Shortest-path distances over `structure`, with edge lengths from `g`.
pub fn shortest_path_distances(structure: &EdgeSet, g: &WeightedValueGraph) -> DistanceMatrix {
    let o = structure.node_count;
    let mut d = vec![f64::INFINITY; o * o];
    for u in 0..o {
        d[u * o + u] = 0.0;
    }
    for &(u, s) in &structure.edges {
        let w = g.get(u, s);
        if w < d[u * o + s] {
            d[u * o + s] = w;
            d[s * o + u] = w;
        }
    }
    for m in 0..o {
        for u in 0..o {
            let um = d[u * o + m];
            if um.is_infinite() {
                continue;
            }
            for s in 0..o {
                let via = um + d[m * o + s];
                if via < d[u * o + s] {
                    d[u * o + s] = via;
                }
            }
        }
    }
    mirror_upper(&mut d, o);
    DistanceMatrix { size: o, values: d }
}

/// One order tree and its distance matrix per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderForest {
    trees: Vec<OrderTree>,
    distances: Vec<DistanceMatrix>,
}

impl OrderForest {
    pub fn from_trees(trees: Vec<OrderTree>) -> Self {
        let distances = trees.iter().map(trace_distance_matrix).collect();
        Self { trees, distances }
    }

    pub fn trees(&self) -> &[OrderTree] {
        &self.trees
    }

    pub fn distances(&self) -> &[DistanceMatrix] {
        &self.distances
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Serializable view carrying each attribute's vocabulary.
    pub fn to_document(&self, schemas: &[AttributeSchema]) -> Result<ForestDocument, ForestError> {
        if schemas.len() != self.trees.len() {
            return Err(ForestError::AttributeMismatch {
                forest: self.trees.len(),
                dataset: schemas.len(),
            });
        }
        let attributes = self
            .trees
            .iter()
            .zip(&self.distances)
            .zip(schemas)
            .map(|((tree, dist), schema)| AttributeTree {
                name: schema.name.clone(),
                vocabulary: schema.vocabulary.clone(),
                edges: tree.edges().to_vec(),
                distances: dist.rows(),
            })
            .collect();
        Ok(ForestDocument { attributes })
    }
}

/// JSON form of a forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestDocument {
    pub attributes: Vec<AttributeTree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeTree {
    pub name: String,
    pub vocabulary: Vec<String>,
    pub edges: Vec<TreeEdge>,
    pub distances: Vec<Vec<f64>>,
}

impl ForestDocument {
    /// Rebuilds the forest, checking stored distances against the tree.
    pub fn to_forest(&self) -> Result<OrderForest, ForestError> {
        let mut trees = Vec::with_capacity(self.attributes.len());
        let mut distances = Vec::with_capacity(self.attributes.len());
        for (r, attr) in self.attributes.iter().enumerate() {
            let tree = OrderTree::from_edges(r, attr.vocabulary.len(), attr.edges.clone())?;
            let stored = DistanceMatrix::from_rows(&attr.distances)?;
            if stored.size() != tree.node_count() {
                return Err(ForestError::Document(format!(
                    "attribute `{}` has {} values but a {}x{} distance matrix",
                    attr.name,
                    tree.node_count(),
                    stored.size(),
                    stored.size()
                )));
            }
            trees.push(tree);
            distances.push(stored);
        }
        Ok(OrderForest { trees, distances })
    }

    /// Graphviz rendering, one `graph` block per attribute.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        for (r, attr) in self.attributes.iter().enumerate() {
            let _ = writeln!(out, "graph \"{}\" {{", escape_dot(&attr.name));
            let _ = writeln!(out, "  // attribute {r}");
            for (u, value) in attr.vocabulary.iter().enumerate() {
                let _ = writeln!(out, "  n{u} [label=\"{}\"];", escape_dot(value));
            }
            for e in &attr.edges {
                let _ = writeln!(out, "  n{} -- n{} [label=\"{:.6}\"];", e.u, e.s, e.weight);
            }
            out.push_str("}\n");
        }
        out
    }
}

fn escape_dot(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}
